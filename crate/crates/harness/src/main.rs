#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use trish_core::RngState;
use trish_harness::config::{ExperimentConfig, InitRule, ModelConfig};
use trish_harness::convert::{convert_csv, ConvertOptions};
use trish_harness::report::format_best;
use trish_harness::workload::{load_libsvm, Workload};
use trish_harness::{compute_g, run_grid, theory_checks, write_outputs};

#[derive(Parser)]
#[command(name = "trish", version, about = "TRish experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CalibrationModel {
    Logistic,
    Nn,
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoryModule {
    Lemma1,
    Thm2,
    Thm3,
}

#[derive(Subcommand)]
enum Command {
    /// Run the parameter grid described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Measure G on a LIBSVM dataset.
    CalibrateG {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum, default_value = "logistic")]
        model: CalibrationModel,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Labels mapped to the positive class (default: labels > 0).
        #[arg(long, value_delimiter = ',')]
        positive_labels: Option<Vec<f64>>,
    },
    /// Check the expected-decrease and gap bounds on synthetic quadratics.
    VerifyTheory {
        #[arg(long, value_enum)]
        module: Option<TheoryModule>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Convert a dense delimited table to LIBSVM.
    Convert {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        libsvm: PathBuf,
        /// Zero-based label column.
        #[arg(long, default_value_t = 0)]
        label_col: usize,
        #[arg(long, default_value = ",")]
        delimiter: char,
        /// Zero-based columns to drop.
        #[arg(long, value_delimiter = ',')]
        skip_cols: Vec<usize>,
        #[arg(long)]
        missing: Option<String>,
        #[arg(long)]
        decimal_comma: bool,
        #[arg(long)]
        no_header: bool,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = run_grid(&cfg)?;
            let best = write_outputs(&report, &cfg.output_dir)?;
            println!("G = {}", report.g);
            print!("{}", format_best(&best, report.maximize));
            println!("results in {}", cfg.output_dir.display());
        }
        Command::CalibrateG { dataset, model, seed, positive_labels } => {
            let data = load_libsvm(&dataset)?;
            let (model, init) = match model {
                CalibrationModel::Logistic => (ModelConfig::Logistic, InitRule::Zero),
                CalibrationModel::Nn => (ModelConfig::NnClassifier { hidden_units: 5 }, InitRule::Uniform),
            };
            let workload = Workload::from_data(&model, &data, &data, positive_labels.as_deref(), init)?;
            let mut rng = RngState::new(seed);
            let x0 = workload.initial_point(&mut rng);
            println!("{}", compute_g(workload.problem(), x0, &mut rng)?);
        }
        Command::VerifyTheory { module, seed } => {
            let all = module.is_none();
            let mut failed = false;
            if all || matches!(module, Some(TheoryModule::Lemma1)) {
                let s = theory_checks::lemma1_sweep(1000, seed)?;
                println!(
                    "lemma1: {} trials, {} violations, cases {:?}",
                    s.trials, s.violations, s.case_counts
                );
                failed |= s.violations > 0;
            }
            if all || matches!(module, Some(TheoryModule::Thm2)) {
                let r = theory_checks::theorem2_check(seed)?;
                println!(
                    "thm2: mean gap {:.3e} (se {:.1e}) vs limit bound {:.3e}, M_g {:.3e}, beta {:.3}",
                    r.mean_gap, r.std_error, r.limit_bound, r.constants.noise_bound, r.beta
                );
                failed |= !r.plateau_respected();
            }
            if all || matches!(module, Some(TheoryModule::Thm3)) {
                let r = theory_checks::theorem3_check(seed)?;
                println!(
                    "thm3: mean gap {:.3e} (se {:.1e}), M2 {:.4}, horizon bound {:.3e}",
                    r.mean_gap, r.std_error, r.constants.second_moment, r.horizon_bound
                );
                failed |= !(r.mean_gap < 1e-8);
            }
            if failed {
                bail!("a theory check failed");
            }
        }
        Command::Convert { csv, libsvm, label_col, delimiter, skip_cols, missing, decimal_comma, no_header } => {
            if !delimiter.is_ascii() {
                bail!("delimiter must be a single ASCII character");
            }
            let opts = ConvertOptions {
                delimiter: delimiter as u8,
                has_header: !no_header,
                label_col,
                skip_cols,
                missing,
                decimal_comma,
            };
            let input = File::open(&csv).with_context(|| format!("opening {}", csv.display()))?;
            let output = File::create(&libsvm).with_context(|| format!("creating {}", libsvm.display()))?;
            let stats = convert_csv(BufReader::new(input), BufWriter::new(output), &opts)?;
            println!(
                "{} rows read, {} written, {} dropped for a missing label, {} missing feature cells",
                stats.rows_read, stats.rows_written, stats.dropped_rows, stats.missing_features
            );
        }
    }
    Ok(())
}
