//! Repeated seeded runs over the parameter grid.

use anyhow::Context;
use rayon::prelude::*;
use serde::Serialize;
use trish_core::{
    default_initial_sample_size, run_sg_with, run_trish_as_with, run_trish_with, HyperParams64, RngState, RunOptions,
};

use crate::calibrate::compute_g;
use crate::config::{Algorithm, ExperimentConfig};
use crate::grid::{build_grid_from, Triplet};
use crate::workload::Workload;

/// One averaged point of an EGE-indexed curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub ege: f64,
    pub train_loss: f64,
    pub test_metric: f64,
}

/// Outcome of a single run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub metric: f64,
    pub final_batch: usize,
    pub case_fractions: [f64; 3],
    pub iterations: usize,
    pub final_ege: f64,
    pub curve: Vec<CurvePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCellResult {
    pub cell: usize,
    pub triplet: Triplet,
    pub algorithm: Algorithm,
    pub mean_metric: f64,
    pub std_metric: f64,
    pub mean_final_batch: f64,
    pub case_fractions: [f64; 3],
    pub curve: Vec<CurvePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridReport {
    pub g: f64,
    pub reps: usize,
    pub maximize: bool,
    pub cells: Vec<GridCellResult>,
}

impl GridReport {
    pub fn cell(&self, cell: usize, algorithm: Algorithm) -> Option<&GridCellResult> {
        self.cells.iter().find(|c| c.cell == cell && c.algorithm == algorithm)
    }
}

/// Seed stream for repetition `rep` of grid cell `cell`; shared by all
/// algorithms so they see the same starting point.
pub fn run_seed(master: u64, cell: usize, rep: usize) -> RngState {
    RngState::for_run(master, ((cell as u64) << 32) | rep as u64)
}

/// Runs one algorithm once, recording the curve at `points` equally spaced
/// EGE checkpoints (plus the starting point).
pub fn single_run(
    workload: &Workload,
    cfg: &ExperimentConfig,
    triplet: &Triplet,
    algorithm: Algorithm,
    rng: &mut RngState,
) -> anyhow::Result<RunSummary> {
    let problem = workload.problem();
    let n = problem.num_components();
    let x0 = workload.initial_point(rng);
    let budget = cfg.budget_epochs;
    let points = cfg.curve_points;
    let checkpoint = |j: usize| budget * j as f64 / points as f64;
    let mut curve = vec![CurvePoint { ege: 0.0, train_loss: workload.train_loss(&x0), test_metric: workload.test_metric(&x0) }];
    let mut observer = |r: &trish_core::IterationRecord, x: &[f64]| {
        while curve.len() <= points && r.ege >= checkpoint(curve.len()) {
            let ege = checkpoint(curve.len());
            curve.push(CurvePoint { ege, train_loss: workload.train_loss(x), test_metric: workload.test_metric(x) });
        }
    };
    let opts = RunOptions::epochs(budget);
    let params = HyperParams64::new(triplet.alpha, triplet.gamma1, triplet.gamma2)
        .map(|p| p.with_tests(cfg.theta, cfg.nu).with_window(cfg.window).with_avg_threshold(cfg.avg_threshold));
    let out = match algorithm {
        Algorithm::Trish => run_trish_with(problem, x0, &params?, cfg.batch_size.min(n), opts, rng, &mut observer),
        Algorithm::TrishAs => {
            let s0 = cfg.s0.unwrap_or_else(|| default_initial_sample_size(n)).min(n);
            run_trish_as_with(problem, x0, &params?, s0, opts, rng, &mut observer)
        }
        Algorithm::Sg => run_sg_with(problem, x0, triplet.alpha, cfg.batch_size.min(n), opts, rng, &mut observer),
    }?;
    debug_assert_eq!(curve.len(), points + 1);
    Ok(RunSummary {
        metric: workload.test_metric(&out.x),
        final_batch: out.final_batch_size().unwrap_or(0),
        case_fractions: out.case_fractions(),
        iterations: out.records.len(),
        final_ege: out.final_ege(),
        curve,
    })
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Averages repetitions of one cell and algorithm.
pub fn aggregate(cell: usize, triplet: Triplet, algorithm: Algorithm, runs: &[RunSummary]) -> GridCellResult {
    let reps = runs.len() as f64;
    let metrics: Vec<f64> = runs.iter().map(|r| r.metric).collect();
    let (mean_metric, std_metric) = mean_std(&metrics);
    let mut case_fractions = [0.0; 3];
    for r in runs {
        for (acc, v) in case_fractions.iter_mut().zip(r.case_fractions) {
            *acc += v / reps;
        }
    }
    let curve = (0..runs[0].curve.len())
        .map(|j| CurvePoint {
            ege: runs[0].curve[j].ege,
            train_loss: runs.iter().map(|r| r.curve[j].train_loss).sum::<f64>() / reps,
            test_metric: runs.iter().map(|r| r.curve[j].test_metric).sum::<f64>() / reps,
        })
        .collect();
    GridCellResult {
        cell,
        triplet,
        algorithm,
        mean_metric,
        std_metric,
        mean_final_batch: runs.iter().map(|r| r.final_batch as f64).sum::<f64>() / reps,
        case_fractions,
        curve,
    }
}

/// `G` from the config, or measured on the workload with `g_seed`.
pub fn resolve_g(cfg: &ExperimentConfig, workload: &Workload) -> anyhow::Result<f64> {
    match cfg.g_value {
        Some(g) => Ok(g),
        None => {
            let mut rng = RngState::new(cfg.g_seed);
            let x0 = workload.initial_point(&mut rng);
            Ok(compute_g(workload.problem(), x0, &mut rng)?)
        }
    }
}

/// Runs every cell × algorithm × repetition; results come back in grid order
/// (cell-major, algorithms in config order) whatever the thread scheduling.
pub fn run_grid_on(cfg: &ExperimentConfig, workload: &Workload, g: f64) -> anyhow::Result<GridReport> {
    cfg.validate()?;
    let grid = build_grid_from(g, &cfg.alphas, &cfg.gamma1_multipliers, &cfg.gamma2_multipliers);
    let jobs: Vec<(usize, Algorithm, usize)> = (0..grid.len())
        .flat_map(|c| cfg.algorithms.iter().flat_map(move |&a| (0..cfg.reps).map(move |r| (c, a, r))))
        .collect();
    let work = || {
        jobs.par_iter()
            .map(|&(c, a, r)| {
                single_run(workload, cfg, &grid[c], a, &mut run_seed(cfg.seed, c, r))
                    .with_context(|| format!("cell {c} ({}) repetition {r}", a.name()))
            })
            .collect::<anyhow::Result<Vec<_>>>()
    };
    let runs = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build()?.install(work)?,
        None => work()?,
    };
    let cells = runs
        .chunks(cfg.reps)
        .zip(jobs.iter().step_by(cfg.reps))
        .map(|(chunk, &(c, a, _))| aggregate(c, grid[c], a, chunk))
        .collect();
    Ok(GridReport { g, reps: cfg.reps, maximize: workload.maximize_metric(), cells })
}

/// Loads the data, resolves `G`, and runs the grid.
pub fn run_grid(cfg: &ExperimentConfig) -> anyhow::Result<GridReport> {
    let workload = Workload::from_config(cfg)?;
    let g = resolve_g(cfg, &workload)?;
    run_grid_on(cfg, &workload, g)
}
