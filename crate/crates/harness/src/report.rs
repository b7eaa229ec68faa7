//! Best-cell summaries and CSV/JSON output.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

use crate::config::Algorithm;
use crate::grid::Triplet;
use crate::runner::{GridCellResult, GridReport};

pub const GRID_HEADER: [&str; 10] = [
    "alpha",
    "gamma1",
    "gamma2",
    "algorithm",
    "mean_metric",
    "std_metric",
    "mean_final_batch",
    "case1_frac",
    "case2_frac",
    "case3_frac",
];

pub const CURVE_HEADER: [&str; 3] = ["ege", "train_loss", "test_metric"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellValues {
    pub mean_metric: f64,
    pub std_metric: f64,
    pub mean_final_batch: f64,
}

/// Best triplet for `selected_by`, with every algorithm's values at that triplet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestRow {
    pub selected_by: Algorithm,
    pub cell: usize,
    pub triplet: Triplet,
    pub values: BTreeMap<&'static str, CellValues>,
}

/// One row per algorithm, in order of first appearance. Accuracy is
/// maximized and loss minimized; ties go to the earlier cell.
pub fn summarize_best(cells: &[GridCellResult], maximize: bool) -> Vec<BestRow> {
    let mut algorithms: Vec<Algorithm> = Vec::new();
    for c in cells {
        if !algorithms.contains(&c.algorithm) {
            algorithms.push(c.algorithm);
        }
    }
    algorithms
        .into_iter()
        .filter_map(|alg| {
            let mut best: Option<&GridCellResult> = None;
            for c in cells.iter().filter(|c| c.algorithm == alg) {
                let better = best.is_none_or(|b| {
                    if maximize {
                        c.mean_metric > b.mean_metric
                    } else {
                        c.mean_metric < b.mean_metric
                    }
                });
                if better {
                    best = Some(c);
                }
            }
            let best = best?;
            let values = cells
                .iter()
                .filter(|c| c.cell == best.cell)
                .map(|c| {
                    let v = CellValues {
                        mean_metric: c.mean_metric,
                        std_metric: c.std_metric,
                        mean_final_batch: c.mean_final_batch,
                    };
                    (c.algorithm.name(), v)
                })
                .collect();
            Some(BestRow { selected_by: alg, cell: best.cell, triplet: best.triplet, values })
        })
        .collect()
}

pub fn curve_file_name(cell: &GridCellResult) -> String {
    format!("cell{:02}_{}.csv", cell.cell, cell.algorithm.name())
}

pub fn write_grid_csv(cells: &[GridCellResult], path: &Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(GRID_HEADER)?;
    for c in cells {
        let fields = [
            c.triplet.alpha.to_string(),
            c.triplet.gamma1.to_string(),
            c.triplet.gamma2.to_string(),
            c.algorithm.name().to_string(),
            c.mean_metric.to_string(),
            c.std_metric.to_string(),
            c.mean_final_batch.to_string(),
            c.case_fractions[0].to_string(),
            c.case_fractions[1].to_string(),
            c.case_fractions[2].to_string(),
        ];
        w.write_record(&fields)?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_curve_csv(cell: &GridCellResult, path: &Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(CURVE_HEADER)?;
    for p in &cell.curve {
        w.write_record([p.ege.to_string(), p.train_loss.to_string(), p.test_metric.to_string()])?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Serialize)]
struct Summary<'a> {
    g: f64,
    reps: usize,
    grid_size: usize,
    metric: &'static str,
    best: Vec<BestRow>,
    cells: &'a [GridCellResult],
}

/// Writes `grid.csv`, `curves/<cell>.csv` and `summary.json` under `dir`.
pub fn write_outputs(report: &GridReport, dir: &Path) -> anyhow::Result<Vec<BestRow>> {
    let curves = dir.join("curves");
    fs::create_dir_all(&curves).with_context(|| format!("creating {}", curves.display()))?;
    write_grid_csv(&report.cells, &dir.join("grid.csv"))?;
    for c in &report.cells {
        write_curve_csv(c, &curves.join(curve_file_name(c)))?;
    }
    let best = summarize_best(&report.cells, report.maximize);
    let summary = Summary {
        g: report.g,
        reps: report.reps,
        grid_size: report.cells.iter().map(|c| c.cell).max().map_or(0, |m| m + 1),
        metric: if report.maximize { "testing_accuracy" } else { "testing_loss" },
        best: best.clone(),
        cells: &report.cells,
    };
    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary)?;
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(best)
}

/// Plain-text table of the best rows.
pub fn format_best(best: &[BestRow], maximize: bool) -> String {
    let metric = if maximize { "accuracy" } else { "test loss" };
    let mut out = format!("{:<9} {:>9} {:>9} {:>9}  per-algorithm {metric} / mean final |S|\n", "best for", "alpha", "gamma1", "gamma2");
    for row in best {
        out.push_str(&format!(
            "{:<9} {:>9.4} {:>9.4} {:>9.4} ",
            row.selected_by.name(),
            row.triplet.alpha,
            row.triplet.gamma1,
            row.triplet.gamma2
        ));
        for (name, v) in &row.values {
            out.push_str(&format!(" {name}: {:.4} / {:.1}", v.mean_metric, v.mean_final_batch));
        }
        out.push('\n');
    }
    out
}
