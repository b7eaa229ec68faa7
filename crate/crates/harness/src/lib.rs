//! Experiment harness: `G` calibration, parameter grids with repetitions,
//! CSV/JSON reports, data conversion and theory checks.

pub mod calibrate;
pub mod config;
pub mod convert;
pub mod grid;
pub mod report;
pub mod runner;
pub mod theory_checks;
pub mod workload;

pub use calibrate::compute_g;
pub use config::{Algorithm, ExperimentConfig, InitRule, ModelConfig, Normalize};
pub use grid::{build_grid, build_grid_from, nearest_cell, Triplet};
pub use report::{summarize_best, write_outputs, BestRow};
pub use runner::{run_grid, run_grid_on, GridCellResult, GridReport};
pub use workload::Workload;
