//! Measuring the gradient scale `G` used to place the γ grids.

use trish_core::{run_sg, FiniteSumProblem, Result, RngState};

pub const CALIBRATION_ALPHA: f64 = 0.1;
pub const CALIBRATION_BATCH: usize = 64;

/// Mean stochastic-gradient norm over one epoch of SG with stepsize 0.1 and
/// batch size 64 (or `N` when smaller), i.e. over `⌈N/64⌉` iterations.
pub fn compute_g<P: FiniteSumProblem<f64> + ?Sized>(problem: &P, x0: Vec<f64>, rng: &mut RngState) -> Result<f64> {
    let batch = CALIBRATION_BATCH.min(problem.num_components());
    let out = run_sg(problem, x0, CALIBRATION_ALPHA, batch, 1.0, rng)?;
    let total: f64 = out.records.iter().map(|r| r.grad_norm).sum();
    Ok(total / out.records.len() as f64)
}
