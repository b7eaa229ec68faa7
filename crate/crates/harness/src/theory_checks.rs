//! Standard synthetic setups for the theory checks.

use trish_core::theory::{
    random_admissible_params, verify_lemma1, verify_theorem_gap, verify_theorem_vanishing, GapReport,
    SyntheticQuadratic,
};
use trish_core::{classify_case, sampled_gradient, HyperParams64, Result, RngState, SampleBatch};

pub const LEMMA_COMPONENTS: usize = 6;
pub const LEMMA_BATCH: usize = 2;
pub const GAP_COMPONENTS: usize = 8;
pub const GAP_BATCH: usize = 2;
pub const GAP_HORIZON: usize = 2000;
pub const GAP_REPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LemmaSweep {
    pub trials: usize,
    pub violations: usize,
    /// How often each step case occurred across all enumerated batches.
    pub case_counts: [usize; 3],
}

/// Random points and admissible parameters on fresh 3-dimensional problems
/// with 6 components, batches of 2, every expectation exact.
pub fn lemma1_sweep(trials: usize, seed: u64) -> Result<LemmaSweep> {
    let mut rng = RngState::new(seed);
    let mut out = LemmaSweep { trials, violations: 0, case_counts: [0; 3] };
    for _ in 0..trials {
        let p = SyntheticQuadratic::random_additive(3, LEMMA_COMPONENTS, 0.5, 2.0, 1.0, &mut rng)?;
        let params = random_admissible_params(p.lipschitz(), &mut rng);
        let scale = 10f64.powf(rng.uniform_vec(1, -2.0, 2.0)[0]);
        let x: Vec<f64> = rng.uniform_vec(3, -1.0, 1.0).iter().map(|v| v * scale).collect();
        if !verify_lemma1(&p, &x, &params, LEMMA_BATCH)?.holds() {
            out.violations += 1;
        }
        trish_core::theory::for_each_batch(LEMMA_COMPONENTS, LEMMA_BATCH, |b| {
            let batch = SampleBatch::new(b.to_vec(), LEMMA_COMPONENTS).expect("valid batch");
            let g = sampled_gradient(&p, &x, &batch).expect("finite gradient");
            out.case_counts[classify_case(g.norm(), params.gamma1, params.gamma2).index()] += 1;
        })?;
    }
    Ok(out)
}

/// Noisy PL setting: `D ∈ [0.5, 2]`, additive noise, `γ₁ = 4`, `γ₂ = 1`, `α = 0.01`.
pub fn theorem2_check(seed: u64) -> Result<GapReport<f64>> {
    let mut rng = RngState::new(seed);
    let p = SyntheticQuadratic::random_additive(4, GAP_COMPONENTS, 0.5, 2.0, 1.0, &mut rng)?;
    let params = HyperParams64::new(0.01, 4.0, 1.0)?;
    let x0 = rng.uniform_vec(4, -1.0, 1.0);
    verify_theorem_gap(&p, &x0, &params, GAP_BATCH, GAP_HORIZON, GAP_REPS, seed)
}

/// Vanishing-noise setting: multiplicative noise, `γ₁ = 1`, `γ₂ = 0.95`, `α = 0.1`.
pub fn theorem3_check(seed: u64) -> Result<GapReport<f64>> {
    let mut rng = RngState::new(seed);
    let p = SyntheticQuadratic::random_multiplicative(4, GAP_COMPONENTS, 0.5, 2.0, 0.3, &mut rng)?;
    let params = HyperParams64::new(0.1, 1.0, 0.95)?;
    let x0 = rng.uniform_vec(4, -1.0, 1.0);
    verify_theorem_vanishing(&p, &x0, &params, GAP_BATCH, GAP_HORIZON, GAP_REPS, seed)
}
