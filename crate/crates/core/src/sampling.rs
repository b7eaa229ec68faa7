//! Adaptive sample-size control: the practical inner-product and orthogonality
//! tests, the batch growth rule, and the averaged-gradient check used when the
//! batch size has stalled.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg;
use crate::optimizer::HyperParams;
use crate::problem::GradientEstimate;
use crate::scalar::Scalar;

/// Sample variances over one batch and the outcome of both tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceReport<T> {
    /// Sample variance of `∇F_iᵀ ref` over the batch.
    pub var_inner: T,
    /// Sample second moment of the part of `∇F_i` orthogonal to `ref`.
    pub var_orth: T,
    pub inner_ok: bool,
    pub orth_ok: bool,
}

impl<T> VarianceReport<T> {
    pub fn passed(&self) -> bool {
        self.inner_ok && self.orth_ok
    }
}

/// Runs both practical tests on `est`'s per-component gradients against `reference`.
///
/// The inner-product statistic is centred at the batch mean of `∇F_iᵀ ref`,
/// which equals `‖ref‖²` when `ref` is the batch gradient itself.
pub fn variance_report<T: Scalar>(
    est: &GradientEstimate<T>,
    reference: &[T],
    theta: T,
    nu: T,
) -> Result<VarianceReport<T>> {
    let size = est.size();
    if size < 2 {
        return Err(Error::DegenerateBatch(size));
    }
    let ref_sq = linalg::norm_sq(reference);
    if !ref_sq.is_finite() {
        return Err(Error::NonFinite { what: "reference norm", index: None });
    }
    if ref_sq == T::zero() {
        return Err(Error::ZeroReference);
    }
    let dots: Vec<T> = est.per_component.iter().map(|g| linalg::dot(g, reference)).collect();
    let count = T::from_usize_lossy(size);
    let centre = dots.iter().copied().sum::<T>() / count;
    let dof = T::from_usize_lossy(size - 1);

    let var_inner = dots.iter().map(|&d| (d - centre) * (d - centre)).sum::<T>() / dof;

    let mut orth_total = T::zero();
    for (g, &d) in est.per_component.iter().zip(&dots) {
        let coeff = d / ref_sq;
        orth_total = orth_total
            + g.iter().zip(reference).map(|(&gi, &ri)| {
                let o = gi - coeff * ri;
                o * o
            }).sum::<T>();
    }
    let var_orth = orth_total / dof;

    if !var_inner.is_finite() || !var_orth.is_finite() {
        return Err(Error::NonFinite { what: "sample variance", index: None });
    }
    let inner_ok = var_inner / count <= theta * theta * ref_sq * ref_sq;
    let orth_ok = var_orth <= nu * nu * ref_sq;
    Ok(VarianceReport { var_inner, var_orth, inner_ok, orth_ok })
}

/// Batch size suggested by the growth rule, capped at `num_components`.
///
/// May be smaller than the current size; callers never shrink the batch.
pub fn proposed_sample_size<T: Scalar>(
    report: &VarianceReport<T>,
    reference: &[T],
    theta: T,
    nu: T,
    num_components: usize,
) -> Result<usize> {
    let ref_sq = linalg::norm_sq(reference);
    let inner = ceil_quotient(report.var_inner, theta * theta * ref_sq * ref_sq, num_components)?;
    let orth = ceil_quotient(report.var_orth, nu * nu * ref_sq, num_components)?;
    Ok(inner.max(orth).min(num_components))
}

fn ceil_quotient<T: Scalar>(num: T, den: T, cap: usize) -> Result<usize> {
    let q = num / den;
    if !q.is_finite() || q < T::zero() {
        return Err(Error::NonFinite { what: "sample size quotient", index: None });
    }
    if q >= T::from_usize_lossy(cap) {
        return Ok(cap);
    }
    Ok(q.ceil().to_usize().unwrap_or(cap))
}

/// The last `window` batch gradients with their batch sizes, oldest first.
#[derive(Debug, Clone)]
pub struct GradientHistory<T> {
    window: usize,
    entries: VecDeque<(Vec<T>, usize)>,
    /// Size of the most recently evicted entry, i.e. `|S_{k-r}|`.
    evicted_size: Option<usize>,
}

impl<T: Scalar> GradientHistory<T> {
    pub fn new(window: usize) -> Self {
        assert!(window >= 1, "history window must be at least 1");
        Self { window, entries: VecDeque::with_capacity(window), evicted_size: None }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, aggregate: Vec<T>, batch_size: usize) {
        if self.entries.len() == self.window {
            self.evicted_size = self.entries.pop_front().map(|(_, s)| s);
        }
        self.entries.push_back((aggregate, batch_size));
    }

    /// Overwrites the newest entry after the current batch was redrawn.
    pub fn replace_latest(&mut self, aggregate: Vec<T>, batch_size: usize) {
        match self.entries.back_mut() {
            Some(last) => *last = (aggregate, batch_size),
            None => self.push(aggregate, batch_size),
        }
    }

    /// True when the last `window + 1` batch sizes all equal `size`.
    pub fn is_stalled_at(&self, size: usize) -> bool {
        self.entries.len() == self.window
            && self.evicted_size == Some(size)
            && self.entries.iter().all(|(_, s)| *s == size)
    }

    pub fn average(&self) -> Vec<T> {
        let dim = self.entries.front().map_or(0, |(g, _)| g.len());
        let grads: Vec<&[T]> = self.entries.iter().map(|(g, _)| g.as_slice()).collect();
        linalg::mean_of(&grads, dim)
    }
}

/// Averaged-gradient check for the stalled-size regime.
///
/// Returns the grown batch size when the tests, rerun on the current batch with
/// the window average as reference, fail. `history` must already contain the
/// current aggregate.
pub fn noisy_regime_step<T: Scalar>(
    history: &GradientHistory<T>,
    current: &GradientEstimate<T>,
    params: &HyperParams<T>,
    num_components: usize,
) -> Result<Option<usize>> {
    if !history.is_stalled_at(current.size()) {
        return Ok(None);
    }
    let g_avg = history.average();
    if !(linalg::norm(&g_avg) < params.avg_threshold * current.norm()) {
        return Ok(None);
    }
    let report = variance_report(current, &g_avg, params.theta, params.nu)?;
    if report.passed() {
        return Ok(None);
    }
    proposed_sample_size(&report, &g_avg, params.theta, params.nu, num_components).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::SampleBatch;
    use proptest::prelude::*;

    fn estimate(grads: Vec<Vec<f64>>) -> GradientEstimate<f64> {
        let n = grads.len();
        GradientEstimate::from_components(grads, SampleBatch::full(n)).unwrap()
    }

    #[test]
    fn balanced_batch_has_zero_inner_variance() {
        let est = estimate(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(est.aggregate, vec![0.5, 0.5]);
        let r = variance_report(&est, &est.aggregate, 1e-6, 5.84).unwrap();
        assert_eq!(r.var_inner, 0.0);
        assert!(r.inner_ok);
    }

    #[test]
    fn hand_evaluated_report() {
        let est = estimate(vec![vec![2.0, 0.0], vec![0.0, 0.0]]);
        let g = vec![1.0, 0.0];
        let r = variance_report(&est, &g, 0.9, 5.84).unwrap();
        assert_eq!(r.var_inner, 2.0);
        assert!(!r.inner_ok);
        assert_eq!(r.var_orth, 0.0);
        assert!(r.orth_ok);
    }

    #[test]
    fn identical_components_pass() {
        let est = estimate(vec![vec![0.3, -1.2, 2.0]; 5]);
        let r = variance_report(&est, &est.aggregate, 0.9, 5.84).unwrap();
        assert!(r.var_inner.abs() < 1e-24 && r.var_orth.abs() < 1e-24);
        assert!(r.passed());
    }

    #[test]
    fn degenerate_inputs() {
        let single = estimate(vec![vec![1.0, 2.0]]);
        assert_eq!(variance_report(&single, &[1.0, 2.0], 0.9, 5.84), Err(Error::DegenerateBatch(1)));
        let pair = estimate(vec![vec![1.0, 0.0], vec![-1.0, 0.0]]);
        assert_eq!(variance_report(&pair, &[0.0, 0.0], 0.9, 5.84), Err(Error::ZeroReference));
    }

    #[test]
    fn growth_rule_hand_arithmetic() {
        let report = VarianceReport { var_inner: 4.0, var_orth: 10.0, inner_ok: false, orth_ok: true };
        assert_eq!(proposed_sample_size(&report, &[1.0, 0.0], 0.9, 5.84, 100).unwrap(), 5);
        let zero = VarianceReport { var_inner: 0.0, var_orth: 0.0, inner_ok: true, orth_ok: true };
        assert_eq!(proposed_sample_size(&zero, &[1.0, 0.0], 0.9, 5.84, 100).unwrap(), 0);
        let huge = VarianceReport { var_inner: 1e300, var_orth: 0.0, inner_ok: false, orth_ok: true };
        assert_eq!(proposed_sample_size(&huge, &[1.0, 0.0], 0.9, 5.84, 100).unwrap(), 100);
    }

    #[test]
    fn growth_rule_overflow_is_an_error() {
        let report = VarianceReport { var_inner: 1.0, var_orth: 1.0, inner_ok: false, orth_ok: false };
        assert!(proposed_sample_size(&report, &[1e-200, 0.0], 0.9, 5.84, 100).is_err());
    }

    fn params(r: usize) -> HyperParams<f64> {
        HyperParams::new(0.1, 4.0, 1.0).unwrap().with_window(r)
    }

    #[test]
    fn history_requires_window_plus_one_equal_sizes() {
        let mut h = GradientHistory::new(3);
        for _ in 0..3 {
            h.push(vec![1.0], 4);
        }
        assert!(!h.is_stalled_at(4));
        h.push(vec![1.0], 4);
        assert!(h.is_stalled_at(4));
        h.replace_latest(vec![1.0], 8);
        assert!(!h.is_stalled_at(8));
        assert_eq!(h.len(), 3);
    }

    #[test]
    fn noisy_regime_gate_on_changed_sizes() {
        let est = estimate(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let mut h = GradientHistory::new(2);
        h.push(vec![0.5, 0.5], 1);
        h.push(vec![0.5, 0.5], 2);
        h.push(est.aggregate.clone(), 2);
        assert_eq!(noisy_regime_step(&h, &est, &params(2), 10).unwrap(), None);
    }

    #[test]
    fn noisy_regime_identical_history_is_noop() {
        let est = estimate(vec![vec![1.0, 0.2], vec![0.6, 1.0]]);
        let mut h = GradientHistory::new(3);
        for _ in 0..4 {
            h.push(est.aggregate.clone(), 2);
        }
        assert_eq!(noisy_regime_step(&h, &est, &params(3), 10).unwrap(), None);
    }

    #[test]
    fn noisy_regime_cancelling_history_grows_batch() {
        // current batch: components (3,1), (-1,1); aggregate (1,1)
        let est = estimate(vec![vec![3.0, 1.0], vec![-1.0, 1.0]]);
        let mut h = GradientHistory::new(2);
        h.push(vec![1.0, 1.0], 2);
        h.push(vec![-0.9, -0.9], 2);
        h.push(vec![1.0, 1.0], 2);
        // g_avg = (0.05, 0.05), ‖g_avg‖² = 0.005
        // dots: 0.2, 0.0 -> centre 0.1, var_inner = 0.02
        // orth parts: (3,1) - 40*(0.05,0.05) = (1,-1); (-1,1) - 0 = (-1,1); var_orth = 2 + 2 = 4
        // inner quotient 0.02 / (0.81 * 2.5e-5) = 987.65.. -> 988
        // orth quotient 4 / (34.1056 * 0.005) = 23.46.. -> 24
        let p = params(2);
        assert_eq!(noisy_regime_step(&h, &est, &p, 5000).unwrap(), Some(988));
        assert_eq!(noisy_regime_step(&h, &est, &p, 500).unwrap(), Some(500));
    }

    proptest! {
        #[test]
        fn tests_invariant_under_rescaling(
            comps in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 2..8),
            c in prop::sample::select(vec![1e-3, 1.0, 1e3]),
        ) {
            let est = estimate(comps.clone());
            prop_assume!(linalg::norm(&est.aggregate) > 1e-3);
            let base = variance_report(&est, &est.aggregate, 0.9, 5.84).unwrap();
            let scaled = estimate(comps.iter().map(|g| linalg::scale(c, g)).collect());
            let r = variance_report(&scaled, &scaled.aggregate, 0.9, 5.84).unwrap();
            let g_sq = linalg::norm_sq(&est.aggregate);
            let s = est.size() as f64;
            // skip draws sitting on the decision boundary
            prop_assume!((base.var_inner / s - 0.81 * g_sq * g_sq).abs() > 1e-9 * g_sq * g_sq);
            prop_assume!((base.var_orth - 34.1056 * g_sq).abs() > 1e-9 * g_sq);
            prop_assert_eq!(base.inner_ok, r.inner_ok);
            prop_assert_eq!(base.orth_ok, r.orth_ok);
        }

        #[test]
        fn pythagorean_split(
            comps in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 4), 2..6),
        ) {
            let est = estimate(comps);
            let g = est.aggregate.clone();
            let g_norm = linalg::norm(&g);
            prop_assume!(g_norm > 1e-3);
            let unit = linalg::scale(1.0 / g_norm, &g);
            for gi in &est.per_component {
                let along = linalg::dot(gi, &unit);
                let orth = linalg::sub(gi, &linalg::scale(along, &unit));
                let lhs = linalg::norm_sq(gi);
                let rhs = along * along + linalg::norm_sq(&orth);
                prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.max(1.0));
            }
        }

        #[test]
        fn growth_monotone_in_variances(
            a in 0.0f64..1e4, b in 0.0f64..1e4, da in 0.0f64..1e3, db in 0.0f64..1e3,
        ) {
            let g = [0.7, -0.2];
            let lo = VarianceReport { var_inner: a, var_orth: b, inner_ok: false, orth_ok: false };
            let hi = VarianceReport { var_inner: a + da, var_orth: b + db, ..lo };
            let s_lo = proposed_sample_size(&lo, &g, 0.9, 5.84, 50_000).unwrap();
            let s_hi = proposed_sample_size(&hi, &g, 0.9, 5.84, 50_000).unwrap();
            prop_assert!(s_lo <= s_hi);
        }
    }
}
