//! Convergence constants for TRish and exact checks of its expected-decrease
//! bounds on small synthetic quadratics.
//!
//! With `N ≤ 8` components every expectation over a uniformly drawn batch is
//! computed exactly by enumerating all `C(N, b)` batches, so the inequalities
//! are checked without statistical slack.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::optimizer::{run_trish_with, trish_step, HyperParams, RunOptions};
use crate::problem::{sampled_gradient, FiniteSumProblem, SampleBatch};
use crate::rng::RngState;
use crate::scalar::Scalar;

/// Problem constants entering the bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstants<T> {
    /// Lipschitz constant `L` of `∇F`.
    pub lipschitz: T,
    /// PL constant `μ`, when the PL inequality holds.
    pub mu: Option<T>,
    /// Uniform bound `M_g` on `E‖∇F − g‖²`.
    pub noise_bound: T,
    /// `M₂` in `E‖g‖² ≤ M₁ + M₂‖∇F‖²`.
    pub second_moment: T,
    pub f_star: T,
}

/// `β = (γ₁² − γ₂²)/(2γ₂) + ½ α γ₁² L`.
pub fn beta_const<T: Scalar>(alpha: T, gamma1: T, gamma2: T, lipschitz: T) -> T {
    let half = T::lit(0.5);
    (gamma1 * gamma1 - gamma2 * gamma2) / (gamma2 + gamma2) + half * alpha * gamma1 * gamma1 * lipschitz
}

/// `M₂ = 1 + θ² + ν²` implied by the exact inner-product and orthogonality conditions.
pub fn second_moment_from_tests<T: Scalar>(theta: T, nu: T) -> T {
    T::one() + theta * theta + nu * nu
}

/// Step-length limits under which the convergence results apply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepsizeBounds<T> {
    /// `γ₂ / (2γ₁²L)`.
    pub descent: T,
    /// `min{γ₂/(2γ₁²L), 1/(μγ₂)}`, needs `μ`.
    pub gap_pl: Option<T>,
    /// `1 / (4γ₂LM₂)`, needs `M₂`.
    pub vanishing: Option<T>,
    /// `min{1/(4γ₂LM₂), 2γ₂/(μγ₁²)}`, needs `μ` and `M₂`.
    pub vanishing_pl: Option<T>,
    /// `(γ₂/γ₁)² > 1 − 1/(4M₂)`, needs `M₂`.
    pub ratio_condition: Option<bool>,
}

pub fn stepsize_bounds<T: Scalar>(
    gamma1: T,
    gamma2: T,
    lipschitz: T,
    mu: Option<T>,
    second_moment: Option<T>,
) -> StepsizeBounds<T> {
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let descent = gamma2 / (two * gamma1 * gamma1 * lipschitz);
    let gap_pl = mu.map(|m| descent.min((m * gamma2).recip()));
    let vanishing = second_moment.map(|m2| (four * gamma2 * lipschitz * m2).recip());
    let vanishing_pl = match (vanishing, mu) {
        (Some(v), Some(m)) => Some(v.min(two * gamma2 / (m * gamma1 * gamma1))),
        _ => None,
    };
    let ratio_condition = second_moment.map(|m2| {
        let r = gamma2 / gamma1;
        r * r > T::one() - (four * m2).recip()
    });
    StepsizeBounds { descent, gap_pl, vanishing, vanishing_pl, ratio_condition }
}

/// Limits of the expected optimality gap (PL case) and of the averaged squared
/// gradient norm (general case): `(2βM_g/(μγ₂), 4βM_g/γ₂)`.
pub fn asymptotic_gaps<T: Scalar>(beta: T, noise_bound: T, mu: T, gamma2: T) -> (T, T) {
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    (two * beta * noise_bound / (mu * gamma2), four * beta * noise_bound / gamma2)
}

/// `F_i(x) = ½ Σ_j d_ij x_j² + b_iᵀx` with `mean_i d_ij = D_j > 0` and `Σ_i b_i = 0`,
/// so `F(x) = ½ xᵀDx`, `F_* = 0` at `x = 0`, `L = max D`, `μ = min D`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticQuadratic<T> {
    curvature: Vec<T>,
    component_curvature: Vec<Vec<T>>,
    shifts: Vec<Vec<T>>,
}

impl<T: Scalar> SyntheticQuadratic<T> {
    /// Shared curvature `D`, additive noise from `shifts` (re-centred to sum to zero).
    pub fn additive(curvature: Vec<T>, shifts: Vec<Vec<T>>) -> Result<Self> {
        let n = curvature.len();
        check_curvature(&curvature)?;
        if shifts.is_empty() || shifts.iter().any(|b| b.len() != n) {
            return Err(Error::invalid("need at least one shift vector of the problem dimension"));
        }
        let mean = linalg::mean_of(&shifts, n);
        let shifts: Vec<Vec<T>> = shifts.iter().map(|b| linalg::sub(b, &mean)).collect();
        let component_curvature = vec![curvature.clone(); shifts.len()];
        Ok(Self { curvature, component_curvature, shifts })
    }

    /// Component curvatures `D ∘ w_i`, with `weights` rescaled to unit mean per
    /// coordinate. No additive shift, so the noise vanishes at the minimizer.
    pub fn multiplicative(curvature: Vec<T>, weights: Vec<Vec<T>>) -> Result<Self> {
        let n = curvature.len();
        check_curvature(&curvature)?;
        if weights.is_empty() || weights.iter().any(|w| w.len() != n || w.iter().any(|&v| !(v > T::zero()))) {
            return Err(Error::invalid("weights must be positive vectors of the problem dimension"));
        }
        let mean = linalg::mean_of(&weights, n);
        let component_curvature = weights
            .iter()
            .map(|w| w.iter().zip(&mean).zip(&curvature).map(|((&wi, &m), &d)| d * wi / m).collect())
            .collect();
        let shifts = vec![vec![T::zero(); n]; weights.len()];
        Ok(Self { curvature, component_curvature, shifts })
    }

    /// Random additive problem: `D_j` uniform in `[mu, l]`, shifts uniform in `[−noise, noise]`.
    pub fn random_additive(dim: usize, components: usize, mu: f64, l: f64, noise: f64, rng: &mut RngState) -> Result<Self> {
        let mut d = rng.uniform_vec(dim, mu, l).into_iter().map(T::lit).collect::<Vec<_>>();
        pin_extremes(&mut d, mu, l);
        let shifts = (0..components)
            .map(|_| rng.uniform_vec(dim, -noise, noise).into_iter().map(T::lit).collect())
            .collect();
        Self::additive(d, shifts)
    }

    /// Random multiplicative problem with weights uniform in `[1 − spread, 1 + spread]`.
    pub fn random_multiplicative(dim: usize, components: usize, mu: f64, l: f64, spread: f64, rng: &mut RngState) -> Result<Self> {
        if !(0.0..1.0).contains(&spread) {
            return Err(Error::invalid("spread must be in [0, 1)"));
        }
        let mut d = rng.uniform_vec(dim, mu, l).into_iter().map(T::lit).collect::<Vec<_>>();
        pin_extremes(&mut d, mu, l);
        let weights = (0..components)
            .map(|_| rng.uniform_vec(dim, 1.0 - spread, 1.0 + spread).into_iter().map(T::lit).collect())
            .collect();
        Self::multiplicative(d, weights)
    }

    pub fn curvature(&self) -> &[T] {
        &self.curvature
    }

    pub fn lipschitz(&self) -> T {
        self.curvature.iter().copied().fold(T::zero(), T::max)
    }

    pub fn mu(&self) -> T {
        self.curvature.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn f_star(&self) -> T {
        T::zero()
    }

    pub fn minimizer(&self) -> Vec<T> {
        vec![T::zero(); self.curvature.len()]
    }

    pub fn has_additive_noise(&self) -> bool {
        self.shifts.iter().flatten().any(|&v| v != T::zero())
    }

    /// Exact `E‖∇F(x) − g‖²` over batches of size `batch_size`.
    pub fn noise_at(&self, x: &[T], batch_size: usize) -> Result<T> {
        Ok(batch_moments(self, x, batch_size)?.mean_sq_error)
    }

    /// Smallest `M₂` with `E‖g‖² ≤ M₂‖∇F‖²` for every `x`; `None` when additive
    /// noise makes `M₁ > 0`.
    pub fn second_moment_bound(&self, batch_size: usize) -> Result<Option<T>> {
        if self.has_additive_noise() {
            return Ok(None);
        }
        // g = diag(mean_S d_ij) x, so the ratio is a convex combination over coordinates
        let n = self.curvature.len();
        let mut best = T::zero();
        for j in 0..n {
            let mut acc = T::zero();
            let mut count = 0usize;
            for_each_batch(self.num_components(), batch_size, |batch| {
                let m = batch.iter().map(|&i| self.component_curvature[i][j]).sum::<T>()
                    / T::from_usize_lossy(batch.len());
                let ratio = m / self.curvature[j];
                acc = acc + ratio * ratio;
                count += 1;
            })?;
            best = best.max(acc / T::from_usize_lossy(count));
        }
        Ok(Some(best))
    }

    pub fn constants(&self, batch_size: usize, reference_points: &[Vec<T>]) -> Result<TheoryConstants<T>> {
        let mut noise = T::zero();
        for x in reference_points {
            noise = noise.max(self.noise_at(x, batch_size)?);
        }
        Ok(TheoryConstants {
            lipschitz: self.lipschitz(),
            mu: Some(self.mu()),
            noise_bound: noise,
            second_moment: self.second_moment_bound(batch_size)?.unwrap_or(T::one()),
            f_star: self.f_star(),
        })
    }
}

fn check_curvature<T: Scalar>(d: &[T]) -> Result<()> {
    if d.is_empty() || d.iter().any(|&v| !(v > T::zero() && v.is_finite())) {
        return Err(Error::invalid("curvature entries must be positive and finite"));
    }
    Ok(())
}

/// Forces the first two diagonal entries to `mu` and `l` so the constants are exact.
fn pin_extremes<T: Scalar>(d: &mut [T], mu: f64, l: f64) {
    if let Some(first) = d.first_mut() {
        *first = T::lit(mu);
    }
    if d.len() > 1 {
        d[1] = T::lit(l);
    }
}

impl<T: Scalar> FiniteSumProblem<T> for SyntheticQuadratic<T> {
    fn dim(&self) -> usize {
        self.curvature.len()
    }

    fn num_components(&self) -> usize {
        self.shifts.len()
    }

    fn component_loss(&self, i: usize, x: &[T]) -> T {
        let half = T::lit(0.5);
        let quad = self.component_curvature[i].iter().zip(x).fold(T::zero(), |acc, (&d, &xi)| acc + d * xi * xi);
        half * quad + linalg::dot(&self.shifts[i], x)
    }

    fn component_gradient(&self, i: usize, x: &[T]) -> Vec<T> {
        self.component_curvature[i].iter().zip(x).zip(&self.shifts[i]).map(|((&d, &xi), &b)| d * xi + b).collect()
    }

    fn loss(&self, x: &[T]) -> T {
        let half = T::lit(0.5);
        half * self.curvature.iter().zip(x).fold(T::zero(), |acc, (&d, &xi)| acc + d * xi * xi)
    }

    fn gradient(&self, x: &[T]) -> Vec<T> {
        self.curvature.iter().zip(x).map(|(&d, &xi)| d * xi).collect()
    }
}

/// Calls `f` on every size-`k` subset of `0..n` in lexicographic order.
pub fn for_each_batch(n: usize, k: usize, mut f: impl FnMut(&[usize])) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("batch size {k} outside [1, {n}]")));
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(pos) = (0..k).rev().find(|&p| idx[p] < n - k + p) else { return Ok(()) };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Exact moments of the batch gradient at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchMoments<T> {
    pub mean_gradient: Vec<T>,
    /// `E‖g‖²`.
    pub mean_sq_norm: T,
    /// `E‖∇F − g‖²`.
    pub mean_sq_error: T,
    pub batches: usize,
}

pub fn batch_moments<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    x: &[T],
    batch_size: usize,
) -> Result<BatchMoments<T>> {
    let full = problem.gradient(x);
    let n = problem.dim();
    let mut sum_g = vec![T::zero(); n];
    let mut sum_sq = T::zero();
    let mut sum_err = T::zero();
    let mut count = 0usize;
    let mut failure = None;
    for_each_batch(problem.num_components(), batch_size, |b| {
        let batch = SampleBatch::new(b.to_vec(), problem.num_components()).expect("enumerated batch is valid");
        match sampled_gradient(problem, x, &batch) {
            Ok(est) => {
                linalg::axpy(T::one(), &est.aggregate, &mut sum_g);
                sum_sq = sum_sq + linalg::norm_sq(&est.aggregate);
                sum_err = sum_err + linalg::norm_sq(&linalg::sub(&full, &est.aggregate));
                count += 1;
            }
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let c = T::from_usize_lossy(count);
    Ok(BatchMoments {
        mean_gradient: sum_g.into_iter().map(|v| v / c).collect(),
        mean_sq_norm: sum_sq / c,
        mean_sq_error: sum_err / c,
        batches: count,
    })
}

/// Exact left-hand sides of the inner-product and orthogonality conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactTests<T> {
    /// `E[(gᵀ∇F − ‖∇F‖²)²]`.
    pub inner: T,
    /// `E‖g − (gᵀ∇F/‖∇F‖²)∇F‖²`.
    pub orth: T,
    pub grad_sq: T,
    /// `E‖g‖²`.
    pub second_moment: T,
}

impl<T: Scalar> ExactTests<T> {
    pub fn satisfied(&self, theta: T, nu: T) -> bool {
        self.inner <= theta * theta * self.grad_sq * self.grad_sq && self.orth <= nu * nu * self.grad_sq
    }
}

pub fn exact_tests<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    x: &[T],
    batch_size: usize,
) -> Result<ExactTests<T>> {
    let full = problem.gradient(x);
    let grad_sq = linalg::norm_sq(&full);
    if grad_sq == T::zero() {
        return Err(Error::ZeroReference);
    }
    let (mut inner, mut orth, mut second, mut count) = (T::zero(), T::zero(), T::zero(), 0usize);
    for_each_batch(problem.num_components(), batch_size, |b| {
        let batch = SampleBatch::new(b.to_vec(), problem.num_components()).expect("enumerated batch is valid");
        let g = sampled_gradient(problem, x, &batch).expect("finite synthetic gradients").aggregate;
        let d = linalg::dot(&g, &full);
        inner = inner + (d - grad_sq) * (d - grad_sq);
        let coeff = d / grad_sq;
        orth = orth + g.iter().zip(&full).map(|(&gi, &fi)| (gi - coeff * fi) * (gi - coeff * fi)).sum::<T>();
        second = second + linalg::norm_sq(&g);
        count += 1;
    })?;
    let c = T::from_usize_lossy(count);
    Ok(ExactTests { inner: inner / c, orth: orth / c, grad_sq, second_moment: second / c })
}

/// Exact evaluation of both expected-decrease inequalities at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Report<T> {
    /// `E[F(x + p)]`.
    pub expected_next: T,
    /// `F(x) − α γ₁²/(2γ₂) ‖∇F‖² + αβ E‖g‖²`.
    pub bound_second_moment: T,
    /// `F(x) − ½α(γ₂ − αγ₁²L)‖∇F‖² + αβ E‖∇F − g‖²`.
    pub bound_variance: T,
    pub holds_second_moment: bool,
    pub holds_variance: bool,
}

impl<T> Lemma1Report<T> {
    pub fn holds(&self) -> bool {
        self.holds_second_moment && self.holds_variance
    }
}

/// Checks both bounds exactly by enumerating every batch of `batch_size`.
///
/// A relative slack of a few ulps of the magnitudes involved absorbs rounding.
pub fn verify_lemma1<T: Scalar>(
    problem: &SyntheticQuadratic<T>,
    x: &[T],
    params: &HyperParams<T>,
    batch_size: usize,
) -> Result<Lemma1Report<T>> {
    params.validate()?;
    let l = problem.lipschitz();
    let (alpha, g1, g2) = (params.alpha, params.gamma1, params.gamma2);
    let beta = beta_const(alpha, g1, g2, l);
    let f_x = problem.loss(x);
    let grad_sq = linalg::norm_sq(&problem.gradient(x));

    let mut next_sum = T::zero();
    let mut count = 0usize;
    let mut failure = None;
    for_each_batch(problem.num_components(), batch_size, |b| {
        let batch = SampleBatch::new(b.to_vec(), problem.num_components()).expect("enumerated batch is valid");
        let step = sampled_gradient(problem, x, &batch).and_then(|est| trish_step(&est.aggregate, params));
        match step {
            Ok(p) => {
                let moved: Vec<T> = x.iter().zip(&p).map(|(&a, &b)| a + b).collect();
                next_sum = next_sum + problem.loss(&moved);
                count += 1;
            }
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let expected_next = next_sum / T::from_usize_lossy(count);
    let moments = batch_moments(problem, x, batch_size)?;

    let half = T::lit(0.5);
    let t1 = alpha * g1 * g1 / (g2 + g2) * grad_sq;
    let t2 = alpha * beta * moments.mean_sq_norm;
    let bound_second_moment = f_x - t1 + t2;
    let t3 = half * alpha * (g2 - alpha * g1 * g1 * l) * grad_sq;
    let t4 = alpha * beta * moments.mean_sq_error;
    let bound_variance = f_x - t3 + t4;

    let slack = |terms: &[T]| {
        let scale = terms.iter().fold(expected_next.abs() + f_x.abs(), |acc, t| acc + t.abs());
        T::lit(64.0) * T::epsilon() * scale
    };
    Ok(Lemma1Report {
        expected_next,
        bound_second_moment,
        bound_variance,
        holds_second_moment: expected_next <= bound_second_moment + slack(&[t1, t2]),
        holds_variance: expected_next <= bound_variance + slack(&[t3, t4]),
    })
}

/// Monte-Carlo estimate of the optimality gap after a fixed number of TRish steps.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport<T> {
    pub mean_gap: T,
    pub std_error: T,
    pub constants: TheoryConstants<T>,
    pub beta: T,
    /// Contraction factor of the expected gap recursion.
    pub contraction: T,
    /// Asymptotic upper bound on the expected gap.
    pub limit_bound: T,
    /// Bound on the expected gap after exactly `horizon` steps.
    pub horizon_bound: T,
    pub horizon: usize,
    pub reps: usize,
}

impl<T: Scalar> GapReport<T> {
    /// `mean_gap ≤ limit_bound + 3·std_error`.
    pub fn plateau_respected(&self) -> bool {
        self.mean_gap <= self.limit_bound + T::lit(3.0) * self.std_error
    }
}

/// Runs `reps` independent TRish trajectories of `horizon` steps from `x0` and
/// compares the mean final gap with the PL-case bound `2βM_g/(μγ₂)`.
///
/// `M_g` is the largest exact batch-noise level over `x0`, the minimizer and
/// points visited by the first trajectory.
pub fn verify_theorem_gap<T: Scalar>(
    problem: &SyntheticQuadratic<T>,
    x0: &[T],
    params: &HyperParams<T>,
    batch_size: usize,
    horizon: usize,
    reps: usize,
    seed: u64,
) -> Result<GapReport<T>> {
    params.validate()?;
    let l = problem.lipschitz();
    let mu = problem.mu();
    let bounds = stepsize_bounds(params.gamma1, params.gamma2, l, Some(mu), None);
    if !(params.alpha < bounds.gap_pl.expect("mu supplied")) {
        return Err(Error::invalid(format!(
            "alpha={} violates the PL-case step bound {}",
            params.alpha,
            bounds.gap_pl.expect("mu supplied")
        )));
    }
    let (gaps, visited) = final_gaps(problem, x0, params, batch_size, horizon, reps, seed)?;
    let mut reference = vec![x0.to_vec(), problem.minimizer()];
    reference.extend(visited);
    let constants = problem.constants(batch_size, &reference)?;
    let beta = beta_const(params.alpha, params.gamma1, params.gamma2, l);
    let (limit_bound, _) = asymptotic_gaps(beta, constants.noise_bound, mu, params.gamma2);
    let contraction = T::one() - T::lit(0.5) * params.alpha * mu * params.gamma2;
    let decay = contraction.powi(horizon as i32);
    let gap0 = problem.loss(x0) - problem.f_star();
    let horizon_bound = decay * gap0 + (T::one() - decay) * limit_bound;
    let (mean_gap, std_error) = mean_and_se(&gaps);
    Ok(GapReport { mean_gap, std_error, constants, beta, contraction, limit_bound, horizon_bound, horizon, reps })
}

/// Vanishing-noise counterpart: requires `M₁ = 0`, checks the step and ratio
/// conditions, and reports the mean final gap (the limit bound is zero).
pub fn verify_theorem_vanishing<T: Scalar>(
    problem: &SyntheticQuadratic<T>,
    x0: &[T],
    params: &HyperParams<T>,
    batch_size: usize,
    horizon: usize,
    reps: usize,
    seed: u64,
) -> Result<GapReport<T>> {
    params.validate()?;
    let Some(m2) = problem.second_moment_bound(batch_size)? else {
        return Err(Error::invalid("problem has additive noise, so M1 > 0"));
    };
    let l = problem.lipschitz();
    let mu = problem.mu();
    let bounds = stepsize_bounds(params.gamma1, params.gamma2, l, Some(mu), Some(m2));
    if bounds.ratio_condition != Some(true) {
        return Err(Error::invalid("(gamma2/gamma1)^2 > 1 - 1/(4 M2) does not hold"));
    }
    let limit = bounds.vanishing_pl.expect("mu and M2 supplied");
    if !(params.alpha < limit) {
        return Err(Error::invalid(format!("alpha={} violates the step bound {limit}", params.alpha)));
    }
    let (gaps, _) = final_gaps(problem, x0, params, batch_size, horizon, reps, seed)?;
    let contraction = T::one() - params.alpha * mu * params.gamma1 * params.gamma1 / (params.gamma2 + params.gamma2);
    let gap0 = problem.loss(x0) - problem.f_star();
    let (mean_gap, std_error) = mean_and_se(&gaps);
    Ok(GapReport {
        mean_gap,
        std_error,
        constants: TheoryConstants {
            lipschitz: l,
            mu: Some(mu),
            noise_bound: T::zero(),
            second_moment: m2,
            f_star: problem.f_star(),
        },
        beta: beta_const(params.alpha, params.gamma1, params.gamma2, l),
        contraction,
        limit_bound: T::zero(),
        horizon_bound: contraction.powi(horizon as i32) * gap0,
        horizon,
        reps,
    })
}

/// Final gaps of `reps` runs, plus up to 20 iterates sampled from the first run.
fn final_gaps<T: Scalar>(
    problem: &SyntheticQuadratic<T>,
    x0: &[T],
    params: &HyperParams<T>,
    batch_size: usize,
    horizon: usize,
    reps: usize,
    seed: u64,
) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    if reps == 0 || horizon == 0 {
        return Err(Error::invalid("need at least one repetition and one step"));
    }
    let stride = (horizon / 20).max(1);
    let mut visited = Vec::new();
    let mut gaps = Vec::with_capacity(reps);
    for rep in 0..reps {
        let mut rng = RngState::for_run(seed, rep as u64);
        let keep = rep == 0;
        let out = run_trish_with(problem, x0.to_vec(), params, batch_size, RunOptions::iterations(horizon), &mut rng, |r, x| {
            if keep && r.k % stride == 0 {
                visited.push(x.to_vec());
            }
        })?;
        gaps.push(problem.loss(&out.x) - problem.f_star());
    }
    Ok((gaps, visited))
}

fn mean_and_se<T: Scalar>(values: &[T]) -> (T, T) {
    let n = T::from_usize_lossy(values.len());
    let mean = values.iter().copied().sum::<T>() / n;
    if values.len() < 2 {
        return (mean, T::zero());
    }
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / (n - T::one());
    (mean, (var / n).sqrt())
}

/// Random admissible parameters for the expected-decrease checks:
/// `0 < γ₂ < γ₁` and `α` strictly inside the descent step bound.
pub fn random_admissible_params(lipschitz: f64, rng: &mut RngState) -> HyperParams<f64> {
    let r = rng.init_stream();
    let gamma2 = 10f64.powf(r.random_range(-1.0..1.0));
    let gamma1 = gamma2 * (1.0 + r.random_range(0.01..8.0));
    let bound = gamma2 / (2.0 * gamma1 * gamma1 * lipschitz);
    let alpha = bound * r.random_range(0.01..0.99);
    HyperParams::new(alpha, gamma1, gamma2).expect("admissible by construction")
}
