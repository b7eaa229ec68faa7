//! The TRish step rule, its adaptive-sampling driver, and a plain SG baseline.
//!
//! Every step is accepted. Runs stop on an effective-gradient-evaluation budget
//! (one epoch = `N` component gradients) or on an iteration count.

use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::{draw_batch, sampled_gradient, FiniteSumProblem, GradientEstimate};
use crate::rng::RngState;
use crate::sampling::{noisy_regime_step, proposed_sample_size, variance_report, GradientHistory};
use crate::scalar::Scalar;

/// Step length, case thresholds and adaptive-sampling controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams<T> {
    pub alpha: T,
    pub gamma1: T,
    pub gamma2: T,
    /// Inner-product test tolerance.
    pub theta: T,
    /// Orthogonality test tolerance.
    pub nu: T,
    /// Number of recent batch gradients averaged in the stalled-size check.
    pub window: usize,
    /// The averaged-gradient check engages when `‖g_avg‖ < avg_threshold · ‖g_k‖`.
    pub avg_threshold: T,
}

impl<T: Scalar> HyperParams<T> {
    pub const DEFAULT_THETA: f64 = 0.9;
    pub const DEFAULT_NU: f64 = 5.84;
    pub const DEFAULT_WINDOW: usize = 10;

    /// Triplet `(α, γ₁, γ₂)` with the default sampling controls.
    pub fn new(alpha: T, gamma1: T, gamma2: T) -> Result<Self> {
        let p = Self {
            alpha,
            gamma1,
            gamma2,
            theta: T::lit(Self::DEFAULT_THETA),
            nu: T::lit(Self::DEFAULT_NU),
            window: Self::DEFAULT_WINDOW,
            avg_threshold: T::one(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_tests(mut self, theta: T, nu: T) -> Self {
        self.theta = theta;
        self.nu = nu;
        self
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = window;
        self
    }

    pub fn with_avg_threshold(mut self, threshold: T) -> Self {
        self.avg_threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: T| v > T::zero();
        if !(pos(self.alpha) && self.alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(pos(self.gamma2) && self.gamma2 < self.gamma1 && self.gamma1.is_finite()) {
            return Err(Error::invalid(format!(
                "need 0 < gamma2 < gamma1, got gamma1={} gamma2={}",
                self.gamma1, self.gamma2
            )));
        }
        // theta and nu may be +inf to switch the tests off
        if !(pos(self.theta) && pos(self.nu) && pos(self.avg_threshold)) {
            return Err(Error::invalid("theta, nu and avg_threshold must be positive"));
        }
        if self.window == 0 {
            return Err(Error::invalid("averaging window must be at least 1"));
        }
        Ok(())
    }
}

/// Which branch of the step rule produced a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepCase {
    /// `‖g‖ < 1/γ₁`: SG step scaled by `γ₁`.
    Case1,
    /// `1/γ₁ ≤ ‖g‖ ≤ 1/γ₂`: normalized step of length `α`.
    Case2,
    /// `‖g‖ > 1/γ₂`: SG step scaled by `γ₂`.
    Case3,
}

impl StepCase {
    pub fn index(self) -> usize {
        match self {
            StepCase::Case1 => 0,
            StepCase::Case2 => 1,
            StepCase::Case3 => 2,
        }
    }
}

pub fn classify_case<T: Scalar>(grad_norm: T, gamma1: T, gamma2: T) -> StepCase {
    if grad_norm < gamma1.recip() {
        StepCase::Case1
    } else if grad_norm > gamma2.recip() {
        StepCase::Case3
    } else {
        StepCase::Case2
    }
}

/// Step `p` for stochastic gradient `g`, together with the case taken.
pub fn trish_step_with_case<T: Scalar>(g: &[T], params: &HyperParams<T>) -> Result<(Vec<T>, StepCase)> {
    if !linalg::all_finite(g) {
        return Err(Error::NonFinite { what: "stochastic gradient", index: None });
    }
    let g_norm = linalg::norm(g);
    let case = classify_case(g_norm, params.gamma1, params.gamma2);
    let factor = match case {
        StepCase::Case1 => params.gamma1 * params.alpha,
        StepCase::Case2 => params.alpha / g_norm,
        StepCase::Case3 => params.gamma2 * params.alpha,
    };
    Ok((linalg::scale(-factor, g), case))
}

pub fn trish_step<T: Scalar>(g: &[T], params: &HyperParams<T>) -> Result<Vec<T>> {
    trish_step_with_case(g, params).map(|(p, _)| p)
}

/// Per-iteration telemetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// `None` for the SG baseline.
    pub case: Option<StepCase>,
    pub grad_norm: f64,
    pub batch_size: usize,
    /// Cumulative component-gradient evaluations divided by `N`.
    pub ege: f64,
    pub train_loss: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Stop once the evaluation budget, in epochs, is used up.
    Epochs(f64),
    Iterations(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub stop: StopRule,
    /// Evaluate the full training loss after every step (not charged to EGE).
    pub track_loss: bool,
}

impl RunOptions {
    pub fn epochs(budget: f64) -> Self {
        Self { stop: StopRule::Epochs(budget), track_loss: false }
    }

    pub fn iterations(count: usize) -> Self {
        Self { stop: StopRule::Iterations(count), track_loss: false }
    }

    pub fn tracking_loss(mut self) -> Self {
        self.track_loss = true;
        self
    }

    fn validate(&self) -> Result<()> {
        match self.stop {
            StopRule::Epochs(b) if !(b > 0.0 && b.is_finite()) => {
                Err(Error::invalid(format!("budget_epochs must be positive, got {b}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput<T> {
    pub x: Vec<T>,
    pub records: Vec<IterationRecord>,
    /// Total component-gradient evaluations, including redrawn batches.
    pub evaluations: usize,
}

impl<T> RunOutput<T> {
    pub fn final_batch_size(&self) -> Option<usize> {
        self.records.last().map(|r| r.batch_size)
    }

    pub fn final_ege(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.ege)
    }

    /// Fractions of iterations in Case1, Case2, Case3.
    pub fn case_fractions(&self) -> [f64; 3] {
        let mut counts = [0usize; 3];
        let mut total = 0usize;
        for case in self.records.iter().filter_map(|r| r.case) {
            counts[case.index()] += 1;
            total += 1;
        }
        if total == 0 {
            return [0.0; 3];
        }
        counts.map(|c| c as f64 / total as f64)
    }
}

/// Bookkeeping shared by all drivers.
struct Driver<'a, T, P: ?Sized, F> {
    problem: &'a P,
    opts: RunOptions,
    observer: F,
    x: Vec<T>,
    records: Vec<IterationRecord>,
    evaluations: usize,
}

impl<'a, T, P, F> Driver<'a, T, P, F>
where
    T: Scalar,
    P: FiniteSumProblem<T> + ?Sized,
    F: FnMut(&IterationRecord, &[T]),
{
    fn new(problem: &'a P, x0: Vec<T>, opts: RunOptions, observer: F) -> Result<Self> {
        opts.validate()?;
        if x0.len() != problem.dim() {
            return Err(Error::DimensionMismatch { expected: problem.dim(), found: x0.len() });
        }
        if problem.num_components() == 0 {
            return Err(Error::invalid("problem has no components"));
        }
        Ok(Self { problem, opts, observer, x: x0, records: Vec::new(), evaluations: 0 })
    }

    fn num_components(&self) -> usize {
        self.problem.num_components()
    }

    fn finished(&self) -> bool {
        match self.opts.stop {
            StopRule::Epochs(b) => self.evaluations as f64 >= b * self.num_components() as f64,
            StopRule::Iterations(k) => self.records.len() >= k,
        }
    }

    fn sample(&mut self, size: usize, rng: &mut RngState) -> Result<GradientEstimate<T>> {
        let batch = draw_batch(self.num_components(), size, rng)?;
        let est = sampled_gradient(self.problem, &self.x, &batch)?;
        self.evaluations += size;
        Ok(est)
    }

    fn apply(&mut self, step: &[T], case: Option<StepCase>, est: &GradientEstimate<T>) {
        linalg::axpy(T::one(), step, &mut self.x);
        let train_loss = self.opts.track_loss.then(|| self.problem.loss(&self.x).to_f64_lossy());
        let record = IterationRecord {
            k: self.records.len(),
            case,
            grad_norm: est.norm().to_f64_lossy(),
            batch_size: est.size(),
            ege: self.evaluations as f64 / self.num_components() as f64,
            train_loss,
        };
        (self.observer)(&record, &self.x);
        self.records.push(record);
    }

    fn finish(self) -> RunOutput<T> {
        RunOutput { x: self.x, records: self.records, evaluations: self.evaluations }
    }
}

fn check_batch_size(size: usize, num_components: usize) -> Result<()> {
    if size == 0 || size > num_components {
        return Err(Error::invalid(format!("batch size {size} outside [1, {num_components}]")));
    }
    Ok(())
}

/// TRish with a fixed batch size.
pub fn run_trish<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    x0: Vec<T>,
    params: &HyperParams<T>,
    batch_size: usize,
    budget_epochs: f64,
    rng: &mut RngState,
) -> Result<RunOutput<T>> {
    run_trish_with(problem, x0, params, batch_size, RunOptions::epochs(budget_epochs), rng, |_, _| {})
}

pub fn run_trish_with<T, P, F>(
    problem: &P,
    x0: Vec<T>,
    params: &HyperParams<T>,
    batch_size: usize,
    opts: RunOptions,
    rng: &mut RngState,
    observer: F,
) -> Result<RunOutput<T>>
where
    T: Scalar,
    P: FiniteSumProblem<T> + ?Sized,
    F: FnMut(&IterationRecord, &[T]),
{
    params.validate()?;
    check_batch_size(batch_size, problem.num_components())?;
    let mut d = Driver::new(problem, x0, opts, observer)?;
    while !d.finished() {
        let est = d.sample(batch_size, rng)?;
        let (step, case) = trish_step_with_case(&est.aggregate, params)?;
        d.apply(&step, Some(case), &est);
    }
    Ok(d.finish())
}

/// Initial batch size `min{32, ⌈N/100⌉}`, at least 1.
pub fn default_initial_sample_size(num_components: usize) -> usize {
    num_components.div_ceil(100).clamp(1, 32)
}

/// TRish with adaptive sampling, starting from batch size `s0`.
pub fn run_trish_as<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    x0: Vec<T>,
    params: &HyperParams<T>,
    s0: usize,
    budget_epochs: f64,
    rng: &mut RngState,
) -> Result<RunOutput<T>> {
    run_trish_as_with(problem, x0, params, s0, RunOptions::epochs(budget_epochs), rng, |_, _| {})
}

pub fn run_trish_as_with<T, P, F>(
    problem: &P,
    x0: Vec<T>,
    params: &HyperParams<T>,
    s0: usize,
    opts: RunOptions,
    rng: &mut RngState,
    observer: F,
) -> Result<RunOutput<T>>
where
    T: Scalar,
    P: FiniteSumProblem<T> + ?Sized,
    F: FnMut(&IterationRecord, &[T]),
{
    params.validate()?;
    let n_comp = problem.num_components();
    check_batch_size(s0, n_comp)?;
    let mut d = Driver::new(problem, x0, opts, observer)?;
    let mut history = GradientHistory::new(params.window);

    let mut est = d.sample(s0, rng)?;
    history.push(est.aggregate.clone(), est.size());
    loop {
        let (step, case) = trish_step_with_case(&est.aggregate, params)?;
        d.apply(&step, Some(case), &est);
        if d.finished() {
            break;
        }

        let size = est.size();
        est = d.sample(size, rng)?;
        history.push(est.aggregate.clone(), est.size());

        if let Some(grown) = grown_size(&est, params, n_comp) {
            est = d.sample(grown, rng)?;
            history.replace_latest(est.aggregate.clone(), est.size());
        }

        // Numerical trouble in the averaged check leaves the size unchanged.
        if let Ok(Some(proposed)) = noisy_regime_step(&history, &est, params, n_comp) {
            if proposed > est.size() {
                est = d.sample(proposed, rng)?;
                history.replace_latest(est.aggregate.clone(), est.size());
            }
        }
    }
    Ok(d.finish())
}

/// New batch size when the practical tests fail on `est` and the growth rule
/// asks for more components. `None` keeps the current size, including when
/// the tests cannot be evaluated (single-element batch, zero or overflowing
/// gradient norm).
fn grown_size<T: Scalar>(est: &GradientEstimate<T>, params: &HyperParams<T>, n_comp: usize) -> Option<usize> {
    let report = variance_report(est, &est.aggregate, params.theta, params.nu).ok()?;
    if report.passed() {
        return None;
    }
    let proposed = proposed_sample_size(&report, &est.aggregate, params.theta, params.nu, n_comp).ok()?;
    (proposed > est.size()).then_some(proposed)
}

/// Plain mini-batch SG, `x ← x − α g`.
pub fn run_sg<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    x0: Vec<T>,
    alpha: T,
    batch_size: usize,
    budget_epochs: f64,
    rng: &mut RngState,
) -> Result<RunOutput<T>> {
    run_sg_with(problem, x0, alpha, batch_size, RunOptions::epochs(budget_epochs), rng, |_, _| {})
}

pub fn run_sg_with<T, P, F>(
    problem: &P,
    x0: Vec<T>,
    alpha: T,
    batch_size: usize,
    opts: RunOptions,
    rng: &mut RngState,
    observer: F,
) -> Result<RunOutput<T>>
where
    T: Scalar,
    P: FiniteSumProblem<T> + ?Sized,
    F: FnMut(&IterationRecord, &[T]),
{
    if !(alpha >= T::zero() && alpha.is_finite()) {
        return Err(Error::invalid(format!("SG stepsize must be non-negative, got {alpha}")));
    }
    check_batch_size(batch_size, problem.num_components())?;
    let mut d = Driver::new(problem, x0, opts, observer)?;
    while !d.finished() {
        let est = d.sample(batch_size, rng)?;
        let step = linalg::scale(-alpha, &est.aggregate);
        d.apply(&step, None, &est);
    }
    Ok(d.finish())
}
