use std::sync::atomic::{AtomicUsize, Ordering};

use proptest::prelude::*;
use trish_core::theory::SyntheticQuadratic;
use trish_core::{
    default_initial_sample_size, linalg, run_sg, run_trish, run_trish_as, run_trish_as_with, run_trish_with,
    trish_step, trish_step_with_case, FiniteSumProblem, HyperParams, HyperParams32, RngState, RunOptions, StepCase,
};

/// `F_1 = cᵀx`, `F_2 = −cᵀx`.
struct Opposed(Vec<f64>);

impl FiniteSumProblem<f64> for Opposed {
    fn dim(&self) -> usize {
        self.0.len()
    }
    fn num_components(&self) -> usize {
        2
    }
    fn component_loss(&self, i: usize, x: &[f64]) -> f64 {
        let v = linalg::dot(&self.0, x);
        if i == 0 { v } else { -v }
    }
    fn component_gradient(&self, i: usize, _x: &[f64]) -> Vec<f64> {
        if i == 0 { self.0.clone() } else { self.0.iter().map(|v| -v).collect() }
    }
}

struct Counting<P> {
    inner: P,
    calls: AtomicUsize,
}

impl<P: FiniteSumProblem<f64>> FiniteSumProblem<f64> for Counting<P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn num_components(&self) -> usize {
        self.inner.num_components()
    }
    fn component_loss(&self, i: usize, x: &[f64]) -> f64 {
        self.inner.component_loss(i, x)
    }
    fn component_gradient(&self, i: usize, x: &[f64]) -> Vec<f64> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.component_gradient(i, x)
    }
}

fn noisy(n: usize, seed: u64) -> SyntheticQuadratic<f64> {
    let mut rng = RngState::new(seed);
    SyntheticQuadratic::random_additive(5, n, 0.5, 2.0, 3.0, &mut rng).unwrap()
}

fn params(alpha: f64, g1: f64, g2: f64) -> HyperParams<f64> {
    HyperParams::new(alpha, g1, g2).unwrap()
}

#[test]
fn step_examples() {
    let p = params(0.1, 4.0, 1.0);
    let (step, case) = trish_step_with_case(&[0.6, 0.8], &p).unwrap();
    assert_eq!(case, StepCase::Case2);
    assert!((step[0] + 0.06).abs() < 1e-15 && (step[1] + 0.08).abs() < 1e-15);
    let (step, case) = trish_step_with_case(&[0.1, 0.0], &p).unwrap();
    assert_eq!(case, StepCase::Case1);
    assert!((step[0] + 0.04).abs() < 1e-15 && step[1] == 0.0);
    let (step, case) = trish_step_with_case(&[3.0, 4.0], &p).unwrap();
    assert_eq!(case, StepCase::Case3);
    assert!((step[0] + 0.3).abs() < 1e-15 && (step[1] + 0.4).abs() < 1e-15);
}

#[test]
fn both_thresholds_are_case2() {
    let p = params(0.1, 4.0, 1.0);
    assert_eq!(trish_step_with_case(&[0.25, 0.0], &p).unwrap().1, StepCase::Case2);
    assert_eq!(trish_step_with_case(&[0.0, 1.0], &p).unwrap().1, StepCase::Case2);
    assert_eq!(trish_step_with_case(&[0.0, 1.0 + 1e-12], &p).unwrap().1, StepCase::Case3);
    assert_eq!(trish_step_with_case(&[0.25 - 1e-12, 0.0], &p).unwrap().1, StepCase::Case1);
}

#[test]
fn rejects_bad_inputs() {
    assert!(HyperParams::new(0.1, 1.0, 1.0).is_err());
    assert!(HyperParams::new(0.0, 2.0, 1.0).is_err());
    assert!(HyperParams::new(0.1, 2.0, 0.0).is_err());
    assert!(trish_step(&[f64::NAN], &params(0.1, 2.0, 1.0)).is_err());
    let p = noisy(10, 1);
    assert!(run_trish(&p, vec![0.0; 4], &params(0.1, 2.0, 1.0), 2, 1.0, &mut RngState::new(0)).is_err());
    assert!(run_trish(&p, vec![0.0; 5], &params(0.1, 2.0, 1.0), 11, 1.0, &mut RngState::new(0)).is_err());
    assert!(run_trish(&p, vec![0.0; 5], &params(0.1, 2.0, 1.0), 2, 0.0, &mut RngState::new(0)).is_err());
}

#[test]
fn full_batch_case1_is_gradient_descent() {
    // D = I, every gradient is in Case1, so x ← (1 − αγ₁) x = 0.9 x
    let p = SyntheticQuadratic::additive(vec![1.0; 3], vec![vec![0.0; 3]; 4]).unwrap();
    let hp = params(1e5, 1e-6, 5e-7);
    let x0 = vec![1.0, -2.0, 0.5];
    let out = run_trish_with(&p, x0.clone(), &hp, 4, RunOptions::iterations(30), &mut RngState::new(0), |_, _| {})
        .unwrap();
    assert!(out.records.iter().all(|r| r.case == Some(StepCase::Case1)));
    for (a, b) in out.x.iter().zip(&x0) {
        assert!((a - 0.9f64.powi(30) * b).abs() < 1e-12);
    }
}

#[test]
fn one_epoch_iteration_count() {
    let p = noisy(1605, 2);
    let out = run_trish(&p, vec![0.0; 5], &params(0.1, 4.0, 1.0), 64, 1.0, &mut RngState::new(5)).unwrap();
    assert_eq!(out.records.len(), 26);
    assert_eq!(out.evaluations, 26 * 64);
    assert!((out.final_ege() - 1664.0 / 1605.0).abs() < 1e-15);
    assert_eq!(default_initial_sample_size(1605), 17);
    assert_eq!(default_initial_sample_size(100_000), 32);
    assert_eq!(default_initial_sample_size(5), 1);
}

#[test]
fn stationary_point_is_fixed() {
    let mut rng = RngState::new(4);
    let p = SyntheticQuadratic::random_multiplicative(3, 20, 0.5, 2.0, 0.4, &mut rng).unwrap();
    let hp = params(0.5, 4.0, 1.0);
    let a = run_trish(&p, vec![0.0; 3], &hp, 5, 2.0, &mut rng).unwrap();
    let b = run_trish_as(&p, vec![0.0; 3], &hp, 2, 2.0, &mut rng).unwrap();
    assert_eq!(a.x, vec![0.0; 3]);
    assert_eq!(b.x, vec![0.0; 3]);
    assert!(b.records.iter().all(|r| r.batch_size == 2));
}

#[test]
fn disabled_tests_keep_size() {
    let p = noisy(300, 3);
    let hp = params(0.3, 4.0, 1.0).with_tests(f64::INFINITY, f64::INFINITY);
    let out = run_trish_as(&p, vec![2.0; 5], &hp, 3, 3.0, &mut RngState::new(9)).unwrap();
    assert!(out.records.iter().all(|r| r.batch_size == 3));
    assert_eq!(out.records.len(), 300);
}

#[test]
fn cancelling_components_do_not_break_sampling() {
    let p = Opposed(vec![1.0, -2.0]);
    let hp = params(0.1, 4.0, 1.0);
    let one = run_trish_as(&p, vec![0.0; 2], &hp, 1, 10.0, &mut RngState::new(1)).unwrap();
    assert!(one.records.iter().all(|r| r.batch_size == 1));
    let both = run_trish_as(&p, vec![0.0; 2], &hp, 2, 10.0, &mut RngState::new(1)).unwrap();
    assert_eq!(both.x, vec![0.0; 2]);
    assert!(both.records.iter().all(|r| r.batch_size == 2 && r.grad_norm == 0.0));
}

#[test]
fn adaptive_sizes_never_shrink_and_do_grow() {
    let p = noisy(400, 6);
    let hp = params(0.5, 4.0, 1.0);
    let out = run_trish_as(&p, vec![5.0; 5], &hp, 2, 5.0, &mut RngState::new(12)).unwrap();
    let sizes: Vec<usize> = out.records.iter().map(|r| r.batch_size).collect();
    assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
    assert!(*sizes.last().unwrap() > 2);
    assert!(sizes.iter().all(|&s| s <= 400));
}

#[test]
fn evaluations_match_gradient_calls() {
    for (seed, budget) in [(1u64, 1.0), (2, 2.5), (3, 0.3)] {
        let p = Counting { inner: noisy(250, seed), calls: AtomicUsize::new(0) };
        let out = run_trish_as(&p, vec![4.0; 5], &params(0.5, 4.0, 1.0), 3, budget, &mut RngState::new(seed)).unwrap();
        assert_eq!(out.evaluations, p.calls.load(Ordering::Relaxed));
        let max_batch = out.records.iter().map(|r| r.batch_size).max().unwrap();
        let ege = out.final_ege();
        assert!(ege >= budget && ege <= budget + max_batch as f64 / 250.0 * 3.0, "ege {ege}");
        assert_eq!(ege, out.evaluations as f64 / 250.0);

        let p = Counting { inner: noisy(250, seed), calls: AtomicUsize::new(0) };
        let out = run_trish(&p, vec![4.0; 5], &params(0.5, 4.0, 1.0), 16, budget, &mut RngState::new(seed)).unwrap();
        assert_eq!(out.evaluations, p.calls.load(Ordering::Relaxed));
        assert!(out.final_ege() >= budget && out.final_ege() <= budget + 16.0 / 250.0);
    }
}

#[test]
fn runs_are_deterministic() {
    let p = noisy(200, 8);
    let hp = params(0.3, 4.0, 1.0);
    let a = run_trish_as(&p, vec![1.0; 5], &hp, 2, 2.0, &mut RngState::for_run(77, 3)).unwrap();
    let b = run_trish_as(&p, vec![1.0; 5], &hp, 2, 2.0, &mut RngState::for_run(77, 3)).unwrap();
    let c = run_trish_as(&p, vec![1.0; 5], &hp, 2, 2.0, &mut RngState::for_run(77, 4)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.x, c.x);
}

#[test]
fn zero_stepsize_sg_stays_put() {
    let p = noisy(50, 9);
    let out = run_sg(&p, vec![1.5; 5], 0.0, 8, 1.0, &mut RngState::new(0)).unwrap();
    assert_eq!(out.x, vec![1.5; 5]);
    assert_eq!(out.evaluations, 56);
    assert!(out.records.iter().all(|r| r.case.is_none()));
    assert_eq!(out.case_fractions(), [0.0; 3]);
}

#[test]
fn tracked_loss_and_case_fractions() {
    let p = noisy(100, 10);
    let hp = params(0.2, 4.0, 1.0);
    let out = run_trish_with(
        &p,
        vec![3.0; 5],
        &hp,
        10,
        RunOptions::epochs(3.0).tracking_loss(),
        &mut RngState::new(1),
        |_, _| {},
    )
    .unwrap();
    assert!(out.records.iter().all(|r| r.train_loss.is_some()));
    assert!((out.case_fractions().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(out.records.last().unwrap().train_loss.unwrap() < p.loss(&[3.0; 5]));
}

#[test]
fn observer_sees_every_iterate() {
    let p = noisy(60, 11);
    let mut seen = Vec::new();
    let out = run_trish_as_with(
        &p,
        vec![1.0; 5],
        &params(0.2, 4.0, 1.0),
        2,
        RunOptions::iterations(40),
        &mut RngState::new(2),
        |r, x| seen.push((r.k, x.to_vec())),
    )
    .unwrap();
    assert_eq!(seen.len(), 40);
    assert!(seen.iter().enumerate().all(|(i, (k, _))| *k == i));
    assert_eq!(seen.last().unwrap().1, out.x);
}

#[test]
fn single_precision_runs() {
    let mut rng = RngState::new(3);
    let p = SyntheticQuadratic::<f32>::random_additive(4, 40, 0.5, 2.0, 0.5, &mut rng).unwrap();
    let hp = HyperParams32::new(0.1, 4.0, 1.0).unwrap();
    let out = run_trish_as(&p, vec![2.0f32; 4], &hp, 2, 4.0, &mut rng).unwrap();
    assert!(p.loss(&out.x) < p.loss(&[2.0f32; 4]));
}

proptest! {
    #[test]
    fn step_length_by_case(
        g in prop::collection::vec(-10.0f64..10.0, 1..6),
        alpha in 1e-3f64..10.0,
        g2 in 0.05f64..5.0,
        ratio in 1.01f64..20.0,
    ) {
        let hp = params(alpha, g2 * ratio, g2);
        let (p, case) = trish_step_with_case(&g, &hp).unwrap();
        let (pn, gn) = (linalg::norm(&p), linalg::norm(&g));
        let tol = 1e-12 * (1.0 + pn);
        prop_assert!(pn <= hp.gamma1 * alpha * gn + tol);
        prop_assert!(pn + tol >= hp.gamma2 * alpha * gn);
        match case {
            StepCase::Case1 => prop_assert!(pn < alpha + tol),
            StepCase::Case2 => prop_assert!((pn - alpha).abs() <= tol),
            StepCase::Case3 => prop_assert!(pn + tol > alpha),
        }
        prop_assert!(linalg::dot(&p, &g) <= 0.0);
    }
}
