use trish_core::theory::{
    batch_moments, exact_tests, random_admissible_params, second_moment_from_tests, verify_lemma1,
    verify_theorem_gap, verify_theorem_vanishing, SyntheticQuadratic,
};
use trish_core::{linalg, FiniteSumProblem, HyperParams, RngState, RunOptions};

#[test]
fn pl_and_lipschitz_hold_on_random_points() {
    let mut rng = RngState::new(1);
    let p = SyntheticQuadratic::<f64>::random_additive(6, 8, 0.3, 3.0, 1.0, &mut rng).unwrap();
    let (l, mu) = (p.lipschitz(), p.mu());
    for _ in 0..10_000 {
        let x = rng.uniform_vec(6, -10.0, 10.0);
        let y = rng.uniform_vec(6, -10.0, 10.0);
        let gx = p.gradient(&x);
        assert!(linalg::norm_sq(&gx) >= 2.0 * mu * (p.loss(&x) - p.f_star()) * (1.0 - 1e-12));
        let diff = linalg::norm(&linalg::sub(&gx, &p.gradient(&y)));
        assert!(diff <= l * linalg::norm(&linalg::sub(&x, &y)) * (1.0 + 1e-12));
    }
}

#[test]
fn full_batch_lemma_is_descent_lemma() {
    let mut rng = RngState::new(2);
    let p = SyntheticQuadratic::<f64>::random_additive(4, 6, 0.5, 2.0, 1.0, &mut rng).unwrap();
    let l = p.lipschitz();
    for _ in 0..200 {
        let x = rng.uniform_vec(4, -3.0, 3.0);
        let g2 = 0.5;
        let g1 = 1.5;
        let alpha = 0.9 * g2 / (g1 * g1 * l);
        let hp = HyperParams::new(alpha, g1, g2).unwrap();
        let m = batch_moments(&p, &x, 6).unwrap();
        assert!(m.mean_sq_error < 1e-20);
        assert!(verify_lemma1(&p, &x, &hp, 6).unwrap().holds_variance);
    }
}

#[test]
fn random_lemma_sweep_other_batch_sizes() {
    let mut rng = RngState::new(3);
    let p = SyntheticQuadratic::<f64>::random_additive(3, 6, 0.5, 2.0, 2.0, &mut rng).unwrap();
    for b in [1, 3, 5] {
        for _ in 0..100 {
            let scale = 10f64.powf(rng.uniform_vec(1, -2.0, 1.0)[0]);
            let x: Vec<f64> = rng.uniform_vec(3, -1.0, 1.0).iter().map(|v| v * scale).collect();
            let hp = random_admissible_params(p.lipschitz(), &mut rng);
            assert!(verify_lemma1(&p, &x, &hp, b).unwrap().holds());
        }
    }
}

#[test]
fn noiseless_gap_decays_geometrically() {
    let mut rng = RngState::new(4);
    let p = SyntheticQuadratic::<f64>::random_additive(3, 6, 0.5, 2.0, 1.0, &mut rng).unwrap();
    let hp = HyperParams::new(0.01, 4.0, 1.0).unwrap();
    let xi = 1.0 - 0.5 * hp.alpha * p.mu() * hp.gamma2;
    let x0 = vec![3.0, -2.0, 1.0];
    let gap0 = p.loss(&x0);
    let mut gaps = Vec::new();
    trish_core::run_trish_with(&p, x0, &hp, 6, RunOptions::iterations(500), &mut rng, |_, x| gaps.push(p.loss(x)))
        .unwrap();
    for (k, g) in gaps.iter().enumerate() {
        assert!(*g <= xi.powi(k as i32 + 1) * gap0 + 1e-14, "k={k}");
    }
}

#[test]
fn exact_tests_bound_second_moment() {
    let mut rng = RngState::new(5);
    let p = SyntheticQuadratic::<f64>::random_multiplicative(3, 8, 0.5, 2.0, 0.5, &mut rng).unwrap();
    let (theta, nu) = (0.9, 5.84);
    let m2 = second_moment_from_tests(theta, nu);
    for _ in 0..200 {
        let x = rng.uniform_vec(3, -2.0, 2.0);
        let t = exact_tests(&p, &x, 2).unwrap();
        if t.satisfied(theta, nu) {
            assert!(t.second_moment <= m2 * t.grad_sq * (1.0 + 1e-12));
        }
        // E‖g‖² = ‖∇F‖² + E(inner part)²/‖∇F‖² + E‖orth‖²
        let split = t.grad_sq + t.inner / t.grad_sq + t.orth;
        assert!((split - t.second_moment).abs() <= 1e-10 * t.second_moment);
    }
}

#[test]
fn theorem_checks_reject_bad_premises() {
    let mut rng = RngState::new(6);
    let p = SyntheticQuadratic::<f64>::random_additive(3, 8, 0.5, 2.0, 1.0, &mut rng).unwrap();
    let too_big = HyperParams::new(1.0, 4.0, 1.0).unwrap();
    assert!(verify_theorem_gap(&p, &[1.0; 3], &too_big, 2, 10, 2, 0).is_err());
    let ok = HyperParams::new(0.1, 1.0, 0.95).unwrap();
    assert!(verify_theorem_vanishing(&p, &[1.0; 3], &ok, 2, 10, 2, 0).is_err());
    let q = SyntheticQuadratic::<f64>::random_multiplicative(3, 8, 0.5, 2.0, 0.3, &mut rng).unwrap();
    let wide = HyperParams::new(0.01, 4.0, 1.0).unwrap();
    assert!(verify_theorem_vanishing(&q, &[1.0; 3], &wide, 2, 10, 2, 0).is_err());
}
