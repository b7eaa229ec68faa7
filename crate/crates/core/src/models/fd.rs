use crate::linalg;
use crate::problem::FiniteSumProblem;
use crate::scalar::Scalar;

/// Central-difference gradient of component `i` with step `h`.
pub fn finite_difference_gradient<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    i: usize,
    x: &[T],
    h: T,
) -> Vec<T> {
    assert!(h > T::zero(), "finite-difference step must be positive");
    let mut probe = x.to_vec();
    let two_h = h + h;
    (0..x.len())
        .map(|j| {
            let orig = probe[j];
            probe[j] = orig + h;
            let up = problem.component_loss(i, &probe);
            probe[j] = orig - h;
            let down = problem.component_loss(i, &probe);
            probe[j] = orig;
            (up - down) / two_h
        })
        .collect()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, or `‖a − b‖` when both are below `floor`.
pub fn relative_error<T: Scalar>(a: &[T], b: &[T], floor: T) -> T {
    let diff = linalg::norm(&linalg::sub(a, b));
    let scale = linalg::norm(a).max(linalg::norm(b)).max(floor);
    diff / scale
}
