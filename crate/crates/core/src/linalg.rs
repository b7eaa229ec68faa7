//! Dense vector helpers over plain slices.

use crate::scalar::Scalar;

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub fn norm_sq<T: Scalar>(a: &[T]) -> T {
    dot(a, a)
}

#[inline]
pub fn norm<T: Scalar>(a: &[T]) -> T {
    norm_sq(a).sqrt()
}

/// `y += a * x`
#[inline]
pub fn axpy<T: Scalar>(a: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + a * xi;
    }
}

#[inline]
pub fn scale<T: Scalar>(a: T, x: &[T]) -> Vec<T> {
    x.iter().map(|&v| a * v).collect()
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn all_finite<T: Scalar>(a: &[T]) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// Elementwise mean of equally sized vectors, summed sequentially in slice order.
pub fn mean_of<T: Scalar, V: AsRef<[T]>>(vs: &[V], dim: usize) -> Vec<T> {
    let mut acc = vec![T::zero(); dim];
    for v in vs {
        for (a, &x) in acc.iter_mut().zip(v.as_ref()) {
            *a = *a + x;
        }
    }
    let count = T::from_usize_lossy(vs.len().max(1));
    acc.iter_mut().for_each(|a| *a = *a / count);
    acc
}
