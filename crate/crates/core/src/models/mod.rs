//! Concrete finite-sum objectives and held-out evaluation.

mod fd;
mod logistic;
mod mlp;

pub use fd::{finite_difference_gradient, relative_error};
pub use logistic::LogisticModel;
pub use mlp::{Activation, Loss, MlpModel, MlpSpec};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sparse row with zero-based, strictly increasing column indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseRow<T> {
    pub indices: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Scalar> SparseRow<T> {
    pub fn dot(&self, x: &[T]) -> T {
        self.indices.iter().zip(&self.values).fold(T::zero(), |acc, (&j, &v)| acc + v * x[j])
    }

    pub fn max_index(&self) -> Option<usize> {
        self.indices.last().copied()
    }

    pub fn from_dense(dense: &[T]) -> Self {
        let (indices, values) = dense
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != T::zero())
            .map(|(j, &v)| (j, v))
            .unzip();
        Self { indices, values }
    }
}

/// Models that classify each example as right or wrong.
pub trait Classifier<T: Scalar> {
    fn num_examples(&self) -> usize;
    fn is_correct(&self, i: usize, params: &[T]) -> bool;
}

/// Models that predict a real target for each example.
pub trait Regressor<T: Scalar> {
    fn num_examples(&self) -> usize;
    fn prediction(&self, i: usize, params: &[T]) -> T;
    fn target(&self, i: usize) -> T;
}

/// Fraction of `test` classified correctly by `params`.
pub fn testing_accuracy<T: Scalar, C: Classifier<T> + ?Sized>(test: &C, params: &[T]) -> Result<f64> {
    let n = test.num_examples();
    if n == 0 {
        return Err(Error::invalid("empty test set"));
    }
    let correct = (0..n).filter(|&i| test.is_correct(i, params)).count();
    Ok(correct as f64 / n as f64)
}

/// Mean squared prediction error over `test`.
pub fn testing_loss<T: Scalar, R: Regressor<T> + ?Sized>(test: &R, params: &[T]) -> Result<f64> {
    let n = test.num_examples();
    if n == 0 {
        return Err(Error::invalid("empty test set"));
    }
    let total = (0..n).fold(0.0, |acc, i| {
        let r = (test.target(i) - test.prediction(i, params)).to_f64_lossy();
        acc + r * r
    });
    Ok(total / n as f64)
}

#[inline]
pub(crate) fn sigmoid<T: Scalar>(t: T) -> T {
    if t >= T::zero() {
        T::one() / (T::one() + (-t).exp())
    } else {
        let e = t.exp();
        e / (T::one() + e)
    }
}

/// `log(1 + e^t)` without overflow.
#[inline]
pub(crate) fn softplus<T: Scalar>(t: T) -> T {
    if t > T::zero() {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}
