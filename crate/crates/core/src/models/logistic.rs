use super::{sigmoid, softplus, Classifier, SparseRow};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::problem::FiniteSumProblem;
use crate::scalar::Scalar;

/// Binary logistic regression, `F_i(x) = log(1 + exp(−y_i xᵀz_i))`, labels ±1.
#[derive(Debug, Clone)]
pub struct LogisticModel<T> {
    rows: Vec<SparseRow<T>>,
    labels: Vec<T>,
    dim: usize,
}

impl<T: Scalar> LogisticModel<T> {
    pub fn new(rows: Vec<SparseRow<T>>, labels: Vec<T>, dim: usize) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: rows.len(), found: labels.len() });
        }
        if let Some(l) = labels.iter().find(|&&l| l != T::one() && l != -T::one()) {
            return Err(Error::invalid(format!("logistic labels must be +1 or -1, found {l}")));
        }
        for row in &rows {
            if row.indices.len() != row.values.len() {
                return Err(Error::invalid("sparse row has mismatched index and value counts"));
            }
            if let Some(j) = row.max_index().filter(|&j| j >= dim) {
                return Err(Error::invalid(format!("feature index {} exceeds dimension {dim}", j + 1)));
            }
        }
        Ok(Self { rows, labels, dim })
    }

    /// Builds from a LIBSVM dataset. `dim` defaults to the dataset's largest
    /// feature index; pass the training dimension when building a test model.
    pub fn from_dataset(data: &Dataset, dim: Option<usize>) -> Result<Self> {
        let dim = dim.unwrap_or(data.num_features());
        let rows = data.rows().iter().map(|r| to_sparse_row(r)).collect();
        let labels = data.labels().iter().map(|&y| T::lit(y)).collect();
        Self::new(rows, labels, dim)
    }

    pub fn num_examples(&self) -> usize {
        self.rows.len()
    }

    /// Loss and gradient of component `i`.
    pub fn component(&self, i: usize, x: &[T]) -> Result<(T, Vec<T>)> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        if i >= self.rows.len() {
            return Err(Error::invalid(format!("component {i} out of range")));
        }
        Ok((self.loss_at(i, x), self.gradient_at(i, x)))
    }

    fn margin(&self, i: usize, x: &[T]) -> T {
        self.labels[i] * self.rows[i].dot(x)
    }

    fn loss_at(&self, i: usize, x: &[T]) -> T {
        softplus(-self.margin(i, x))
    }

    fn gradient_at(&self, i: usize, x: &[T]) -> Vec<T> {
        let y = self.labels[i];
        // d/dx log(1 + e^{-m}) = -y z σ(-m)
        let coeff = -y * sigmoid(-self.margin(i, x));
        let row = &self.rows[i];
        let mut g = vec![T::zero(); self.dim];
        for (&j, &v) in row.indices.iter().zip(&row.values) {
            g[j] = coeff * v;
        }
        g
    }
}

pub(crate) fn to_sparse_row<T: Scalar>(features: &[(usize, f64)]) -> SparseRow<T> {
    SparseRow {
        indices: features.iter().map(|&(j, _)| j - 1).collect(),
        values: features.iter().map(|&(_, v)| T::lit(v)).collect(),
    }
}

impl<T: Scalar> FiniteSumProblem<T> for LogisticModel<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_components(&self) -> usize {
        self.rows.len()
    }

    fn component_loss(&self, i: usize, x: &[T]) -> T {
        self.loss_at(i, x)
    }

    fn component_gradient(&self, i: usize, x: &[T]) -> Vec<T> {
        self.gradient_at(i, x)
    }
}

impl<T: Scalar> Classifier<T> for LogisticModel<T> {
    fn num_examples(&self) -> usize {
        self.rows.len()
    }

    /// Predicts `sign(xᵀz)`, with a zero score counted as `+1`.
    fn is_correct(&self, i: usize, params: &[T]) -> bool {
        let predicted = if self.rows[i].dot(params) >= T::zero() { T::one() } else { -T::one() };
        predicted == self.labels[i]
    }
}
