//! Finite-sum objectives, mini-batches and sampled gradients.

use rand::seq::index;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::RngState;
use crate::scalar::Scalar;

/// Objective `F(x) = (1/N) Σ F_i(x)` over `N` components in `n` parameters.
///
/// Implementations must be immutable once built; runs share them across threads.
pub trait FiniteSumProblem<T: Scalar>: Sync {
    /// Parameter dimension `n`.
    fn dim(&self) -> usize;

    /// Component count `N`.
    fn num_components(&self) -> usize;

    fn component_loss(&self, i: usize, x: &[T]) -> T;

    fn component_gradient(&self, i: usize, x: &[T]) -> Vec<T>;

    fn loss(&self, x: &[T]) -> T {
        let n = self.num_components();
        let total = (0..n).fold(T::zero(), |acc, i| acc + self.component_loss(i, x));
        total / T::from_usize_lossy(n)
    }

    fn gradient(&self, x: &[T]) -> Vec<T> {
        let n = self.num_components();
        let mut acc = vec![T::zero(); self.dim()];
        for i in 0..n {
            linalg::axpy(T::one(), &self.component_gradient(i, x), &mut acc);
        }
        let scale = T::from_usize_lossy(n);
        acc.iter_mut().for_each(|a| *a = *a / scale);
        acc
    }
}

impl<T: Scalar, P: FiniteSumProblem<T> + ?Sized> FiniteSumProblem<T> for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn num_components(&self) -> usize {
        (**self).num_components()
    }
    fn component_loss(&self, i: usize, x: &[T]) -> T {
        (**self).component_loss(i, x)
    }
    fn component_gradient(&self, i: usize, x: &[T]) -> Vec<T> {
        (**self).component_gradient(i, x)
    }
    fn loss(&self, x: &[T]) -> T {
        (**self).loss(x)
    }
    fn gradient(&self, x: &[T]) -> Vec<T> {
        (**self).gradient(x)
    }
}

/// Distinct zero-based component indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleBatch(Vec<usize>);

impl SampleBatch {
    /// Builds a batch from explicit indices, checking distinctness and range.
    pub fn new(indices: Vec<usize>, num_components: usize) -> Result<Self> {
        if indices.is_empty() || indices.len() > num_components {
            return Err(Error::invalid(format!(
                "batch size {} outside [1, {num_components}]",
                indices.len()
            )));
        }
        let mut seen = vec![false; num_components];
        for &i in &indices {
            if i >= num_components {
                return Err(Error::invalid(format!("index {i} out of range for N={num_components}")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::invalid(format!("duplicate index {i}")));
            }
        }
        Ok(Self(indices))
    }

    pub fn full(num_components: usize) -> Self {
        Self((0..num_components).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.len()
    }
}

/// Mini-batch gradient together with the per-component gradients it averages.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate<T> {
    pub aggregate: Vec<T>,
    pub per_component: Vec<Vec<T>>,
    pub batch: SampleBatch,
}

impl<T: Scalar> GradientEstimate<T> {
    /// Wraps precomputed per-component gradients; `aggregate` is their mean.
    pub fn from_components(per_component: Vec<Vec<T>>, batch: SampleBatch) -> Result<Self> {
        if per_component.len() != batch.size() {
            return Err(Error::DimensionMismatch {
                expected: batch.size(),
                found: per_component.len(),
            });
        }
        let dim = per_component.first().map_or(0, Vec::len);
        if let Some(bad) = per_component.iter().find(|g| g.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
        }
        let aggregate = linalg::mean_of(&per_component, dim);
        Ok(Self { aggregate, per_component, batch })
    }

    pub fn size(&self) -> usize {
        self.batch.size()
    }

    pub fn norm(&self) -> T {
        linalg::norm(&self.aggregate)
    }
}

/// Uniform draw of `size` distinct indices from `0..num_components`.
pub fn draw_batch(num_components: usize, size: usize, rng: &mut RngState) -> Result<SampleBatch> {
    if size == 0 || size > num_components {
        return Err(Error::invalid(format!("batch size {size} outside [1, {num_components}]")));
    }
    let picked = index::sample(rng.batch_stream(), num_components, size).into_vec();
    Ok(SampleBatch(picked))
}

/// Mean of component gradients over `batch`, keeping each component gradient.
pub fn sampled_gradient<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    x: &[T],
    batch: &SampleBatch,
) -> Result<GradientEstimate<T>> {
    if x.len() != problem.dim() {
        return Err(Error::DimensionMismatch { expected: problem.dim(), found: x.len() });
    }
    let n_comp = problem.num_components();
    if let Some(&bad) = batch.indices().iter().find(|&&i| i >= n_comp) {
        return Err(Error::invalid(format!("index {bad} out of range for N={n_comp}")));
    }
    let mut per_component = Vec::with_capacity(batch.size());
    for &i in batch.indices() {
        let g = problem.component_gradient(i, x);
        if !linalg::all_finite(&g) {
            return Err(Error::NonFinite { what: "component gradient", index: Some(i) });
        }
        per_component.push(g);
    }
    let aggregate = linalg::mean_of(&per_component, problem.dim());
    Ok(GradientEstimate { aggregate, per_component, batch: batch.clone() })
}
