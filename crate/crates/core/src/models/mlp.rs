//! Fully connected feed-forward network with a single output unit.
//!
//! Parameters are packed layer by layer: the weight matrix in row-major
//! `(out, in)` order, then that layer's bias vector.

use super::logistic::to_sparse_row;
use super::{sigmoid, Classifier, Regressor, SparseRow};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::problem::FiniteSumProblem;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Sigmoid,
    Linear,
}

impl Activation {
    fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Sigmoid => sigmoid(z),
            Activation::Linear => z,
        }
    }

    /// Derivative expressed through the activation output `a`.
    fn derivative<T: Scalar>(self, a: T) -> T {
        match self {
            Activation::Sigmoid => a * (T::one() - a),
            Activation::Linear => T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    /// `−(y log h + (1 − y) log(1 − h))`, `h` clamped to `[ε, 1 − ε]`.
    CrossEntropy,
    /// `(y − h)²`.
    Squared,
}

/// Architecture of a single-output network.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpSpec {
    pub hidden: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub loss: Loss,
}

impl MlpSpec {
    /// Binary classifier: one sigmoid hidden layer, sigmoid output, cross-entropy.
    pub fn binary_classifier(hidden_units: usize) -> Self {
        Self {
            hidden: vec![hidden_units],
            hidden_activation: Activation::Sigmoid,
            output_activation: Activation::Sigmoid,
            loss: Loss::CrossEntropy,
        }
    }

    /// Regression network: linear hidden layers of 7 and 5 units, sigmoid output.
    pub fn regression(loss: Loss) -> Self {
        Self {
            hidden: vec![7, 5],
            hidden_activation: Activation::Linear,
            output_activation: Activation::Sigmoid,
            loss,
        }
    }

    /// Widths from input to output.
    pub fn layer_sizes(&self, input_dim: usize) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.hidden.len() + 2);
        sizes.push(input_dim);
        sizes.extend(&self.hidden);
        sizes.push(1);
        sizes
    }

    pub fn param_count(&self, input_dim: usize) -> usize {
        self.layer_sizes(input_dim).windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }
}

#[derive(Debug, Clone, Copy)]
struct Layer {
    inputs: usize,
    outputs: usize,
    activation: Activation,
    /// Offset of the weight block in the packed parameter vector.
    offset: usize,
}

impl Layer {
    fn bias_offset(&self) -> usize {
        self.offset + self.inputs * self.outputs
    }
}

const CE_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct MlpModel<T> {
    inputs: Vec<SparseRow<T>>,
    targets: Vec<T>,
    input_dim: usize,
    layers: Vec<Layer>,
    loss: Loss,
    n_params: usize,
}

impl<T: Scalar> MlpModel<T> {
    pub fn new(inputs: Vec<SparseRow<T>>, targets: Vec<T>, input_dim: usize, spec: &MlpSpec) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::DimensionMismatch { expected: inputs.len(), found: targets.len() });
        }
        if spec.hidden.contains(&0) || input_dim == 0 {
            return Err(Error::invalid("layer widths must be positive"));
        }
        if let Some(j) = inputs.iter().filter_map(SparseRow::max_index).find(|&j| j >= input_dim) {
            return Err(Error::invalid(format!("feature index {} exceeds input dimension {input_dim}", j + 1)));
        }
        if spec.loss == Loss::CrossEntropy {
            if let Some(y) = targets.iter().find(|&&y| !(y >= T::zero() && y <= T::one())) {
                return Err(Error::invalid(format!("cross-entropy targets must lie in [0, 1], found {y}")));
            }
        }
        let sizes = spec.layer_sizes(input_dim);
        let mut layers = Vec::with_capacity(sizes.len() - 1);
        let mut offset = 0;
        for (l, w) in sizes.windows(2).enumerate() {
            let activation = if l + 2 == sizes.len() { spec.output_activation } else { spec.hidden_activation };
            layers.push(Layer { inputs: w[0], outputs: w[1], activation, offset });
            offset += w[0] * w[1] + w[1];
        }
        Ok(Self { inputs, targets, input_dim, layers, loss: spec.loss, n_params: offset })
    }

    /// Builds from a LIBSVM dataset with targets taken from the labels as given.
    pub fn from_dataset(data: &Dataset, input_dim: Option<usize>, spec: &MlpSpec) -> Result<Self> {
        Self::from_dataset_with(data, input_dim, spec, T::lit)
    }

    /// Builds from a LIBSVM dataset, mapping each label through `target`.
    pub fn from_dataset_with(
        data: &Dataset,
        input_dim: Option<usize>,
        spec: &MlpSpec,
        target: impl Fn(f64) -> T,
    ) -> Result<Self> {
        let dim = input_dim.unwrap_or(data.num_features());
        let inputs = data.rows().iter().map(|r| to_sparse_row(r)).collect();
        let targets = data.labels().iter().map(|&y| target(y)).collect();
        Self::new(inputs, targets, dim, spec)
    }

    pub fn param_count(&self) -> usize {
        self.n_params
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.input_dim];
        sizes.extend(self.layers.iter().map(|l| l.outputs));
        sizes
    }

    pub fn loss_kind(&self) -> Loss {
        self.loss
    }

    /// Network output `h(z_i; x)`.
    pub fn predict(&self, i: usize, params: &[T]) -> T {
        *self.forward(i, params).last().and_then(|a| a.first()).expect("network has an output unit")
    }

    /// Output for a dense input vector, bypassing the stored data.
    pub fn predict_dense(&self, input: &[T], params: &[T]) -> T {
        let row = SparseRow::from_dense(input);
        let acts = self.forward_row(&row, params);
        acts.last().expect("output layer")[0]
    }

    /// Loss and gradient of component `i`.
    pub fn component(&self, i: usize, params: &[T]) -> Result<(T, Vec<T>)> {
        if params.len() != self.n_params {
            return Err(Error::DimensionMismatch { expected: self.n_params, found: params.len() });
        }
        if i >= self.inputs.len() {
            return Err(Error::invalid(format!("component {i} out of range")));
        }
        Ok(self.loss_and_gradient(i, params))
    }

    /// Activations of every layer after the input, first hidden layer first.
    fn forward(&self, i: usize, params: &[T]) -> Vec<Vec<T>> {
        self.forward_row(&self.inputs[i], params)
    }

    fn forward_row(&self, row: &SparseRow<T>, params: &[T]) -> Vec<Vec<T>> {
        let mut acts: Vec<Vec<T>> = Vec::with_capacity(self.layers.len());
        for (l, layer) in self.layers.iter().enumerate() {
            let w = &params[layer.offset..layer.bias_offset()];
            let b = &params[layer.bias_offset()..layer.bias_offset() + layer.outputs];
            let out: Vec<T> = (0..layer.outputs)
                .map(|u| {
                    let w_row = &w[u * layer.inputs..(u + 1) * layer.inputs];
                    let z = if l == 0 {
                        row.dot(w_row)
                    } else {
                        w_row.iter().zip(&acts[l - 1]).fold(T::zero(), |acc, (&wi, &ai)| acc + wi * ai)
                    };
                    layer.activation.apply(z + b[u])
                })
                .collect();
            acts.push(out);
        }
        acts
    }

    fn output_loss(&self, h: T, y: T) -> (T, T) {
        match self.loss {
            Loss::Squared => {
                let r = y - h;
                (r * r, -(r + r))
            }
            Loss::CrossEntropy => {
                let eps = T::lit(CE_CLAMP);
                let hc = h.max(eps).min(T::one() - eps);
                let loss = -(y * hc.ln() + (T::one() - y) * (T::one() - hc).ln());
                let d = if h < eps || h > T::one() - eps {
                    T::zero()
                } else {
                    -y / hc + (T::one() - y) / (T::one() - hc)
                };
                (loss, d)
            }
        }
    }

    fn loss_and_gradient(&self, i: usize, params: &[T]) -> (T, Vec<T>) {
        let acts = self.forward(i, params);
        let h = acts.last().expect("output layer")[0];
        let (loss, dl_dh) = self.output_loss(h, self.targets[i]);

        let mut grad = vec![T::zero(); self.n_params];
        let last = self.layers.len() - 1;
        let mut delta = vec![dl_dh * self.layers[last].activation.derivative(h)];
        for l in (0..self.layers.len()).rev() {
            let layer = self.layers[l];
            let bias = layer.bias_offset();
            for (u, &d) in delta.iter().enumerate() {
                grad[bias + u] = d;
                let w_base = layer.offset + u * layer.inputs;
                if l == 0 {
                    let row = &self.inputs[i];
                    for (&j, &v) in row.indices.iter().zip(&row.values) {
                        grad[w_base + j] = d * v;
                    }
                } else {
                    for (k, &a) in acts[l - 1].iter().enumerate() {
                        grad[w_base + k] = d * a;
                    }
                }
            }
            if l == 0 {
                break;
            }
            let below = self.layers[l - 1];
            delta = (0..layer.inputs)
                .map(|k| {
                    let back = delta.iter().enumerate().fold(T::zero(), |acc, (u, &d)| {
                        acc + d * params[layer.offset + u * layer.inputs + k]
                    });
                    back * below.activation.derivative(acts[l - 1][k])
                })
                .collect();
        }
        (loss, grad)
    }
}

impl<T: Scalar> FiniteSumProblem<T> for MlpModel<T> {
    fn dim(&self) -> usize {
        self.n_params
    }

    fn num_components(&self) -> usize {
        self.inputs.len()
    }

    fn component_loss(&self, i: usize, x: &[T]) -> T {
        let h = self.predict(i, x);
        self.output_loss(h, self.targets[i]).0
    }

    fn component_gradient(&self, i: usize, x: &[T]) -> Vec<T> {
        self.loss_and_gradient(i, x).1
    }
}

impl<T: Scalar> Classifier<T> for MlpModel<T> {
    fn num_examples(&self) -> usize {
        self.inputs.len()
    }

    /// Predicts class 1 iff `h ≥ 0.5`.
    fn is_correct(&self, i: usize, params: &[T]) -> bool {
        let half = T::lit(0.5);
        (self.predict(i, params) >= half) == (self.targets[i] >= half)
    }
}

impl<T: Scalar> Regressor<T> for MlpModel<T> {
    fn num_examples(&self) -> usize {
        self.inputs.len()
    }

    fn prediction(&self, i: usize, params: &[T]) -> T {
        self.predict(i, params)
    }

    fn target(&self, i: usize) -> T {
        self.targets[i]
    }
}
