//! Trust-region-ish stochastic optimization for finite-sum objectives.
//!
//! The core is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! bottom of this file fix the precision for common uses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod linalg;
pub mod models;
pub mod optimizer;
pub mod problem;
pub mod rng;
pub mod sampling;
pub mod scalar;
pub mod theory;

pub use data::{chronological_split, minmax_normalize, parse_libsvm, write_libsvm, Dataset};
pub use error::{Error, Result};
pub use models::{testing_accuracy, testing_loss, Classifier, LogisticModel, MlpModel, MlpSpec, Regressor, SparseRow};
pub use optimizer::{
    classify_case, default_initial_sample_size, run_sg, run_sg_with, run_trish, run_trish_as, run_trish_as_with, run_trish_with, trish_step,
    trish_step_with_case, HyperParams, IterationRecord, RunOptions, RunOutput, StepCase, StopRule,
};
pub use problem::{draw_batch, sampled_gradient, FiniteSumProblem, GradientEstimate, SampleBatch};
pub use rng::{derive_seed, RngState};
pub use sampling::{noisy_regime_step, proposed_sample_size, variance_report, GradientHistory, VarianceReport};
pub use scalar::Scalar;

pub type HyperParams64 = HyperParams<f64>;
pub type HyperParams32 = HyperParams<f32>;
pub type RunOutput64 = RunOutput<f64>;
pub type RunOutput32 = RunOutput<f32>;
pub type LogisticModel64 = LogisticModel<f64>;
pub type LogisticModel32 = LogisticModel<f32>;
pub type MlpModel64 = MlpModel<f64>;
pub type MlpModel32 = MlpModel<f32>;
pub type GradientEstimate64 = GradientEstimate<f64>;
pub type GradientEstimate32 = GradientEstimate<f32>;
pub type SyntheticQuadratic64 = theory::SyntheticQuadratic<f64>;
pub type SyntheticQuadratic32 = theory::SyntheticQuadratic<f32>;
