//! JSON experiment configuration.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context};
use serde::{Deserialize, Serialize};
use trish_core::models::Loss;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Trish,
    TrishAs,
    Sg,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Trish => "trish",
            Algorithm::TrishAs => "trish_as",
            Algorithm::Sg => "sg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalize {
    None,
    Features,
    FeaturesAndLabels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossChoice {
    CrossEntropy,
    Squared,
}

impl From<LossChoice> for Loss {
    fn from(l: LossChoice) -> Self {
        match l {
            LossChoice::CrossEntropy => Loss::CrossEntropy,
            LossChoice::Squared => Loss::Squared,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// Labels must be ±1 unless `positive_labels` is set.
    Logistic,
    /// One sigmoid hidden layer, sigmoid output, cross-entropy; targets 0/1.
    NnClassifier {
        #[serde(default = "default_hidden_units")]
        hidden_units: usize,
    },
    /// Hidden layers of 7 and 5 linear units, sigmoid output, tested by MSE.
    NnRegression {
        #[serde(default = "default_regression_loss")]
        loss: LossChoice,
    },
}

impl ModelConfig {
    pub fn is_classification(&self) -> bool {
        !matches!(self, ModelConfig::NnRegression { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitRule {
    Zero,
    /// Uniform in `[−0.5, 0.5]` per coordinate.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// LIBSVM training file; relative paths resolve against the config file.
    pub train: PathBuf,
    /// LIBSVM test file. When absent, `split_fraction` splits `train` in order.
    #[serde(default)]
    pub test: Option<PathBuf>,
    #[serde(default)]
    pub split_fraction: Option<f64>,
    #[serde(default = "default_normalize")]
    pub normalize: Normalize,
    pub model: ModelConfig,
    /// Labels in this list become the positive class; others the negative one.
    #[serde(default)]
    pub positive_labels: Option<Vec<f64>>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_gamma1_multipliers")]
    pub gamma1_multipliers: Vec<f64>,
    #[serde(default = "default_gamma2_multipliers")]
    pub gamma2_multipliers: Vec<f64>,
    /// Fixed G; measured from one SG epoch when absent.
    #[serde(default)]
    pub g_value: Option<f64>,
    #[serde(default)]
    pub g_seed: u64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget_epochs: f64,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    /// Initial adaptive batch size; `min{32, ⌈N/100⌉}` when absent.
    #[serde(default)]
    pub s0: Option<usize>,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_avg_threshold")]
    pub avg_threshold: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Number of equally spaced EGE checkpoints on each curve.
    #[serde(default = "default_curve_points")]
    pub curve_points: usize,
    /// Defaults to `zero` for logistic models and `uniform` for networks.
    #[serde(default)]
    pub init: Option<InitRule>,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_hidden_units() -> usize {
    5
}
fn default_regression_loss() -> LossChoice {
    LossChoice::CrossEntropy
}
fn default_normalize() -> Normalize {
    Normalize::None
}
pub fn default_alphas() -> Vec<f64> {
    vec![0.1, 10f64.powf(-0.5), 1.0, 10f64.powf(0.5), 10.0]
}
pub fn default_gamma1_multipliers() -> Vec<f64> {
    vec![4.0, 8.0, 16.0, 32.0]
}
pub fn default_gamma2_multipliers() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}
fn default_reps() -> usize {
    50
}
fn default_budget() -> f64 {
    1.0
}
fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Trish, Algorithm::TrishAs]
}
fn default_batch_size() -> usize {
    64
}
fn default_theta() -> f64 {
    0.9
}
fn default_nu() -> f64 {
    5.84
}
fn default_window() -> usize {
    10
}
fn default_avg_threshold() -> f64 {
    1.0
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}
fn default_curve_points() -> usize {
    20
}

impl ExperimentConfig {
    /// Minimal configuration with every other field at its default.
    pub fn new(train: impl Into<PathBuf>, model: ModelConfig) -> Self {
        Self {
            train: train.into(),
            test: None,
            split_fraction: None,
            normalize: default_normalize(),
            model,
            positive_labels: None,
            alphas: default_alphas(),
            gamma1_multipliers: default_gamma1_multipliers(),
            gamma2_multipliers: default_gamma2_multipliers(),
            g_value: None,
            g_seed: 0,
            reps: default_reps(),
            seed: 0,
            budget_epochs: default_budget(),
            algorithms: default_algorithms(),
            batch_size: default_batch_size(),
            s0: None,
            theta: default_theta(),
            nu: default_nu(),
            window: default_window(),
            avg_threshold: default_avg_threshold(),
            output_dir: default_output_dir(),
            curve_points: default_curve_points(),
            init: None,
            threads: None,
        }
    }

    /// Reads, validates, and resolves relative paths against the file's directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: Self =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.train = base.join(&cfg.train);
        cfg.test = cfg.test.map(|t| base.join(t));
        cfg.output_dir = base.join(&cfg.output_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let positive = |v: &[f64]| !v.is_empty() && v.iter().all(|&a| a > 0.0 && a.is_finite());
        ensure!(positive(&self.alphas), "alphas must be a non-empty list of positive values");
        ensure!(positive(&self.gamma1_multipliers), "gamma1_multipliers must be non-empty and positive");
        ensure!(positive(&self.gamma2_multipliers), "gamma2_multipliers must be non-empty and positive");
        let min_g1 = self.gamma1_multipliers.iter().copied().fold(f64::INFINITY, f64::min);
        let max_g2 = self.gamma2_multipliers.iter().copied().fold(0.0, f64::max);
        ensure!(max_g2 < min_g1, "every gamma2 multiplier must be below every gamma1 multiplier");
        ensure!(self.reps >= 1, "reps must be at least 1");
        ensure!(!self.algorithms.is_empty(), "algorithms must not be empty");
        ensure!(self.budget_epochs > 0.0 && self.budget_epochs.is_finite(), "budget_epochs must be positive");
        ensure!(self.batch_size >= 1, "batch_size must be at least 1");
        ensure!(self.s0.is_none_or(|s| s >= 1), "s0 must be at least 1");
        ensure!(self.theta > 0.0 && self.nu > 0.0, "theta and nu must be positive");
        ensure!(self.window >= 1, "window must be at least 1");
        ensure!(self.avg_threshold > 0.0, "avg_threshold must be positive");
        ensure!(self.curve_points >= 1, "curve_points must be at least 1");
        if let Some(g) = self.g_value {
            ensure!(g > 0.0 && g.is_finite(), "g_value must be positive");
        }
        match (&self.test, self.split_fraction) {
            (Some(_), Some(_)) => bail!("give either a test file or split_fraction, not both"),
            (None, None) => bail!("a test file or split_fraction is required"),
            (None, Some(f)) => ensure!(f > 0.0 && f < 1.0, "split_fraction must be in (0, 1)"),
            _ => {}
        }
        let mut seen = std::collections::HashSet::new();
        ensure!(self.algorithms.iter().all(|a| seen.insert(*a)), "algorithms must not repeat");
        Ok(())
    }

    pub fn init_rule(&self) -> InitRule {
        self.init.unwrap_or(match self.model {
            ModelConfig::Logistic => InitRule::Zero,
            _ => InitRule::Uniform,
        })
    }

    pub fn grid_size(&self) -> usize {
        self.alphas.len() * self.gamma1_multipliers.len() * self.gamma2_multipliers.len()
    }
}
