//! Loading datasets and building the training problem and its test metric.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{ensure, Context};
use trish_core::models::{testing_accuracy, testing_loss, MlpSpec};
use trish_core::{
    chronological_split, parse_libsvm, Dataset, FiniteSumProblem, LogisticModel64, MlpModel64, RngState,
};

use crate::config::{ExperimentConfig, InitRule, ModelConfig, Normalize};

pub fn load_libsvm(path: &Path) -> anyhow::Result<Dataset> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    parse_libsvm(BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))
}

/// Min-max scales `train` and `test` jointly, column ranges taken over both.
pub fn normalize_jointly(train: &Dataset, test: &Dataset, include_labels: bool) -> anyhow::Result<(Dataset, Dataset)> {
    let rows = train.rows().iter().chain(test.rows()).cloned().collect();
    let labels = train.labels().iter().chain(test.labels()).copied().collect();
    let all = Dataset::new(rows, labels)?.minmax_normalized(include_labels);
    let n = train.len();
    let part = |r: std::ops::Range<usize>| Dataset::new(all.rows()[r.clone()].to_vec(), all.labels()[r].to_vec());
    Ok((part(0..n)?, part(n..all.len())?))
}

/// Training and test data after splitting, normalization and label mapping.
pub fn prepare_data(cfg: &ExperimentConfig) -> anyhow::Result<(Dataset, Dataset)> {
    let (train, test) = match (&cfg.test, cfg.split_fraction) {
        (Some(test), _) => (load_libsvm(&cfg.train)?, load_libsvm(test)?),
        (None, Some(f)) => chronological_split(&load_libsvm(&cfg.train)?, f)?,
        (None, None) => anyhow::bail!("a test file or split_fraction is required"),
    };
    let (train, test) = match cfg.normalize {
        Normalize::None => (train, test),
        Normalize::Features => normalize_jointly(&train, &test, false)?,
        Normalize::FeaturesAndLabels => normalize_jointly(&train, &test, true)?,
    };
    ensure!(!train.is_empty() && !test.is_empty(), "training and test sets must be non-empty");
    Ok((train, test))
}

enum Model {
    Logistic { train: LogisticModel64, test: LogisticModel64 },
    Classifier { train: MlpModel64, test: MlpModel64 },
    Regressor { train: MlpModel64, test: MlpModel64 },
}

/// A training problem paired with its held-out metric.
pub struct Workload {
    model: Model,
    init: InitRule,
}

impl Workload {
    pub fn from_config(cfg: &ExperimentConfig) -> anyhow::Result<Self> {
        let (train, test) = prepare_data(cfg)?;
        Self::from_data(&cfg.model, &train, &test, cfg.positive_labels.as_deref(), cfg.init_rule())
    }

    pub fn from_data(
        model: &ModelConfig,
        train: &Dataset,
        test: &Dataset,
        positive_labels: Option<&[f64]>,
        init: InitRule,
    ) -> anyhow::Result<Self> {
        let dim = train.num_features().max(test.num_features());
        ensure!(dim > 0, "datasets have no features");
        let is_positive = |y: f64| positive_labels.map_or(y > 0.0, |p| p.contains(&y));
        let model = match model {
            ModelConfig::Logistic => {
                let relabel = |d: &Dataset| -> anyhow::Result<Dataset> {
                    if positive_labels.is_none() {
                        return Ok(d.clone());
                    }
                    let labels = d.labels().iter().map(|&y| if is_positive(y) { 1.0 } else { -1.0 }).collect();
                    Ok(Dataset::new(d.rows().to_vec(), labels)?)
                };
                Model::Logistic {
                    train: LogisticModel64::from_dataset(&relabel(train)?, Some(dim))?,
                    test: LogisticModel64::from_dataset(&relabel(test)?, Some(dim))?,
                }
            }
            ModelConfig::NnClassifier { hidden_units } => {
                let spec = MlpSpec::binary_classifier(*hidden_units);
                let target = |y: f64| if is_positive(y) { 1.0 } else { 0.0 };
                Model::Classifier {
                    train: MlpModel64::from_dataset_with(train, Some(dim), &spec, target)?,
                    test: MlpModel64::from_dataset_with(test, Some(dim), &spec, target)?,
                }
            }
            ModelConfig::NnRegression { loss } => {
                let spec = MlpSpec::regression((*loss).into());
                Model::Regressor {
                    train: MlpModel64::from_dataset(train, Some(dim), &spec)?,
                    test: MlpModel64::from_dataset(test, Some(dim), &spec)?,
                }
            }
        };
        Ok(Self { model, init })
    }

    pub fn problem(&self) -> &dyn FiniteSumProblem<f64> {
        match &self.model {
            Model::Logistic { train, .. } => train,
            Model::Classifier { train, .. } | Model::Regressor { train, .. } => train,
        }
    }

    pub fn num_components(&self) -> usize {
        self.problem().num_components()
    }

    /// Larger is better for classification, smaller for regression.
    pub fn maximize_metric(&self) -> bool {
        !matches!(self.model, Model::Regressor { .. })
    }

    /// Testing accuracy, or testing loss for regression.
    pub fn test_metric(&self, x: &[f64]) -> f64 {
        let value = match &self.model {
            Model::Logistic { test, .. } => testing_accuracy(test, x),
            Model::Classifier { test, .. } => testing_accuracy(test, x),
            Model::Regressor { test, .. } => testing_loss(test, x),
        };
        value.expect("test set is non-empty")
    }

    pub fn train_loss(&self, x: &[f64]) -> f64 {
        self.problem().loss(x)
    }

    pub fn initial_point(&self, rng: &mut RngState) -> Vec<f64> {
        let n = self.problem().dim();
        match self.init {
            InitRule::Zero => vec![0.0; n],
            InitRule::Uniform => rng.uniform_vec(n, -0.5, 0.5),
        }
    }
}
