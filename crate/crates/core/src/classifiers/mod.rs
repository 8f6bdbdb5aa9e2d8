//! Track/noise classifiers: an amplitude decision stump (the threshold
//! baseline), logistic regression and a random forest, all emitting a
//! per-sample track probability.

mod forest;
mod logreg;
mod stump;

use alloc::vec::Vec;

pub use forest::{
    feature_importance, ranked_importance, train_forest, DecisionTree, ForestModel, Node,
};
pub use logreg::{fit_logreg, train_logreg, LogRegFit, LogRegModel};
pub use stump::{train_stump, Polarity, StumpModel};

use crate::features::{FeatureMatrix, N_FEATURES};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("training data must contain both classes")]
    SingleClass,
    #[error("training data is empty")]
    Empty,
    #[error("{values} values for {labels} labels")]
    LengthMismatch { values: usize, labels: usize },
    #[error("loss became non-finite at epoch {epoch}; lower the learning rate")]
    NonFiniteLoss { epoch: usize },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PredictError {
    #[error("model expects {expected} features, input has {actual}")]
    FeatureCount { expected: usize, actual: usize },
    #[error("model is malformed: {0}")]
    Malformed(&'static str),
}

/// Hyperparameters for all three classifiers.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    /// Seed for negative downsampling.
    pub ratio_seed: u64,
    pub n_trees: usize,
    /// Features tried per split.
    pub max_features: usize,
    pub min_samples_leaf: usize,
    /// Train each tree on a bootstrap resample; off only in tests.
    pub bootstrap: bool,
    pub forest_seed: u64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    /// Stop once the largest gradient component falls below this.
    pub tolerance: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            ratio_seed: 0,
            n_trees: 100,
            max_features: 6, // floor(sqrt(42))
            min_samples_leaf: 1,
            bootstrap: true,
            forest_seed: 0,
            learning_rate: 0.1,
            epochs: 500,
            l2: 1e-4,
            tolerance: 1e-6,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.n_trees == 0 {
            return Err(TrainError::InvalidConfig("n_trees must be at least 1"));
        }
        if self.max_features == 0 || self.max_features > N_FEATURES {
            return Err(TrainError::InvalidConfig("max_features must be in 1..=42"));
        }
        if self.min_samples_leaf == 0 {
            return Err(TrainError::InvalidConfig("min_samples_leaf must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(TrainError::InvalidConfig("epochs must be at least 1"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(TrainError::InvalidConfig("learning_rate must be positive"));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(TrainError::InvalidConfig("l2 must be non-negative"));
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(TrainError::InvalidConfig("tolerance must be non-negative"));
        }
        Ok(())
    }
}

pub(crate) fn check_labels(n_values: usize, labels: &[u8]) -> Result<(), TrainError> {
    if n_values != labels.len() {
        return Err(TrainError::LengthMismatch {
            values: n_values,
            labels: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(TrainError::Empty);
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    if pos == 0 || pos == labels.len() {
        return Err(TrainError::SingleClass);
    }
    Ok(())
}

/// Any trained classifier.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Model {
    Stump(StumpModel),
    LogReg(LogRegModel),
    Forest(ForestModel),
}

impl Model {
    /// `"stump"`, `"logreg"` or `"forest"`.
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Stump(_) => "stump",
            Model::LogReg(_) => "logreg",
            Model::Forest(_) => "forest",
        }
    }

    /// Track probability for every row of `features`.
    ///
    /// Stump scores are min-max scaled over the batch, so only their order
    /// is meaningful across batches.
    pub fn predict_proba(&self, features: &FeatureMatrix) -> Result<Vec<f64>, PredictError> {
        match self {
            Model::Stump(m) => Ok(m.predict_proba(features)),
            Model::LogReg(m) => m.predict_proba(features),
            Model::Forest(m) => m.predict_proba(features),
        }
    }

    /// Structural checks for models that did not come from a trainer.
    pub fn validate(&self) -> Result<(), PredictError> {
        match self {
            Model::Stump(m) => m.validate(),
            Model::LogReg(m) => m.validate(),
            Model::Forest(m) => m.validate(),
        }
    }
}

impl From<StumpModel> for Model {
    fn from(m: StumpModel) -> Self {
        Model::Stump(m)
    }
}

impl From<LogRegModel> for Model {
    fn from(m: LogRegModel) -> Self {
        Model::LogReg(m)
    }
}

impl From<ForestModel> for Model {
    fn from(m: ForestModel) -> Self {
        Model::Forest(m)
    }
}
