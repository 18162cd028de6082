//! Loss functions, training-data grouping, the feature-based token labeler
//! and the logistic edit classifier.

mod esc;
mod groups;
mod labeler;
pub mod losses;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use esc::{edit_features, logistic_loss, train_edit_classifier, EditClassifier, EscConfig, ESC_SCHEMA};
pub use groups::{build_groups, RankedGroup, TrainingExample};
pub use labeler::{
    changed_positions, featurize, train_token_labeler, FeaturizedExample, LogisticLabeler,
    TokenFeatures, TokenLabeler, TrainedLabeler, GAP_FEATURES, LABELER_SCHEMA, WORD_FEATURES,
};
pub use losses::{gap_loss, rank_loss, total_loss, word_loss, InstanceGrad, LossInstance, LossTerms};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error("no usable training data")]
    EmptyCorpus,
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("system roster {got:?} does not match the trained roster {expected:?}")]
    RosterMismatch { expected: Vec<String>, got: Vec<String> },
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("unreadable model artifact: {0}")]
    Artifact(String),
}

/// Hyperparameters of token-labeler training.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Weight of the rank loss.
    pub gamma: f64,
    /// Multiplier on the quality margin inside the rank loss.
    pub mu: f64,
    /// Scale of the rank loss logistic.
    pub sigma_r: f64,
    /// Loss weight of changed words and gaps.
    pub z: f64,
    pub group_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gamma: 0.2,
            mu: 5.0,
            sigma_r: 1.0,
            z: 2.0,
            group_size: 4,
            learning_rate: 1.0,
            epochs: 100,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: String| Err(TrainError::InvalidConfig(m));
        if !(self.gamma >= 0.0) {
            return bad(format!("gamma {} must be >= 0", self.gamma));
        }
        if !(self.mu > 0.0) || !(self.sigma_r > 0.0) {
            return bad(format!("mu {} and sigma_r {} must be > 0", self.mu, self.sigma_r));
        }
        if !(self.z >= 0.0) {
            return bad(format!("z {} must be >= 0", self.z));
        }
        if self.group_size == 0 {
            return bad("group size must be at least 1".into());
        }
        if !(self.learning_rate > 0.0) {
            return bad(format!("learning rate {} must be > 0", self.learning_rate));
        }
        Ok(())
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
