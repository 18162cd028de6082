//! Quality scores and the combination biases built on top of them.

mod algebra;
pub mod external;
pub mod ngram;
mod scorer;

use thiserror::Error;

pub use algebra::{
    aggregate_q, biased_score, edit_score, score_breakdown, voting_score, CombinerConfig,
    ScoreBreakdown, DEFAULT_PROB_FLOOR,
};
pub use external::{Endpoint, ExternalScorer};
pub use ngram::{LanguageModel, NgramLm, NgramScorer};
pub use scorer::{ReferenceOracleScorer, Scorer, ScorerOutput, UniformScorer};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("union edit {index} has no edit-classifier probability")]
    MissingProbability { index: usize },
    #[error("model not loaded: {0}")]
    ModelNotLoaded(String),
    #[error("source sentence has no reference")]
    UnknownSource,
    #[error("scorer returned {got} word labels for a {expected}-token hypothesis")]
    Shape { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("scorer transport failed: {0}")]
    Transport(String),
    #[error("scorer protocol violation: {0}")]
    Protocol(String),
    #[error("scorer error {code} for request {id}: {message}")]
    Remote { id: i64, code: String, message: String },
}
