//! Corpus and sentence F0.5, rank correlation, significance tests and
//! perplexity-based fluency.

mod f05;
mod fluency;
mod stats;

use thiserror::Error;

pub use f05::{
    corpus_f05, f_beta, match_counts, sentence_f05, sentence_f05_with, single_annotator,
    CorpusScore, EditCounts, SentenceF05Convention,
};
pub use fluency::{fluency_report, median, FluencyReport};
pub use stats::{
    average_ranks, bootstrap_significance, pearson, resample_indices, spearman, williams_test,
    WilliamsResult,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("domain error: {0}")]
    Domain(String),
}
