//! Beam-search combination of base-system edits, its exhaustive reference,
//! re-ranking and the gold-edit oracle.

mod beam;
mod corpus;

use thiserror::Error;

pub use beam::{
    beam_combine, brute_force_combine, candidate_order, conflict_free_subsets, oracle_combine, rerank,
    BeamStats, Candidate, CombineOutcome, RerankOutcome, BRUTE_FORCE_CAP,
};
pub use corpus::{combine_corpus, CombineRecord, SentenceResult};

use crate::scoring::ScoreError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CombineError {
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("{count} edits exceed the exhaustive-search cap of {cap}")]
    TooManyEdits { count: usize, cap: usize },
}
