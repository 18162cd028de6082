//! Tokens, edits and their extraction, application and conflicts; edit
//! unions; gold word/gap labels; M2 I/O.

mod align;
mod edit;
mod labels;
pub mod m2;
mod tokens;
mod union;

use thiserror::Error;

pub use align::extract_edits;
pub use edit::{
    apply_edit, apply_edits, conflicts, is_conflict_free, Category, Edit, EditType, Operation,
};
pub use labels::{derive_labels, LabelVector};
pub use m2::{emit_m2, parse_m2, M2Annotation, M2Error, M2Sentence};
pub use tokens::{tokenize, TokenSeq};
pub use union::{EditUnion, UnionEdit};

pub(crate) use edit::is_punct;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EditError {
    #[error("invalid token {0:?}")]
    InvalidToken(String),
    #[error("invalid span: start {start} > end {end}")]
    InvalidSpan { start: usize, end: usize },
    #[error("insertion at {start} has no content")]
    EmptyInsertion { start: usize },
    #[error("edit ({start}, {end}) does not change the sentence")]
    NoOp { start: usize, end: usize },
    #[error("edit end {end} out of range for sentence of {len} tokens")]
    IndexOutOfRange { end: usize, len: usize },
    #[error("edits {first} and {second} conflict")]
    Conflict { first: Edit, second: Edit },
    #[error("label shape mismatch: {words} words but {gaps} gaps")]
    LabelShape { words: usize, gaps: usize },
    #[error("label probability {0} outside [0, 1]")]
    LabelRange(f64),
}
