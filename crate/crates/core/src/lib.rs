//! Grammatical error correction system combination driven by quality
//! estimation.
//!
//! Base-system hypotheses are reduced to token-level edits against the
//! source, pooled into an edit union, and recombined by a beam search that
//! ranks candidate corrections with a quality-estimation scorer, optionally
//! biased toward edits many systems agree on or that an edit classifier
//! trusts.

pub mod combine;
pub mod edits;
pub mod eval;
pub mod par;
pub mod scoring;
pub mod synth;
pub mod training;
