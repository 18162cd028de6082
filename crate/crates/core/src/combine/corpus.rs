use serde::Serialize;

use super::{beam_combine, CombineError, CombineOutcome};
use crate::edits::EditUnion;
use crate::par::Execution;
use crate::scoring::{CombinerConfig, Scorer};

/// One line of the combination report (JSON lines).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CombineRecord {
    pub index: usize,
    pub source: String,
    pub output: String,
    /// Chosen edits as `start end replacement`.
    pub edits: Vec<String>,
    pub q: f64,
    pub v: f64,
    pub es: f64,
    pub q_prime: f64,
    pub union_size: usize,
    pub scored: usize,
    pub final_beam: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SentenceResult {
    pub outcome: CombineOutcome,
    pub record: CombineRecord,
}

/// Runs [`beam_combine`] on every sentence. Results come back in input
/// order whatever the execution mode; the first failing sentence's error
/// is returned.
pub fn combine_corpus(
    unions: &[EditUnion],
    scorer: &dyn Scorer,
    config: &CombinerConfig,
    exec: Execution,
) -> Result<Vec<SentenceResult>, CombineError> {
    let indexed: Vec<(usize, &EditUnion)> = unions.iter().enumerate().collect();
    exec.try_map(&indexed, |&(index, union)| {
        let outcome = beam_combine(union, scorer, config)?;
        let b = outcome.best.breakdown;
        let record = CombineRecord {
            index,
            source: union.source().to_string(),
            output: outcome.best.realized.to_string(),
            edits: outcome.best.edits(union).map(|e| e.to_string()).collect(),
            q: b.q,
            v: b.v,
            es: b.es,
            q_prime: b.q_prime,
            union_size: union.len(),
            scored: outcome.stats.scored,
            final_beam: outcome.stats.final_beam,
        };
        Ok(SentenceResult { outcome, record })
    })
}
