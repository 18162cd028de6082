use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::edits::TokenSeq;
use crate::par::Execution;
use crate::scoring::LanguageModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluencyReport {
    pub median_perplexity: f64,
    pub sentences: usize,
    pub perplexities: Vec<f64>,
}

/// Median of a non-empty sample; even sizes average the middle pair.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) { (v[mid - 1] + v[mid]) / 2.0 } else { v[mid] })
}

/// Per-sentence perplexity under `lm` and its corpus median.
pub fn fluency_report<L: LanguageModel + ?Sized>(
    corpus: &[TokenSeq],
    lm: &L,
    exec: Execution,
) -> Result<FluencyReport, EvalError> {
    let perplexities = exec.map(corpus, |s| lm.perplexity(s));
    let median_perplexity =
        median(&perplexities).ok_or_else(|| EvalError::DegenerateInput("empty corpus".into()))?;
    Ok(FluencyReport { median_perplexity, sentences: corpus.len(), perplexities })
}
