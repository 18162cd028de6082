use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::edits::Edit;

/// True positives, false positives and false negatives from exact edit
/// matching.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EditCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Add for EditCounts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { tp: self.tp + o.tp, fp: self.fp + o.fp, fn_: self.fn_ + o.fn_ }
    }
}

impl AddAssign for EditCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

/// Matches edits exactly on `(start, end, replacement)`.
pub fn match_counts(hyp: &[Edit], gold: &[Edit]) -> EditCounts {
    let h: BTreeSet<&Edit> = hyp.iter().collect();
    let g: BTreeSet<&Edit> = gold.iter().collect();
    let tp = h.intersection(&g).count();
    EditCounts { tp, fp: h.len() - tp, fn_: g.len() - tp }
}

/// Precision, recall and F-beta. Empty denominators give precision or
/// recall 1; an empty F denominator gives 0.
pub fn f_beta(counts: EditCounts, beta: f64) -> (f64, f64, f64) {
    let EditCounts { tp, fp, fn_ } = counts;
    let p = if tp + fp == 0 { 1.0 } else { tp as f64 / (tp + fp) as f64 };
    let r = if tp + fn_ == 0 { 1.0 } else { tp as f64 / (tp + fn_) as f64 };
    let b2 = beta * beta;
    let denom = b2 * p + r;
    let f = if denom == 0.0 { 0.0 } else { (1.0 + b2) * p * r / denom };
    (p, r, f)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusScore {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f05: f64,
}

impl CorpusScore {
    pub fn from_counts(counts: EditCounts) -> Self {
        let (precision, recall, f05) = f_beta(counts, 0.5);
        Self { tp: counts.tp, fp: counts.fp, fn_: counts.fn_, precision, recall, f05 }
    }

    pub fn counts(&self) -> EditCounts {
        EditCounts { tp: self.tp, fp: self.fp, fn_: self.fn_ }
    }

    /// Aligned plain-text table.
    pub fn to_table(&self) -> String {
        format!(
            "{:>6} {:>6} {:>6} {:>9} {:>9} {:>9}\n{:>6} {:>6} {:>6} {:>9.4} {:>9.4} {:>9.4}\n",
            "TP", "FP", "FN", "Prec", "Rec", "F0.5", self.tp, self.fp, self.fn_, self.precision,
            self.recall, self.f05
        )
    }
}

/// What a sentence with neither gold nor hypothesis edits scores.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentenceF05Convention {
    pub both_empty: f64,
}

impl Default for SentenceF05Convention {
    fn default() -> Self {
        Self { both_empty: 1.0 }
    }
}

/// Sentence-level F0.5 with the default convention: nothing to fix and
/// nothing changed scores 1; changes with no gold edits score 0.
pub fn sentence_f05(hyp: &[Edit], gold: &[Edit]) -> f64 {
    sentence_f05_with(hyp, gold, SentenceF05Convention::default())
}

pub fn sentence_f05_with(hyp: &[Edit], gold: &[Edit], convention: SentenceF05Convention) -> f64 {
    if hyp.is_empty() && gold.is_empty() {
        return convention.both_empty;
    }
    f_beta(match_counts(hyp, gold), 0.5).2
}

/// Counts for a corpus, choosing per sentence the annotator that maximizes
/// the running corpus F0.5 (ties go to the lowest annotator id).
pub(crate) fn corpus_counts<'a, I>(pairs: I) -> EditCounts
where
    I: IntoIterator<Item = (&'a [Edit], &'a BTreeMap<u32, Vec<Edit>>)>,
{
    let mut total = EditCounts::default();
    for (hyp, annotators) in pairs {
        if annotators.is_empty() {
            total += match_counts(hyp, &[]);
            continue;
        }
        let mut best: Option<(f64, EditCounts)> = None;
        for gold in annotators.values() {
            let c = match_counts(hyp, gold);
            let f = f_beta(total + c, 0.5).2;
            if best.is_none_or(|(bf, _)| f > bf) {
                best = Some((f, c));
            }
        }
        total += best.expect("at least one annotator").1;
    }
    total
}

/// Corpus-level P/R/F0.5 of per-sentence hypothesis edits against per-sentence
/// annotator gold sets.
pub fn corpus_f05(
    hyps: &[Vec<Edit>],
    golds: &[BTreeMap<u32, Vec<Edit>>],
) -> Result<CorpusScore, EvalError> {
    if hyps.len() != golds.len() {
        return Err(EvalError::LengthMismatch { left: hyps.len(), right: golds.len() });
    }
    let counts = corpus_counts(hyps.iter().map(Vec::as_slice).zip(golds));
    Ok(CorpusScore::from_counts(counts))
}

/// Convenience wrapper for single-annotator gold.
pub fn single_annotator(gold: &[Vec<Edit>]) -> Vec<BTreeMap<u32, Vec<Edit>>> {
    gold.iter().map(|g| BTreeMap::from([(0, g.clone())])).collect()
}
