use std::collections::HashMap;

use super::{aggregate_q, ScoreError};
use crate::edits::{extract_edits, Edit, LabelVector, TokenSeq};
use crate::eval::{match_counts, sentence_f05};

/// What a scorer returns for one `(source, hypothesis)` pair.
#[derive(Clone, Debug, PartialEq)]
pub enum ScorerOutput {
    /// Token-level word and gap probabilities.
    Labels(LabelVector),
    /// Sentence-level quality in `(0, 1]`.
    Sentence(f64),
}

impl ScorerOutput {
    /// Sentence quality `Q`: labels are aggregated with [`aggregate_q`],
    /// sentence scores are clamped to `[floor, 1]`.
    pub fn quality(&self, floor: f64) -> f64 {
        match self {
            ScorerOutput::Labels(labels) => aggregate_q(labels, floor),
            ScorerOutput::Sentence(q) => q.clamp(floor, 1.0),
        }
    }
}

/// A quality-estimation model.
///
/// Implementations must be deterministic for fixed inputs and usable from
/// many threads at once. Token-level outputs must have one word probability
/// per hypothesis token and one more gap probability.
pub trait Scorer: Send + Sync {
    fn name(&self) -> &str;

    fn score(&self, source: &TokenSeq, hypothesis: &TokenSeq) -> Result<ScorerOutput, ScoreError>;

    /// Scores several pairs at once; remote scorers override this to
    /// amortize round trips.
    fn score_batch(
        &self,
        pairs: &[(&TokenSeq, &TokenSeq)],
    ) -> Result<Vec<ScorerOutput>, ScoreError> {
        pairs.iter().map(|(s, h)| self.score(s, h)).collect()
    }

    fn quality_batch(
        &self,
        pairs: &[(&TokenSeq, &TokenSeq)],
        floor: f64,
    ) -> Result<Vec<f64>, ScoreError> {
        let outputs = self.score_batch(pairs)?;
        if outputs.len() != pairs.len() {
            return Err(ScoreError::Protocol(format!(
                "{} outputs for {} requests",
                outputs.len(),
                pairs.len()
            )));
        }
        for (out, (_, hyp)) in outputs.iter().zip(pairs) {
            check_shape(out, hyp)?;
        }
        Ok(outputs.iter().map(|o| o.quality(floor)).collect())
    }
}

pub(crate) fn check_shape(out: &ScorerOutput, hypothesis: &TokenSeq) -> Result<(), ScoreError> {
    if let ScorerOutput::Labels(l) = out {
        if l.word_count() != hypothesis.len() {
            return Err(ScoreError::Shape { expected: hypothesis.len(), got: l.word_count() });
        }
    }
    Ok(())
}

impl<S: Scorer + ?Sized> Scorer for Box<S> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn score(&self, source: &TokenSeq, hypothesis: &TokenSeq) -> Result<ScorerOutput, ScoreError> {
        (**self).score(source, hypothesis)
    }
    fn score_batch(&self, pairs: &[(&TokenSeq, &TokenSeq)]) -> Result<Vec<ScorerOutput>, ScoreError> {
        (**self).score_batch(pairs)
    }
}

impl<S: Scorer + ?Sized> Scorer for std::sync::Arc<S> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn score(&self, source: &TokenSeq, hypothesis: &TokenSeq) -> Result<ScorerOutput, ScoreError> {
        (**self).score(source, hypothesis)
    }
    fn score_batch(&self, pairs: &[(&TokenSeq, &TokenSeq)]) -> Result<Vec<ScorerOutput>, ScoreError> {
        (**self).score_batch(pairs)
    }
}

/// Labels every word and gap 0.5, so `Q = 0.5` for any pair.
#[derive(Clone, Copy, Debug, Default)]
pub struct UniformScorer;

impl Scorer for UniformScorer {
    fn name(&self) -> &str {
        "uniform"
    }

    fn score(&self, _source: &TokenSeq, hypothesis: &TokenSeq) -> Result<ScorerOutput, ScoreError> {
        Ok(ScorerOutput::Labels(LabelVector::constant(hypothesis.len(), 0.5, 0.5)))
    }
}

/// Scores a hypothesis by its sentence F0.5 against hidden references.
///
/// Hypotheses with F0.5 = 0 are ordered below `floor` by their false-positive
/// count (`floor / (1 + fp)`), which keeps the scorer strictly monotone in
/// both correct and wrong edits. Only meaningful for tests and upper-bound
/// experiments.
#[derive(Clone, Debug)]
pub struct ReferenceOracleScorer {
    gold: HashMap<TokenSeq, Vec<Vec<Edit>>>,
    floor: f64,
}

impl ReferenceOracleScorer {
    /// Large enough that `floor / (1 + fp)` stays above the combiner's
    /// probability floor for any realistic false-positive count.
    pub const DEFAULT_FLOOR: f64 = 1e-3;

    pub fn new(floor: f64) -> Self {
        Self { gold: HashMap::new(), floor }
    }

    /// Registers a reference correction for `source`.
    pub fn add_reference(&mut self, source: TokenSeq, reference: &TokenSeq) {
        let edits = extract_edits(&source, reference);
        self.gold.entry(source).or_default().push(edits);
    }

    /// Registers one gold edit set (one annotator) for `source`.
    pub fn add_gold_edits(&mut self, source: TokenSeq, edits: Vec<Edit>) {
        self.gold.entry(source).or_default().push(edits);
    }

    pub fn from_references<'a, I>(pairs: I, floor: f64) -> Self
    where
        I: IntoIterator<Item = (&'a TokenSeq, &'a TokenSeq)>,
    {
        let mut s = Self::new(floor);
        for (src, reference) in pairs {
            s.add_reference(src.clone(), reference);
        }
        s
    }

    pub fn quality_of_edits(&self, source: &TokenSeq, hyp_edits: &[Edit]) -> Result<f64, ScoreError> {
        let annotators = self.gold.get(source).ok_or(ScoreError::UnknownSource)?;
        let mut best = 0.0f64;
        for gold in annotators {
            let f = sentence_f05(hyp_edits, gold);
            let q = if f > 0.0 {
                f.max(self.floor)
            } else {
                self.floor / (1.0 + match_counts(hyp_edits, gold).fp as f64)
            };
            best = best.max(q);
        }
        Ok(best)
    }
}

impl Scorer for ReferenceOracleScorer {
    fn name(&self) -> &str {
        "oracle"
    }

    fn score(&self, source: &TokenSeq, hypothesis: &TokenSeq) -> Result<ScorerOutput, ScoreError> {
        let edits = extract_edits(source, hypothesis);
        self.quality_of_edits(source, &edits).map(ScorerOutput::Sentence)
    }
}
