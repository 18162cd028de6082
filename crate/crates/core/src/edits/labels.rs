use super::{extract_edits, EditError, TokenSeq};

/// Per-word and per-gap label probabilities for a hypothesis of `m` words.
///
/// `word[i]` is the probability that word `i` is correct; `gap[j]` the
/// probability that nothing needs inserting at gap `j`, where gap 0 precedes
/// the first word and gap `j` follows word `j` (1-based).
#[derive(Clone, Debug, PartialEq)]
pub struct LabelVector {
    word: Vec<f64>,
    gap: Vec<f64>,
}

impl LabelVector {
    pub fn new(word: Vec<f64>, gap: Vec<f64>) -> Result<Self, EditError> {
        if gap.len() != word.len() + 1 {
            return Err(EditError::LabelShape { words: word.len(), gaps: gap.len() });
        }
        if let Some(&bad) = word.iter().chain(&gap).find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(EditError::LabelRange(bad));
        }
        Ok(Self { word, gap })
    }

    /// All-ones labels for an `m`-word hypothesis.
    pub fn ones(m: usize) -> Self {
        Self::constant(m, 1.0, 1.0)
    }

    pub fn constant(m: usize, word: f64, gap: f64) -> Self {
        Self { word: vec![word; m], gap: vec![gap; m + 1] }
    }

    pub fn word(&self) -> &[f64] {
        &self.word
    }

    pub fn gap(&self) -> &[f64] {
        &self.gap
    }

    pub fn word_count(&self) -> usize {
        self.word.len()
    }
}

/// Gold labels of `hypothesis` against `reference`.
///
/// Words inside a substitution or deletion span of
/// `extract_edits(hypothesis, reference)` are labelled 0; a pure insertion at
/// hypothesis position `p` labels gap `p` as 0. Everything else is 1.
pub fn derive_labels(hypothesis: &TokenSeq, reference: &TokenSeq) -> LabelVector {
    let mut labels = LabelVector::ones(hypothesis.len());
    for edit in extract_edits(hypothesis, reference) {
        if edit.is_insertion() {
            labels.gap[edit.start()] = 0.0;
        } else {
            for w in &mut labels.word[edit.start()..edit.end()] {
                *w = 0.0;
            }
        }
    }
    labels
}
