use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::edits::{derive_labels, extract_edits, LabelVector, TokenSeq};
use crate::eval::sentence_f05;

/// A hypothesis with its gold labels and sentence-level F0.5 against the
/// reference.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingExample {
    pub source: TokenSeq,
    pub hypothesis: TokenSeq,
    pub labels: LabelVector,
    pub f05: f64,
    /// Whether the hypothesis is unchanged from the source.
    pub unedited: bool,
    /// Whether the hypothesis equals the reference.
    pub perfect: bool,
}

impl TrainingExample {
    pub fn new(source: TokenSeq, hypothesis: TokenSeq, reference: &TokenSeq) -> Self {
        let labels = derive_labels(&hypothesis, reference);
        let f05 = sentence_f05(&extract_edits(&source, &hypothesis), &extract_edits(&source, reference));
        let unedited = hypothesis == source;
        let perfect = &hypothesis == reference;
        Self { source, hypothesis, labels, f05, unedited, perfect }
    }

    /// Kept for training: has edits and is not already the reference.
    pub fn is_informative(&self) -> bool {
        !self.unedited && !self.perfect
    }
}

/// Members ranked against each other by the rank loss. `source` is the
/// source shared by the majority of members.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedGroup {
    pub source: TokenSeq,
    pub members: Vec<TrainingExample>,
}

impl RankedGroup {
    /// Members whose source is the group's source.
    pub fn dominant_count(&self) -> usize {
        self.members.iter().filter(|m| m.source == self.source).count()
    }
}

/// Filters out unedited and perfect hypotheses and groups the rest into
/// groups of at most `n`.
///
/// Sources are visited in a seeded shuffled order and each contributes
/// full groups of `n`. Leftovers are then packed: the largest remaining
/// block anchors a group that is topped up from the smallest blocks to at
/// most `min(n, 2 * anchor)` members, so the anchor source always holds at
/// least half of every group.
pub fn build_groups(examples: Vec<TrainingExample>, n: usize, seed: u64) -> Vec<RankedGroup> {
    let n = n.max(1);
    let mut order: Vec<TokenSeq> = Vec::new();
    let mut by_source: HashMap<TokenSeq, Vec<TrainingExample>> = HashMap::new();
    for ex in examples.into_iter().filter(TrainingExample::is_informative) {
        let entry = by_source.entry(ex.source.clone()).or_default();
        if entry.is_empty() {
            order.push(ex.source.clone());
        }
        entry.push(ex);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let mut groups = Vec::new();
    let mut leftovers: Vec<Vec<TrainingExample>> = Vec::new();
    for source in order {
        let mut members = by_source.remove(&source).unwrap_or_default();
        let tail = members.len() % n;
        let rest = members.split_off(members.len() - tail);
        let mut it = members.into_iter().peekable();
        while it.peek().is_some() {
            groups.push(RankedGroup { source: source.clone(), members: it.by_ref().take(n).collect() });
        }
        if !rest.is_empty() {
            leftovers.push(rest);
        }
    }

    // Stable sort keeps the shuffled order among equal sizes.
    leftovers.sort_by_key(|b| std::cmp::Reverse(b.len()));
    while !leftovers.is_empty() {
        let anchor = leftovers.remove(0);
        let cap = n.min(2 * anchor.len());
        let source = anchor[0].source.clone();
        let mut members = anchor;
        while members.len() < cap {
            let Some(smallest) = leftovers.last_mut() else { break };
            members.push(smallest.pop().expect("blocks are non-empty"));
            if smallest.is_empty() {
                leftovers.pop();
            }
        }
        groups.push(RankedGroup { source, members });
        leftovers.sort_by_key(|b| std::cmp::Reverse(b.len()));
    }
    groups
}
