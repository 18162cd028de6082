use std::cmp::Ordering;

use serde::Serialize;

use super::CombineError;
use crate::edits::{apply_edits, conflicts, Edit, EditUnion, TokenSeq};
use crate::scoring::{score_breakdown, CombinerConfig, ScoreBreakdown, Scorer};

/// A hypothesis realized from a conflict-free subset of union edits.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    /// Increasing indices into the union's edits, in the order applied.
    pub applied: Vec<usize>,
    pub realized: TokenSeq,
    pub breakdown: ScoreBreakdown,
}

impl Candidate {
    pub fn edits<'a>(&'a self, union: &'a EditUnion) -> impl Iterator<Item = &'a Edit> + 'a {
        self.applied.iter().map(move |&i| union.edit(i))
    }
}

/// Candidate order: higher `q_prime` first, then fewer applied edits, then
/// the lexicographically smaller index sequence.
pub fn candidate_order(a: &Candidate, b: &Candidate) -> Ordering {
    b.breakdown
        .q_prime
        .total_cmp(&a.breakdown.q_prime)
        .then(a.applied.len().cmp(&b.applied.len()))
        .then_with(|| a.applied.cmp(&b.applied))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BeamStats {
    /// Hypotheses sent to the scorer, including the source.
    pub scored: usize,
    /// Candidates left in the final beam.
    pub final_beam: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CombineOutcome {
    pub best: Candidate,
    pub stats: BeamStats,
}

fn realize(union: &EditUnion, applied: &[usize]) -> TokenSeq {
    apply_edits(union.source(), applied.iter().map(|&i| union.edit(i)))
        .expect("candidates only hold conflict-free edits")
}

/// Scores realized hypotheses in one scorer batch.
fn score_all(
    union: &EditUnion,
    scorer: &dyn Scorer,
    config: &CombinerConfig,
    pending: Vec<(Vec<usize>, TokenSeq)>,
) -> Result<Vec<Candidate>, CombineError> {
    let pairs: Vec<(&TokenSeq, &TokenSeq)> = pending.iter().map(|(_, h)| (union.source(), h)).collect();
    let qs = scorer.quality_batch(&pairs, config.prob_floor)?;
    pending
        .into_iter()
        .zip(qs)
        .map(|((applied, realized), q)| {
            let breakdown = score_breakdown(q, &applied, union, config)?;
            Ok(Candidate { applied, realized, breakdown })
        })
        .collect()
}

/// Beam search over the union's edits in sorted order.
///
/// The beam starts with the bare source. At each edit every beam candidate
/// that does not conflict with it is extended; the new hypotheses are
/// scored in one batch, merged with the beam and trimmed to the top
/// `beam_size` by [`candidate_order`]. At most `beam_size * |union| + 1`
/// hypotheses are scored.
pub fn beam_combine(
    union: &EditUnion,
    scorer: &dyn Scorer,
    config: &CombinerConfig,
) -> Result<CombineOutcome, CombineError> {
    config.validate()?;
    let mut beam = score_all(union, scorer, config, vec![(Vec::new(), union.source().clone())])?;
    let mut scored = 1;
    for i in 0..union.len() {
        let edit = union.edit(i);
        let pending: Vec<(Vec<usize>, TokenSeq)> = beam
            .iter()
            .filter(|c| c.applied.iter().all(|&j| !conflicts(union.edit(j), edit)))
            .map(|c| {
                let mut applied = c.applied.clone();
                applied.push(i);
                let realized = realize(union, &applied);
                (applied, realized)
            })
            .collect();
        if pending.is_empty() {
            continue;
        }
        scored += pending.len();
        beam.extend(score_all(union, scorer, config, pending)?);
        beam.sort_by(candidate_order);
        beam.truncate(config.beam_size);
    }
    let stats = BeamStats { scored, final_beam: beam.len() };
    Ok(CombineOutcome { best: beam.swap_remove(0), stats })
}

/// Edit-count cap of [`brute_force_combine`].
pub const BRUTE_FORCE_CAP: usize = 20;

/// Every conflict-free subset of the union as increasing index lists,
/// starting with the empty set.
pub fn conflict_free_subsets(union: &EditUnion) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for i in 0..union.len() {
        let edit = union.edit(i);
        let extended: Vec<Vec<usize>> = out
            .iter()
            .filter(|s| s.iter().all(|&j| !conflicts(union.edit(j), edit)))
            .map(|s| {
                let mut s = s.clone();
                s.push(i);
                s
            })
            .collect();
        out.extend(extended);
    }
    out
}

/// Scores every conflict-free subset and returns the best by
/// [`candidate_order`].
pub fn brute_force_combine(
    union: &EditUnion,
    scorer: &dyn Scorer,
    config: &CombinerConfig,
) -> Result<CombineOutcome, CombineError> {
    config.validate()?;
    if union.len() > BRUTE_FORCE_CAP {
        return Err(CombineError::TooManyEdits { count: union.len(), cap: BRUTE_FORCE_CAP });
    }
    let pending: Vec<(Vec<usize>, TokenSeq)> = conflict_free_subsets(union)
        .into_iter()
        .map(|s| {
            let realized = realize(union, &s);
            (s, realized)
        })
        .collect();
    let scored = pending.len();
    let mut all = score_all(union, scorer, config, pending)?;
    all.sort_by(candidate_order);
    let stats = BeamStats { scored, final_beam: all.len() };
    Ok(CombineOutcome { best: all.swap_remove(0), stats })
}

/// Applies exactly the union edits that are gold, dropping any gold edit
/// that conflicts with an earlier kept one.
pub fn oracle_combine(union: &EditUnion, gold: &[Edit]) -> Candidate {
    let mut hits: Vec<usize> = gold.iter().filter_map(|g| union.position(g)).collect();
    hits.sort_unstable();
    hits.dedup();
    let mut applied: Vec<usize> = Vec::with_capacity(hits.len());
    for i in hits {
        if applied.iter().all(|&j| !conflicts(union.edit(j), union.edit(i))) {
            applied.push(i);
        }
    }
    let realized = realize(union, &applied);
    Candidate { applied, realized, breakdown: ScoreBreakdown::unscored() }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RerankOutcome {
    /// Index into the hypothesis list; equal to its length when the source
    /// itself won.
    pub index: usize,
    pub hypothesis: TokenSeq,
    pub q: f64,
}

/// Picks the hypothesis with the highest quality, the source included as a
/// final candidate. Ties go to fewer edits against the source, then to the
/// earlier list position.
pub fn rerank(
    source: &TokenSeq,
    hypotheses: &[TokenSeq],
    scorer: &dyn Scorer,
    floor: f64,
) -> Result<RerankOutcome, CombineError> {
    let mut candidates: Vec<&TokenSeq> = hypotheses.iter().collect();
    candidates.push(source);
    let pairs: Vec<(&TokenSeq, &TokenSeq)> = candidates.iter().map(|h| (source, *h)).collect();
    let qs = scorer.quality_batch(&pairs, floor)?;
    let edit_counts: Vec<usize> =
        candidates.iter().map(|h| crate::edits::extract_edits(source, h).len()).collect();
    let index = (0..candidates.len())
        .min_by(|&a, &b| qs[b].total_cmp(&qs[a]).then(edit_counts[a].cmp(&edit_counts[b])).then(a.cmp(&b)))
        .expect("source is always a candidate");
    Ok(RerankOutcome { index, hypothesis: candidates[index].clone(), q: qs[index] })
}
