use serde::{Deserialize, Serialize};

use super::ScoreError;
use crate::edits::{EditUnion, LabelVector};

/// Probability floor applied before any product or root.
pub const DEFAULT_PROB_FLOOR: f64 = 1e-9;

/// Inference-time knobs of the combiner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CombinerConfig {
    /// Voting-bias exponent, `0 <= alpha <= 1`.
    pub alpha: f64,
    /// Edit-score exponent, `0 <= beta < 1`.
    pub beta: f64,
    pub beam_size: usize,
    pub prob_floor: f64,
}

impl Default for CombinerConfig {
    fn default() -> Self {
        Self { alpha: 0.4, beta: 0.0, beam_size: 16, prob_floor: DEFAULT_PROB_FLOOR }
    }
}

impl CombinerConfig {
    /// Plain quality score, no biases.
    pub fn unbiased(beam_size: usize) -> Self {
        Self { alpha: 0.0, beta: 0.0, beam_size, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), ScoreError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ScoreError::InvalidConfig(format!("alpha {} not in [0, 1]", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(ScoreError::InvalidConfig(format!("beta {} not in [0, 1)", self.beta)));
        }
        if self.beam_size == 0 {
            return Err(ScoreError::InvalidConfig("beam size must be at least 1".into()));
        }
        if !(self.prob_floor > 0.0 && self.prob_floor < 0.5) {
            return Err(ScoreError::InvalidConfig(format!(
                "probability floor {} not in (0, 0.5)",
                self.prob_floor
            )));
        }
        Ok(())
    }
}

/// Quality `q`, voting score `v`, edit score `es` and the biased score
/// `q_prime = q^(1-beta) * v^alpha * es^beta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub q: f64,
    pub v: f64,
    pub es: f64,
    pub q_prime: f64,
}

impl ScoreBreakdown {
    /// Placeholder for candidates chosen without a scorer.
    pub fn unscored() -> Self {
        Self { q: 1.0, v: 1.0, es: 1.0, q_prime: 1.0 }
    }
}

fn floored_ln(p: f64, floor: f64) -> f64 {
    p.clamp(floor, 1.0).ln()
}

/// Geometric mean of the `m` word and `m + 1` gap probabilities, computed in
/// log space after clamping each entry to `[floor, 1]`.
pub fn aggregate_q(labels: &LabelVector, floor: f64) -> f64 {
    let n = labels.word().len() + labels.gap().len();
    if n == 0 {
        return 1.0;
    }
    let sum: f64 = labels
        .word()
        .iter()
        .chain(labels.gap())
        .map(|&p| floored_ln(p, floor))
        .sum();
    (sum / n as f64).exp()
}

/// Mean fraction of base systems proposing each applied edit. The empty
/// selection scores 1 so that the unedited source carries no penalty.
pub fn voting_score(applied: &[usize], union: &EditUnion) -> f64 {
    if applied.is_empty() {
        return 1.0;
    }
    let c = union.system_count() as f64;
    let total: f64 = applied.iter().map(|&i| union.edits()[i].count() as f64 / c).sum();
    total / applied.len() as f64
}

/// Geometric mean over the whole union of `p_es(e)` for applied edits and
/// `1 - p_es(e)` for skipped ones. An empty union scores 1.
pub fn edit_score(applied: &[usize], union: &EditUnion, floor: f64) -> Result<f64, ScoreError> {
    let edits = union.edits();
    if edits.is_empty() {
        return Ok(1.0);
    }
    let mut mask = vec![false; edits.len()];
    for &i in applied {
        mask[i] = true;
    }
    let mut sum = 0.0;
    for (i, (entry, on)) in edits.iter().zip(mask).enumerate() {
        let p = entry.p_es.ok_or(ScoreError::MissingProbability { index: i })?;
        sum += floored_ln(if on { p } else { 1.0 - p }, floor);
    }
    Ok((sum / edits.len() as f64).exp())
}

/// `q^(1-beta) * v^alpha * es^beta`, evaluated in log space.
pub fn biased_score(q: f64, v: f64, es: f64, config: &CombinerConfig) -> f64 {
    let floor = config.prob_floor;
    let log = (1.0 - config.beta) * floored_ln(q, floor)
        + config.alpha * floored_ln(v, floor)
        + config.beta * floored_ln(es, floor);
    log.exp()
}

/// Full breakdown for a hypothesis realized from `applied` union edits. The
/// edit score is only required (and only computed) when `beta > 0`.
pub fn score_breakdown(
    q: f64,
    applied: &[usize],
    union: &EditUnion,
    config: &CombinerConfig,
) -> Result<ScoreBreakdown, ScoreError> {
    let v = voting_score(applied, union);
    let es = if config.beta > 0.0 || union.has_probabilities() {
        match edit_score(applied, union, config.prob_floor) {
            Ok(es) => es,
            Err(e) if config.beta > 0.0 => return Err(e),
            Err(_) => 1.0,
        }
    } else {
        1.0
    };
    Ok(ScoreBreakdown { q, v, es, q_prime: biased_score(q, v, es, config) })
}
