use super::{sigmoid, TrainConfig, TrainError};

/// Clamp applied to predicted probabilities inside the cross-entropy terms.
pub const LOSS_EPS: f64 = 1e-12;

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Weighted mean binary cross-entropy and its gradient with respect to
/// `pred`. Predictions are clamped to `[LOSS_EPS, 1 - LOSS_EPS]`; the
/// gradient is taken at the clamped point. Weights are normalized by their
/// sum.
pub fn weighted_bce(pred: &[f64], gold: &[f64], weights: &[f64]) -> Result<(f64, Vec<f64>), TrainError> {
    if gold.len() != pred.len() {
        return Err(TrainError::Shape { expected: pred.len(), got: gold.len() });
    }
    if weights.len() != pred.len() {
        return Err(TrainError::Shape { expected: pred.len(), got: weights.len() });
    }
    let total: f64 = weights.iter().sum();
    if pred.is_empty() || total <= 0.0 {
        return Ok((0.0, vec![0.0; pred.len()]));
    }
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(pred.len());
    for ((&p, &y), &w) in pred.iter().zip(gold).zip(weights) {
        let p = p.clamp(LOSS_EPS, 1.0 - LOSS_EPS);
        let w = w / total;
        loss -= w * (y * p.ln() + (1.0 - y) * (1.0 - p).ln());
        grad.push(w * (-(y / p) + (1.0 - y) / (1.0 - p)));
    }
    Ok((loss, grad))
}

/// Word-label loss over the `m` hypothesis words.
pub fn word_loss(pred: &[f64], gold: &[f64], weights: &[f64]) -> Result<f64, TrainError> {
    weighted_bce(pred, gold, weights).map(|(l, _)| l)
}

/// Gap-label loss over the `m + 1` gaps.
pub fn gap_loss(pred: &[f64], gold: &[f64], weights: &[f64]) -> Result<f64, TrainError> {
    weighted_bce(pred, gold, weights).map(|(l, _)| l)
}

/// Pairwise ranking loss over `(q, target)` members of one group: the sum,
/// over ordered pairs with `target_v > target_u`, of
/// `ln(1 + exp(-sigma * (q_v - q_u) * mu))`. Returns the loss and its
/// gradient with respect to each `q`.
pub fn rank_loss(group: &[(f64, f64)], sigma: f64, mu: f64) -> (f64, Vec<f64>) {
    let mut loss = 0.0;
    let mut grad = vec![0.0; group.len()];
    let scale = sigma * mu;
    for (v, &(qv, yv)) in group.iter().enumerate() {
        for (u, &(qu, yu)) in group.iter().enumerate() {
            if yv > yu {
                let x = -scale * (qv - qu);
                loss += softplus(x);
                let d = scale * sigmoid(x);
                grad[v] -= d;
                grad[u] += d;
            }
        }
    }
    (loss, grad)
}

/// Number of pairs `rank_loss` counts for the given targets.
pub fn rank_pair_count(targets: &[f64]) -> usize {
    targets
        .iter()
        .map(|a| targets.iter().filter(|b| a > *b).count())
        .sum()
}

/// Geometric-mean quality of word and gap predictions and its gradient.
/// Entries at or below `floor` are clamped and receive zero gradient.
pub fn quality_with_grad(word: &[f64], gap: &[f64], floor: f64) -> (f64, Vec<f64>, Vec<f64>) {
    let n = (word.len() + gap.len()) as f64;
    if n == 0.0 {
        return (1.0, Vec::new(), Vec::new());
    }
    let log: f64 = word.iter().chain(gap).map(|&p| p.clamp(floor, 1.0).ln()).sum::<f64>() / n;
    let q = log.exp();
    let d = |p: f64| if p > floor && p <= 1.0 { q / (n * p) } else { 0.0 };
    (q, word.iter().map(|&p| d(p)).collect(), gap.iter().map(|&p| d(p)).collect())
}

/// One training instance as seen by the loss.
#[derive(Clone, Copy, Debug)]
pub struct LossInstance<'a> {
    pub word_pred: &'a [f64],
    pub gap_pred: &'a [f64],
    pub word_gold: &'a [f64],
    pub gap_gold: &'a [f64],
    pub word_weights: &'a [f64],
    pub gap_weights: &'a [f64],
    /// Sentence-level target used for ranking.
    pub target: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossTerms {
    pub word: f64,
    pub gap: f64,
    pub rank: f64,
    pub total: f64,
}

/// Gradient of the total loss with respect to one instance's predictions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InstanceGrad {
    pub word: Vec<f64>,
    pub gap: Vec<f64>,
}

/// Mean word loss plus mean gap loss over every instance in the batch, plus
/// `gamma` times the rank loss summed over groups. Qualities for ranking
/// are the geometric means of each instance's predictions.
pub fn total_loss(
    groups: &[Vec<LossInstance<'_>>],
    config: &TrainConfig,
    floor: f64,
) -> Result<(LossTerms, Vec<Vec<InstanceGrad>>), TrainError> {
    let n: usize = groups.iter().map(Vec::len).sum();
    if n == 0 {
        return Err(TrainError::EmptyCorpus);
    }
    let inv = 1.0 / n as f64;
    let mut terms = LossTerms::default();
    let mut grads = Vec::with_capacity(groups.len());
    for group in groups {
        let mut group_grads = Vec::with_capacity(group.len());
        let mut ranked = Vec::with_capacity(group.len());
        let mut q_grads = Vec::with_capacity(group.len());
        for inst in group {
            let (lw, gw) = weighted_bce(inst.word_pred, inst.word_gold, inst.word_weights)?;
            let (lg, gg) = weighted_bce(inst.gap_pred, inst.gap_gold, inst.gap_weights)?;
            terms.word += lw * inv;
            terms.gap += lg * inv;
            group_grads.push(InstanceGrad {
                word: gw.into_iter().map(|g| g * inv).collect(),
                gap: gg.into_iter().map(|g| g * inv).collect(),
            });
            let (q, dqw, dqg) = quality_with_grad(inst.word_pred, inst.gap_pred, floor);
            ranked.push((q, inst.target));
            q_grads.push((dqw, dqg));
        }
        if config.gamma > 0.0 {
            let (lr, dq) = rank_loss(&ranked, config.sigma_r, config.mu);
            terms.rank += lr;
            for ((g, (dqw, dqg)), d) in group_grads.iter_mut().zip(&q_grads).zip(dq) {
                let s = config.gamma * d;
                g.word.iter_mut().zip(dqw).for_each(|(a, b)| *a += s * b);
                g.gap.iter_mut().zip(dqg).for_each(|(a, b)| *a += s * b);
            }
        }
        grads.push(group_grads);
    }
    terms.total = terms.word + terms.gap + config.gamma * terms.rank;
    Ok((terms, grads))
}
