use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::f05::{corpus_counts, f_beta};
use super::EvalError;
use crate::edits::Edit;
use crate::par::Execution;

/// Ranks starting at 1; tied values share their mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = mean_rank;
        }
        i = j + 1;
    }
    ranks
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(EvalError::DegenerateInput("need at least two observations".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(EvalError::DegenerateInput("constant input".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rank correlation: Pearson correlation of mean-tied ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch { left: x.len(), right: y.len() });
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Paired bootstrap test on corpus F0.5.
///
/// Draws `samples` resamples of sentence indices (with replacement) and
/// returns the fraction in which `b` scores at least as high as `a`; small
/// values support the claim that `a` is better. Resample `i` uses its own
/// ChaCha stream derived from `seed`, so the result is independent of the
/// execution mode.
pub fn bootstrap_significance(
    a: &[Vec<Edit>],
    b: &[Vec<Edit>],
    gold: &[BTreeMap<u32, Vec<Edit>>],
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<f64, EvalError> {
    if a.len() != b.len() || a.len() != gold.len() {
        return Err(EvalError::LengthMismatch { left: a.len(), right: b.len().min(gold.len()) });
    }
    if samples == 0 {
        return Err(EvalError::DegenerateInput("need at least one bootstrap sample".into()));
    }
    if a.is_empty() {
        return Err(EvalError::DegenerateInput("empty corpus".into()));
    }
    let n = a.len();
    let wins = exec.map_range(samples, |i| {
        let idx = resample_indices(n, seed, i as u64);
        let fa = f_beta(corpus_counts(idx.iter().map(|&k| (a[k].as_slice(), &gold[k]))), 0.5).2;
        let fb = f_beta(corpus_counts(idx.iter().map(|&k| (b[k].as_slice(), &gold[k]))), 0.5).2;
        fb >= fa
    });
    Ok(wins.iter().filter(|&&w| w).count() as f64 / samples as f64)
}

/// Indices of bootstrap resample `sample` for a corpus of `n` sentences.
pub fn resample_indices(n: usize, seed: u64, sample: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilliamsResult {
    pub t: f64,
    pub dof: usize,
    /// One-sided p-value of `t` under Student's t with `dof` degrees.
    pub p_value: f64,
}

/// Williams' test for the difference between dependent correlations
/// `r12` and `r13`, which share variable 1, given `r23` and sample size `n`.
pub fn williams_test(r12: f64, r13: f64, r23: f64, n: usize) -> Result<WilliamsResult, EvalError> {
    for r in [r12, r13, r23] {
        if !(-1.0..=1.0).contains(&r) {
            return Err(EvalError::Domain(format!("correlation {r} outside [-1, 1]")));
        }
    }
    if n < 4 {
        return Err(EvalError::Domain(format!("need n >= 4, got {n}")));
    }
    let det = 1.0 - r12 * r12 - r13 * r13 - r23 * r23 + 2.0 * r12 * r13 * r23;
    if det <= 0.0 {
        return Err(EvalError::Domain(format!("correlation matrix determinant {det} <= 0")));
    }
    let nf = n as f64;
    let rbar = (r12 + r13) / 2.0;
    let denom = 2.0 * (nf - 1.0) / (nf - 3.0) * det + rbar * rbar * (1.0 - r23).powi(3);
    let t = (r12 - r13) * ((nf - 1.0) * (1.0 + r23) / denom).sqrt();
    let dof = n - 3;
    let dist = StudentsT::new(0.0, 1.0, dof as f64).map_err(|e| EvalError::Domain(e.to_string()))?;
    Ok(WilliamsResult { t, dof, p_value: 1.0 - dist.cdf(t) })
}
