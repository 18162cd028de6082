use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::groups::{build_groups, TrainingExample};
use super::losses::{total_loss, LossInstance, LossTerms};
use super::{sigmoid, TrainConfig, TrainError};
use crate::edits::{extract_edits, is_punct, LabelVector, TokenSeq};
use crate::scoring::{NgramLm, ScoreError, Scorer, ScorerOutput, DEFAULT_PROB_FLOOR};

/// Feature layout of the token labeler. Artifacts built for a different
/// layout are rejected.
pub const LABELER_SCHEMA: &str = "token-labeler/1 \
word=[lm,freq0,freq1,freq2,freq3,changed,punct,upper,bias] \
gap=[lm,changed,prev_punct,next_punct,edge,bias]";
pub const WORD_FEATURES: usize = 9;
pub const GAP_FEATURES: usize = 6;

/// Per-word and per-gap feature vectors of one hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct TokenFeatures {
    pub word: Vec<Vec<f64>>,
    pub gap: Vec<Vec<f64>>,
    /// Words and gaps touched by the source-to-hypothesis edits.
    pub word_changed: Vec<bool>,
    pub gap_changed: Vec<bool>,
}

fn freq_bucket(count: u64) -> usize {
    match count {
        0 => 0,
        1..=2 => 1,
        3..=20 => 2,
        _ => 3,
    }
}

/// Marks hypothesis words inside a changed span and the gaps at or around
/// each change.
pub fn changed_positions(source: &TokenSeq, hypothesis: &TokenSeq) -> (Vec<bool>, Vec<bool>) {
    let m = hypothesis.len();
    let mut words = vec![false; m];
    let mut gaps = vec![false; m + 1];
    // Edits taking the hypothesis back to the source, in hypothesis coordinates.
    for e in extract_edits(hypothesis, source) {
        gaps[e.start()] = true;
        gaps[e.end()] = true;
        for w in &mut words[e.start()..e.end()] {
            *w = true;
        }
    }
    (words, gaps)
}

/// Computes labeler features from an n-gram model and the source.
pub fn featurize(lm: &NgramLm, source: &TokenSeq, hypothesis: &TokenSeq) -> TokenFeatures {
    let m = hypothesis.len();
    let token_p = lm.token_probs(hypothesis);
    let gap_p = lm.gap_probs(hypothesis);
    let (word_changed, gap_changed) = changed_positions(source, hypothesis);
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    let word = (0..m)
        .map(|i| {
            let tok = &hypothesis.tokens()[i];
            let mut x = vec![0.0; WORD_FEATURES];
            x[0] = token_p[i].max(DEFAULT_PROB_FLOOR).ln() / 10.0;
            x[1 + freq_bucket(lm.count(tok))] = 1.0;
            x[5] = flag(word_changed[i]);
            x[6] = flag(is_punct(tok));
            x[7] = flag(i > 0 && tok.chars().next().is_some_and(char::is_uppercase));
            x[8] = 1.0;
            x
        })
        .collect();
    let punct_at = |i: usize| hypothesis.get(i).is_some_and(is_punct);
    let gap = (0..=m)
        .map(|j| {
            vec![
                gap_p[j].max(DEFAULT_PROB_FLOOR).ln() / 10.0,
                flag(gap_changed[j]),
                flag(j > 0 && punct_at(j - 1)),
                flag(punct_at(j)),
                flag(j == 0 || j == m),
                1.0,
            ]
        })
        .collect();
    TokenFeatures { word, gap, word_changed, gap_changed }
}

/// A training instance in feature space.
#[derive(Clone, Debug, PartialEq)]
pub struct FeaturizedExample {
    pub word_x: Vec<Vec<f64>>,
    pub gap_x: Vec<Vec<f64>>,
    pub labels: LabelVector,
    pub word_weights: Vec<f64>,
    pub gap_weights: Vec<f64>,
    pub target: f64,
}

impl FeaturizedExample {
    /// Changed words and gaps carry weight `z`, everything else 1.
    pub fn from_example(lm: &NgramLm, ex: &TrainingExample, z: f64) -> Self {
        let f = featurize(lm, &ex.source, &ex.hypothesis);
        let w = |c: &bool| if *c { z } else { 1.0 };
        Self {
            word_weights: f.word_changed.iter().map(w).collect(),
            gap_weights: f.gap_changed.iter().map(w).collect(),
            word_x: f.word,
            gap_x: f.gap,
            labels: ex.labels.clone(),
            target: ex.f05,
        }
    }
}

/// Two independent logistic models, one for words and one for gaps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticLabeler {
    pub word_weights: Vec<f64>,
    pub gap_weights: Vec<f64>,
}

fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

impl LogisticLabeler {
    pub fn zeros(word_dim: usize, gap_dim: usize) -> Self {
        Self { word_weights: vec![0.0; word_dim], gap_weights: vec![0.0; gap_dim] }
    }

    /// Word weights followed by gap weights.
    pub fn params(&self) -> Vec<f64> {
        self.word_weights.iter().chain(&self.gap_weights).copied().collect()
    }

    pub fn set_params(&mut self, params: &[f64]) {
        let (w, g) = params.split_at(self.word_weights.len());
        self.word_weights.copy_from_slice(w);
        self.gap_weights.copy_from_slice(g);
    }

    pub fn predict(&self, word_x: &[Vec<f64>], gap_x: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
        (
            word_x.iter().map(|x| sigmoid(dot(&self.word_weights, x))).collect(),
            gap_x.iter().map(|x| sigmoid(dot(&self.gap_weights, x))).collect(),
        )
    }

    /// Total loss over `groups` and its gradient with respect to the
    /// weights (word weights first, then gap weights).
    pub fn loss_and_grad(
        &self,
        groups: &[Vec<FeaturizedExample>],
        config: &TrainConfig,
    ) -> Result<(LossTerms, Vec<f64>), TrainError> {
        let preds: Vec<Vec<(Vec<f64>, Vec<f64>)>> = groups
            .iter()
            .map(|g| g.iter().map(|ex| self.predict(&ex.word_x, &ex.gap_x)).collect())
            .collect();
        let instances: Vec<Vec<LossInstance<'_>>> = groups
            .iter()
            .zip(&preds)
            .map(|(g, p)| {
                g.iter()
                    .zip(p)
                    .map(|(ex, (wp, gp))| LossInstance {
                        word_pred: wp,
                        gap_pred: gp,
                        word_gold: ex.labels.word(),
                        gap_gold: ex.labels.gap(),
                        word_weights: &ex.word_weights,
                        gap_weights: &ex.gap_weights,
                        target: ex.target,
                    })
                    .collect()
            })
            .collect();
        let (terms, pred_grads) = total_loss(&instances, config, DEFAULT_PROB_FLOOR)?;
        let dw = self.word_weights.len();
        let mut grad = vec![0.0; dw + self.gap_weights.len()];
        for ((group, preds), grads) in groups.iter().zip(&preds).zip(&pred_grads) {
            for ((ex, (wp, gp)), g) in group.iter().zip(preds).zip(grads) {
                for ((x, p), d) in ex.word_x.iter().zip(wp).zip(&g.word) {
                    let s = d * p * (1.0 - p);
                    grad[..dw].iter_mut().zip(x).for_each(|(a, b)| *a += s * b);
                }
                for ((x, p), d) in ex.gap_x.iter().zip(gp).zip(&g.gap) {
                    let s = d * p * (1.0 - p);
                    grad[dw..].iter_mut().zip(x).for_each(|(a, b)| *a += s * b);
                }
            }
        }
        Ok((terms, grad))
    }

    /// Full-batch gradient descent from the current weights. Returns the
    /// total loss before each epoch followed by the final loss.
    pub fn fit(
        &mut self,
        groups: &[Vec<FeaturizedExample>],
        config: &TrainConfig,
    ) -> Result<Vec<f64>, TrainError> {
        if groups.iter().all(Vec::is_empty) {
            return Err(TrainError::EmptyCorpus);
        }
        let mut curve = Vec::with_capacity(config.epochs + 1);
        for _ in 0..config.epochs {
            let (terms, grad) = self.loss_and_grad(groups, config)?;
            curve.push(terms.total);
            for (w, g) in self.word_weights.iter_mut().chain(self.gap_weights.iter_mut()).zip(&grad) {
                *w -= config.learning_rate * g;
            }
        }
        curve.push(self.loss_and_grad(groups, config)?.0.total);
        Ok(curve)
    }
}

/// A trained token labeler: n-gram features plus logistic weights. Usable
/// directly as a token-level [`Scorer`].
#[derive(Clone, Debug)]
pub struct TokenLabeler {
    lm: Arc<NgramLm>,
    model: LogisticLabeler,
    config: TrainConfig,
}

#[derive(Serialize, Deserialize)]
struct LabelerArtifact {
    schema: String,
    config: TrainConfig,
    model: LogisticLabeler,
    lm: String,
}

impl TokenLabeler {
    pub fn new(lm: Arc<NgramLm>, model: LogisticLabeler, config: TrainConfig) -> Result<Self, TrainError> {
        if model.word_weights.len() != WORD_FEATURES || model.gap_weights.len() != GAP_FEATURES {
            return Err(TrainError::Schema(format!(
                "expected {WORD_FEATURES}+{GAP_FEATURES} weights, got {}+{}",
                model.word_weights.len(),
                model.gap_weights.len()
            )));
        }
        Ok(Self { lm, model, config })
    }

    pub fn model(&self) -> &LogisticLabeler {
        &self.model
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn labels(&self, source: &TokenSeq, hypothesis: &TokenSeq) -> LabelVector {
        let f = featurize(&self.lm, source, hypothesis);
        let (w, g) = self.model.predict(&f.word, &f.gap);
        LabelVector::new(w, g).expect("logistic outputs are valid probabilities")
    }

    pub fn to_json(&self) -> String {
        let artifact = LabelerArtifact {
            schema: LABELER_SCHEMA.to_owned(),
            config: self.config.clone(),
            model: self.model.clone(),
            lm: self.lm.to_text(),
        };
        serde_json::to_string(&artifact).expect("artifact serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TrainError> {
        let a: LabelerArtifact =
            serde_json::from_str(text).map_err(|e| TrainError::Artifact(e.to_string()))?;
        if a.schema != LABELER_SCHEMA {
            return Err(TrainError::Schema(format!("unsupported labeler schema {:?}", a.schema)));
        }
        let lm = NgramLm::from_text(&a.lm).map_err(|e| TrainError::Artifact(e.to_string()))?;
        Self::new(Arc::new(lm), a.model, a.config)
    }
}

impl Scorer for TokenLabeler {
    fn name(&self) -> &str {
        "labeler"
    }

    fn score(&self, source: &TokenSeq, hypothesis: &TokenSeq) -> Result<ScorerOutput, ScoreError> {
        Ok(ScorerOutput::Labels(self.labels(source, hypothesis)))
    }
}

/// Result of [`train_token_labeler`].
#[derive(Clone, Debug)]
pub struct TrainedLabeler {
    pub labeler: TokenLabeler,
    /// Total training loss before each epoch, then after the last.
    pub curve: Vec<f64>,
    pub groups: usize,
}

/// Filters, groups and featurizes `examples`, then fits a labeler from zero
/// weights.
pub fn train_token_labeler(
    examples: Vec<TrainingExample>,
    lm: Arc<NgramLm>,
    config: &TrainConfig,
) -> Result<TrainedLabeler, TrainError> {
    config.validate()?;
    let groups = build_groups(examples, config.group_size, config.seed);
    if groups.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    let featurized: Vec<Vec<FeaturizedExample>> = groups
        .iter()
        .map(|g| g.members.iter().map(|ex| FeaturizedExample::from_example(&lm, ex, config.z)).collect())
        .collect();
    let mut model = LogisticLabeler::zeros(WORD_FEATURES, GAP_FEATURES);
    let curve = model.fit(&featurized, config)?;
    Ok(TrainedLabeler {
        labeler: TokenLabeler::new(lm, model, config.clone())?,
        curve,
        groups: groups.len(),
    })
}
