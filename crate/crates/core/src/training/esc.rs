use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{sigmoid, TrainError};
use crate::edits::{Edit, EditType, EditUnion, UnionEdit};
use crate::scoring::DEFAULT_PROB_FLOOR;

pub const ESC_SCHEMA: &str = "edit-classifier/1 [edit_type x9, inclusion per system, bias]";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EscConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// L2 penalty on every weight except the bias.
    pub l2: f64,
}

impl Default for EscConfig {
    fn default() -> Self {
        Self { learning_rate: 1.0, epochs: 500, l2: 1e-4 }
    }
}

impl EscConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.learning_rate > 0.0) || !(self.l2 >= 0.0) {
            return Err(TrainError::InvalidConfig(format!(
                "edit classifier needs learning_rate > 0 and l2 >= 0, got {} and {}",
                self.learning_rate, self.l2
            )));
        }
        Ok(())
    }
}

/// Feature vector of one union edit: edit-type one-hot, one inclusion bit
/// per roster system, bias.
pub fn edit_features(edit: &UnionEdit, roster: &[String]) -> Vec<f64> {
    let mut x = vec![0.0; EditType::COUNT + roster.len() + 1];
    x[edit.edit_type.index()] = 1.0;
    for (i, system) in roster.iter().enumerate() {
        if edit.proposers.contains(system) {
            x[EditType::COUNT + i] = 1.0;
        }
    }
    x[EditType::COUNT + roster.len()] = 1.0;
    x
}

/// Logistic regression over edit type and system inclusion, producing the
/// per-edit probability used by the edit score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EditClassifier {
    roster: Vec<String>,
    weights: Vec<f64>,
    config: EscConfig,
}

#[derive(Serialize, Deserialize)]
struct EscArtifact {
    schema: String,
    #[serde(flatten)]
    model: EditClassifier,
}

impl EditClassifier {
    pub fn zeros(roster: Vec<String>, config: EscConfig) -> Self {
        let weights = vec![0.0; EditType::COUNT + roster.len() + 1];
        Self { roster, weights, config }
    }

    pub fn from_weights(roster: Vec<String>, weights: Vec<f64>, config: EscConfig) -> Result<Self, TrainError> {
        let expected = EditType::COUNT + roster.len() + 1;
        if weights.len() != expected {
            return Err(TrainError::Shape { expected, got: weights.len() });
        }
        Ok(Self { roster, weights, config })
    }

    pub fn roster(&self) -> &[String] {
        &self.roster
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn check_roster(&self, union: &EditUnion) -> Result<(), TrainError> {
        if union.systems() != self.roster.as_slice() {
            return Err(TrainError::RosterMismatch {
                expected: self.roster.clone(),
                got: union.systems().to_vec(),
            });
        }
        Ok(())
    }

    /// Probability that `edit` is correct, clamped away from 0 and 1.
    pub fn probability(&self, edit: &UnionEdit) -> f64 {
        let z: f64 = edit_features(edit, &self.roster).iter().zip(&self.weights).map(|(x, w)| x * w).sum();
        sigmoid(z).clamp(DEFAULT_PROB_FLOOR, 1.0 - DEFAULT_PROB_FLOOR)
    }

    pub fn predict(&self, union: &EditUnion) -> Result<Vec<f64>, TrainError> {
        self.check_roster(union)?;
        Ok(union.edits().iter().map(|e| self.probability(e)).collect())
    }

    /// Stores predictions on the union's edits.
    pub fn annotate(&self, union: &mut EditUnion) -> Result<(), TrainError> {
        let probs = self.predict(union)?;
        union.set_probabilities(&probs);
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let a = EscArtifact { schema: ESC_SCHEMA.to_owned(), model: self.clone() };
        serde_json::to_string(&a).expect("artifact serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TrainError> {
        let a: EscArtifact = serde_json::from_str(text).map_err(|e| TrainError::Artifact(e.to_string()))?;
        if a.schema != ESC_SCHEMA {
            return Err(TrainError::Schema(format!("unsupported edit classifier schema {:?}", a.schema)));
        }
        let m = a.model;
        Self::from_weights(m.roster, m.weights, m.config)
    }
}

/// Mean binary cross-entropy of a logistic model plus `l2 / 2 * |w|^2`
/// (bias excluded), and its gradient.
pub fn logistic_loss(weights: &[f64], data: &[(Vec<f64>, f64)], l2: f64) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; weights.len()];
    if data.is_empty() {
        return (0.0, grad);
    }
    let inv = 1.0 / data.len() as f64;
    let mut loss = 0.0;
    for (x, y) in data {
        let z: f64 = x.iter().zip(weights).map(|(a, b)| a * b).sum();
        // ln(1 + e^z) - y z, stable for either sign of z.
        loss += (super::losses::softplus(z) - y * z) * inv;
        let d = (sigmoid(z) - y) * inv;
        grad.iter_mut().zip(x).for_each(|(g, xi)| *g += d * xi);
    }
    let last = weights.len().saturating_sub(1);
    for (i, w) in weights.iter().enumerate().take(last) {
        loss += 0.5 * l2 * w * w;
        grad[i] += l2 * w;
    }
    (loss, grad)
}

/// Fits an edit classifier on unions whose edits are labelled correct when
/// they appear in the sentence's gold edit set. Every union must share the
/// same system roster.
pub fn train_edit_classifier(
    unions: &[EditUnion],
    gold: &[BTreeSet<Edit>],
    config: &EscConfig,
) -> Result<EditClassifier, TrainError> {
    config.validate()?;
    if unions.len() != gold.len() {
        return Err(TrainError::Shape { expected: unions.len(), got: gold.len() });
    }
    let first = unions.first().ok_or(TrainError::EmptyCorpus)?;
    let mut model = EditClassifier::zeros(first.systems().to_vec(), config.clone());
    let mut data = Vec::new();
    for (union, gold) in unions.iter().zip(gold) {
        model.check_roster(union)?;
        for e in union.edits() {
            let y = if gold.contains(&e.edit) { 1.0 } else { 0.0 };
            data.push((edit_features(e, &model.roster), y));
        }
    }
    if data.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    for _ in 0..config.epochs {
        let (_, grad) = logistic_loss(&model.weights, &data, config.l2);
        model.weights.iter_mut().zip(&grad).for_each(|(w, g)| *w -= config.learning_rate * g);
    }
    Ok(model)
}
