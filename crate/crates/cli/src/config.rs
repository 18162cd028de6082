use std::path::{Path, PathBuf};

use gec_combine::scoring::CombinerConfig;
use gec_combine::training::{EscConfig, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Built-in scorers plus the external sidecar.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScorerKind {
    /// n-gram language model (`--model` is an `lm-train` artifact).
    #[default]
    Ngram,
    /// Trained token labeler (`--model` is a `train-qe` artifact).
    Labeler,
    /// Sentence F0.5 against the gold M2 (`--gold`); upper bound only.
    Oracle,
    /// Constant 0.5 everywhere.
    Uniform,
    /// JSON-lines sidecar at `endpoint`.
    External,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScorerSection {
    pub kind: ScorerKind,
    pub model: Option<PathBuf>,
    /// `tcp:host:port` or `cmd:program args`.
    pub endpoint: Option<String>,
}

/// Everything a run can be configured with. Loaded from TOML, then
/// overridden by flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// 0 uses every core; 1 runs sequentially.
    pub workers: usize,
    pub combiner: CombinerConfig,
    pub train: TrainConfig,
    pub esc: EscConfig,
    pub scorer: ScorerSection,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.combiner.validate()?;
        self.train.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.esc.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }
}
