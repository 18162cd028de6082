use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use gec_combine::edits::{parse_m2, tokenize, M2Sentence, TokenSeq};

use crate::error::{CliError, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// One whitespace-tokenized sentence per line.
pub fn read_sentences(path: &Path) -> Result<Vec<TokenSeq>> {
    Ok(read_text(path)?.lines().map(tokenize).collect())
}

pub fn read_m2(path: &Path) -> Result<Vec<M2Sentence>> {
    parse_m2(&read_text(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// A base system given as `NAME=PATH`, or `PATH` named after its file stem.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub name: String,
    pub path: PathBuf,
}

impl std::str::FromStr for SystemSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some((name, path)) = s.split_once('=') {
            if name.is_empty() || path.is_empty() {
                return Err(format!("bad system spec {s:?}"));
            }
            return Ok(Self { name: name.to_owned(), path: path.into() });
        }
        let path = PathBuf::from(s);
        let name = path
            .file_stem()
            .and_then(|n| n.to_str())
            .ok_or_else(|| format!("cannot name system from {s:?}"))?
            .to_owned();
        Ok(Self { name, path })
    }
}

/// Reads every system's hypotheses and checks that each has `expected`
/// lines.
pub fn read_systems(systems: &[SystemSpec], expected: usize) -> Result<Vec<(String, Vec<TokenSeq>)>> {
    if systems.is_empty() {
        return Err(CliError::Config("at least one --system is required".into()));
    }
    let mut out = Vec::with_capacity(systems.len());
    for spec in systems {
        if out.iter().any(|(n, _): &(String, _)| *n == spec.name) {
            return Err(CliError::Config(format!("duplicate system name {:?}", spec.name)));
        }
        let hyps = read_sentences(&spec.path)?;
        check_aligned("source", expected, &spec.path.display().to_string(), hyps.len())?;
        out.push((spec.name.clone(), hyps));
    }
    Ok(out)
}

pub fn check_aligned(left: &str, left_lines: usize, right: &str, right_lines: usize) -> Result<()> {
    if left_lines != right_lines {
        let first_missing = left_lines.min(right_lines) + 1;
        return Err(CliError::Config(format!(
            "misaligned corpora: {left} has {left_lines} lines, {right} has {right_lines} (first unmatched line {first_missing})"
        )));
    }
    Ok(())
}

/// Writes to `path`, or to stdout when absent.
pub fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

pub fn lines(items: impl IntoIterator<Item = String>) -> String {
    let mut s = String::new();
    for item in items {
        s.push_str(&item);
        s.push('\n');
    }
    s
}
