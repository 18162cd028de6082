//! M2 annotation format.
//!
//! ```text
//! S <tokenized source>
//! A <start> <end>|||<type>|||<correction>|||<required>|||<comment>|||<annotator>
//! <blank line>
//! ```
//!
//! `A -1 -1|||noop|||...` marks an annotator who made no corrections.
//! Deletions carry an empty correction; `-NONE-` is accepted as a synonym.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{tokenize, Edit, TokenSeq};

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct M2Error {
    pub line: usize,
    pub message: String,
}

/// One `A` line. Fields are kept verbatim so that emission is bit-exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct M2Annotation {
    pub start: i64,
    pub end: i64,
    pub error_type: String,
    pub correction: String,
    pub required: String,
    pub comment: String,
    pub annotator: u32,
}

impl M2Annotation {
    pub fn noop(annotator: u32) -> Self {
        Self {
            start: -1,
            end: -1,
            error_type: "noop".into(),
            correction: "-NONE-".into(),
            required: "REQUIRED".into(),
            comment: "-NONE-".into(),
            annotator,
        }
    }

    pub fn from_edit(edit: &Edit, error_type: impl Into<String>, annotator: u32) -> Self {
        Self {
            start: edit.start() as i64,
            end: edit.end() as i64,
            error_type: error_type.into(),
            correction: edit.replacement().to_string(),
            required: "REQUIRED".into(),
            comment: "-NONE-".into(),
            annotator,
        }
    }

    pub fn is_noop(&self) -> bool {
        self.start < 0 || self.error_type.eq_ignore_ascii_case("noop")
    }

    /// The annotation as an edit, or `None` for noop and degenerate lines.
    pub fn to_edit(&self, source: &TokenSeq) -> Option<Edit> {
        if self.is_noop() {
            return None;
        }
        let replacement = if self.correction == "-NONE-" {
            TokenSeq::new()
        } else {
            tokenize(&self.correction)
        };
        Edit::for_source(source, self.start as usize, self.end as usize, replacement).ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct M2Sentence {
    pub source: TokenSeq,
    pub annotations: Vec<M2Annotation>,
}

impl M2Sentence {
    /// Sentence with a single annotator's edits, or a noop line when the
    /// edit list is empty. Error types are the coarse edit categories.
    pub fn from_edits(source: TokenSeq, annotator: u32, edits: &[Edit]) -> Self {
        let annotations = if edits.is_empty() {
            vec![M2Annotation::noop(annotator)]
        } else {
            edits
                .iter()
                .map(|e| M2Annotation::from_edit(e, e.edit_type(&source).to_string(), annotator))
                .collect()
        };
        Self { source, annotations }
    }

    /// Gold edit sets keyed by annotator id. Annotators with only a noop
    /// line map to an empty set.
    pub fn gold_edits(&self) -> BTreeMap<u32, Vec<Edit>> {
        let mut out: BTreeMap<u32, Vec<Edit>> = BTreeMap::new();
        for a in &self.annotations {
            let entry = out.entry(a.annotator).or_default();
            if let Some(e) = a.to_edit(&self.source) {
                entry.push(e);
            }
        }
        for edits in out.values_mut() {
            edits.sort();
            edits.dedup();
        }
        out
    }
}

pub fn parse_m2(text: &str) -> Result<Vec<M2Sentence>, M2Error> {
    let mut sentences = Vec::new();
    let mut current: Option<M2Sentence> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            if let Some(s) = current.take() {
                sentences.push(s);
            }
            continue;
        }
        let err = |message: String| M2Error { line: line_no, message };
        if let Some(rest) = line.strip_prefix('S').filter(|r| r.is_empty() || r.starts_with(' ')) {
            if let Some(s) = current.take() {
                sentences.push(s);
            }
            current = Some(M2Sentence { source: tokenize(rest), annotations: Vec::new() });
        } else if let Some(rest) = line.strip_prefix("A ") {
            let sentence = current
                .as_mut()
                .ok_or_else(|| err("annotation before any S line".into()))?;
            let ann = parse_annotation(rest, &sentence.source).map_err(err)?;
            sentence.annotations.push(ann);
        } else {
            return Err(err(format!("unrecognised line {line:?}")));
        }
    }
    if let Some(s) = current.take() {
        sentences.push(s);
    }
    Ok(sentences)
}

fn parse_annotation(rest: &str, source: &TokenSeq) -> Result<M2Annotation, String> {
    let fields: Vec<&str> = rest.split("|||").collect();
    if fields.len() != 6 {
        return Err(format!("expected 6 '|||'-separated fields, found {}", fields.len()));
    }
    let mut span = fields[0].split_whitespace();
    let (Some(s), Some(e), None) = (span.next(), span.next(), span.next()) else {
        return Err(format!("bad span {:?}", fields[0]));
    };
    let start: i64 = s.parse().map_err(|_| format!("bad start index {s:?}"))?;
    let end: i64 = e.parse().map_err(|_| format!("bad end index {e:?}"))?;
    let noop = start == -1 && end == -1;
    if !noop && (start < 0 || end < start || end as usize > source.len()) {
        return Err(format!("span {start} {end} invalid for {} tokens", source.len()));
    }
    let annotator = fields[5]
        .trim()
        .parse()
        .map_err(|_| format!("bad annotator id {:?}", fields[5]))?;
    Ok(M2Annotation {
        start,
        end,
        error_type: fields[1].to_owned(),
        correction: tokenize(fields[2]).to_string(),
        required: fields[3].to_owned(),
        comment: fields[4].to_owned(),
        annotator,
    })
}

pub fn emit_m2(sentences: &[M2Sentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        if s.source.is_empty() {
            out.push_str("S\n");
        } else {
            let _ = writeln!(out, "S {}", s.source);
        }
        for a in &s.annotations {
            let _ = writeln!(
                out,
                "A {} {}|||{}|||{}|||{}|||{}|||{}",
                a.start, a.end, a.error_type, a.correction, a.required, a.comment, a.annotator
            );
        }
        out.push('\n');
    }
    out
}
