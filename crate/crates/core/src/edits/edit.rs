use std::fmt;

use serde::{Deserialize, Serialize};

use super::{EditError, TokenSeq};

/// An atomic correction over source tokens: replace `[start, end)` with
/// `replacement`. Insertions have `start == end`, deletions an empty
/// replacement.
///
/// The derived ordering is `(start, end, replacement)`, which is the
/// processing order used everywhere in the crate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edit {
    start: usize,
    end: usize,
    replacement: TokenSeq,
}

impl Edit {
    /// Checks the frame-independent invariants: `start <= end` and a pure
    /// insertion carries content.
    pub fn new(start: usize, end: usize, replacement: TokenSeq) -> Result<Self, EditError> {
        if start > end {
            return Err(EditError::InvalidSpan { start, end });
        }
        if start == end && replacement.is_empty() {
            return Err(EditError::EmptyInsertion { start });
        }
        Ok(Self { start, end, replacement })
    }

    /// Like [`Edit::new`] but also validates against `source`: the span must
    /// fit and the edit must change something.
    pub fn for_source(
        source: &TokenSeq,
        start: usize,
        end: usize,
        replacement: TokenSeq,
    ) -> Result<Self, EditError> {
        let edit = Self::new(start, end, replacement)?;
        edit.validate(source)?;
        Ok(edit)
    }

    pub(crate) fn new_unchecked(start: usize, end: usize, replacement: TokenSeq) -> Self {
        debug_assert!(start <= end && (start < end || !replacement.is_empty()));
        Self { start, end, replacement }
    }

    pub fn validate(&self, source: &TokenSeq) -> Result<(), EditError> {
        if self.end > source.len() {
            return Err(EditError::IndexOutOfRange { end: self.end, len: source.len() });
        }
        if source.span(self.start, self.end) == self.replacement.tokens() {
            return Err(EditError::NoOp { start: self.start, end: self.end });
        }
        Ok(())
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn replacement(&self) -> &TokenSeq {
        &self.replacement
    }

    pub fn is_insertion(&self) -> bool {
        self.start == self.end
    }

    pub fn is_deletion(&self) -> bool {
        self.start < self.end && self.replacement.is_empty()
    }

    /// Coarse type used by the edit classifier.
    pub fn edit_type(&self, source: &TokenSeq) -> EditType {
        EditType::classify(self, source)
    }
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, '{}')", self.start, self.end, self.replacement)
    }
}

/// True iff the two edits cannot both be applied deterministically.
///
/// Spans conflict when their open intervals overlap. An insertion is a
/// zero-width point: it conflicts with any edit whose open span strictly
/// contains it and with another insertion at the same position. Edits that
/// merely touch (`(2,3)` and `(3,4)`) do not conflict.
pub fn conflicts(a: &Edit, b: &Edit) -> bool {
    match (a.is_insertion(), b.is_insertion()) {
        (true, true) => a.start == b.start,
        (true, false) => b.start < a.start && a.start < b.end,
        (false, true) => a.start < b.start && b.start < a.end,
        (false, false) => a.start < b.end && b.start < a.end,
    }
}

/// Replaces `[edit.start, edit.end)` of `sentence` with the edit's
/// replacement. Indices are taken in the sentence's own frame.
pub fn apply_edit(sentence: &TokenSeq, edit: &Edit) -> Result<TokenSeq, EditError> {
    if edit.end > sentence.len() {
        return Err(EditError::IndexOutOfRange { end: edit.end, len: sentence.len() });
    }
    let toks = sentence.tokens();
    let mut out = Vec::with_capacity(toks.len() + edit.replacement.len());
    out.extend_from_slice(&toks[..edit.start]);
    out.extend_from_slice(edit.replacement.tokens());
    out.extend_from_slice(&toks[edit.end..]);
    Ok(TokenSeq::from_vec_unchecked(out))
}

/// Applies a conflict-free set of source-frame edits. The result does not
/// depend on the order of `edits`.
pub fn apply_edits<'a, I>(source: &TokenSeq, edits: I) -> Result<TokenSeq, EditError>
where
    I: IntoIterator<Item = &'a Edit>,
{
    let mut sorted: Vec<&Edit> = edits.into_iter().collect();
    sorted.sort();
    let toks = source.tokens();
    let mut out = Vec::with_capacity(toks.len());
    // `cursor` is the furthest source position consumed by a span so far.
    let mut cursor = 0usize;
    let mut last_insertion: Option<usize> = None;
    for (i, e) in sorted.iter().enumerate() {
        if e.end > toks.len() {
            return Err(EditError::IndexOutOfRange { end: e.end, len: toks.len() });
        }
        let clash = if e.is_insertion() {
            e.start < cursor || last_insertion == Some(e.start)
        } else {
            e.start < cursor
        };
        if clash {
            let other = sorted[..i]
                .iter()
                .rev()
                .find(|o| conflicts(o, e))
                .expect("sweep conflict has a witness");
            return Err(EditError::Conflict {
                first: (*other).clone(),
                second: (*e).clone(),
            });
        }
        out.extend_from_slice(&toks[cursor..e.start]);
        out.extend_from_slice(e.replacement.tokens());
        if e.is_insertion() {
            last_insertion = Some(e.start);
        }
        cursor = e.end.max(cursor);
    }
    out.extend_from_slice(&toks[cursor..]);
    Ok(TokenSeq::from_vec_unchecked(out))
}

/// Checks that no two edits in the collection conflict.
pub fn is_conflict_free<'a, I>(edits: I) -> bool
where
    I: IntoIterator<Item = &'a Edit>,
{
    let edits: Vec<&Edit> = edits.into_iter().collect();
    edits
        .iter()
        .enumerate()
        .all(|(i, a)| edits[i + 1..].iter().all(|b| !conflicts(a, b)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Operation {
    Insertion,
    Deletion,
    Substitution,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Punct,
    Case,
    Other,
}

/// Surface-level edit category: `{INS, DEL, SUB} x {PUNCT, CASE, OTHER}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EditType {
    pub op: Operation,
    pub category: Category,
}

impl EditType {
    pub const COUNT: usize = 9;

    pub fn all() -> impl Iterator<Item = EditType> {
        [Operation::Insertion, Operation::Deletion, Operation::Substitution]
            .into_iter()
            .flat_map(|op| {
                [Category::Punct, Category::Case, Category::Other]
                    .into_iter()
                    .map(move |category| EditType { op, category })
            })
    }

    /// Position of this type in [`EditType::all`], used for one-hot features.
    pub fn index(self) -> usize {
        let op = match self.op {
            Operation::Insertion => 0,
            Operation::Deletion => 1,
            Operation::Substitution => 2,
        };
        let cat = match self.category {
            Category::Punct => 0,
            Category::Case => 1,
            Category::Other => 2,
        };
        op * 3 + cat
    }

    fn classify(edit: &Edit, source: &TokenSeq) -> Self {
        let end = edit.end.min(source.len());
        let start = edit.start.min(end);
        let orig = source.span(start, end);
        let repl = edit.replacement.tokens();
        let op = if orig.is_empty() {
            Operation::Insertion
        } else if repl.is_empty() {
            Operation::Deletion
        } else {
            Operation::Substitution
        };
        let category = if orig.iter().chain(repl).all(|t| is_punct(t)) {
            Category::Punct
        } else if op == Operation::Substitution
            && orig.join(" ").to_lowercase() == edit.replacement.to_string().to_lowercase()
        {
            Category::Case
        } else {
            Category::Other
        };
        EditType { op, category }
    }
}

impl fmt::Display for EditType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.op {
            Operation::Insertion => "INS",
            Operation::Deletion => "DEL",
            Operation::Substitution => "SUB",
        };
        let cat = match self.category {
            Category::Punct => "PUNCT",
            Category::Case => "CASE",
            Category::Other => "OTHER",
        };
        write!(f, "{op}:{cat}")
    }
}

pub(crate) fn is_punct(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| !c.is_alphanumeric())
}
