use std::collections::{BTreeMap, BTreeSet};

use super::{extract_edits, Edit, EditError, EditType, TokenSeq};

/// One deduplicated edit of an [`EditUnion`] together with the systems that
/// proposed it.
#[derive(Clone, Debug, PartialEq)]
pub struct UnionEdit {
    pub edit: Edit,
    pub edit_type: EditType,
    pub proposers: BTreeSet<String>,
    /// Edit-classifier probability that the edit is correct, when available.
    pub p_es: Option<f64>,
}

impl UnionEdit {
    /// Number of distinct systems proposing the edit.
    pub fn count(&self) -> usize {
        self.proposers.len()
    }
}

/// Union of all edits proposed by the base systems for one source sentence.
#[derive(Clone, Debug, PartialEq)]
pub struct EditUnion {
    source: TokenSeq,
    systems: Vec<String>,
    edits: Vec<UnionEdit>,
}

impl EditUnion {
    /// Builds the union from per-system edit lists. Each system counts once
    /// per edit even if it lists the edit twice. Systems with no edits still
    /// count towards the roster size `c`.
    pub fn new<S: AsRef<str>>(
        source: TokenSeq,
        per_system: &[(S, Vec<Edit>)],
    ) -> Result<Self, EditError> {
        let mut merged: BTreeMap<Edit, BTreeSet<String>> = BTreeMap::new();
        let mut systems = Vec::with_capacity(per_system.len());
        for (id, edits) in per_system {
            let id = id.as_ref().to_owned();
            for edit in edits {
                edit.validate(&source)?;
                merged.entry(edit.clone()).or_default().insert(id.clone());
            }
            systems.push(id);
        }
        let edits = merged
            .into_iter()
            .map(|(edit, proposers)| UnionEdit {
                edit_type: edit.edit_type(&source),
                edit,
                proposers,
                p_es: None,
            })
            .collect();
        Ok(Self { source, systems, edits })
    }

    /// Extracts each system's edits from its hypothesis and builds the union.
    pub fn from_hypotheses<S: AsRef<str>>(
        source: TokenSeq,
        hypotheses: &[(S, TokenSeq)],
    ) -> Self {
        let per_system: Vec<(&str, Vec<Edit>)> = hypotheses
            .iter()
            .map(|(id, hyp)| (id.as_ref(), extract_edits(&source, hyp)))
            .collect();
        Self::new(source, &per_system).expect("extracted edits are valid for their source")
    }

    pub fn source(&self) -> &TokenSeq {
        &self.source
    }

    pub fn edits(&self) -> &[UnionEdit] {
        &self.edits
    }

    pub fn edits_mut(&mut self) -> &mut [UnionEdit] {
        &mut self.edits
    }

    pub fn len(&self) -> usize {
        self.edits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    /// Roster of base systems, in input order.
    pub fn systems(&self) -> &[String] {
        &self.systems
    }

    /// Number of base systems `c`.
    pub fn system_count(&self) -> usize {
        self.systems.len()
    }

    pub fn edit(&self, index: usize) -> &Edit {
        &self.edits[index].edit
    }

    /// Attaches edit-classifier probabilities, one per union edit.
    pub fn set_probabilities(&mut self, probs: &[f64]) {
        assert_eq!(probs.len(), self.edits.len(), "one probability per union edit");
        for (entry, &p) in self.edits.iter_mut().zip(probs) {
            entry.p_es = Some(p);
        }
    }

    pub fn has_probabilities(&self) -> bool {
        self.edits.iter().all(|e| e.p_es.is_some())
    }

    /// Index of `edit` in the union, if present.
    pub fn position(&self, edit: &Edit) -> Option<usize> {
        self.edits.binary_search_by(|u| u.edit.cmp(edit)).ok()
    }
}
