use std::collections::HashMap;

use serde::Serialize;

use crate::model::Marking;

use super::{ExecutionSequence, FiringSet};

/// Outcome of comparing two collections of execution sequences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorrespondenceReport {
    pub native_count: usize,
    pub external_count: usize,
    pub matched: usize,
    /// Indices into the native list with no external counterpart.
    pub unmatched_native: Vec<usize>,
    /// Indices into the external list with no native counterpart.
    pub unmatched_external: Vec<usize>,
    /// Indices into the external list repeating an earlier entry.
    pub duplicate_external: Vec<usize>,
}

impl CorrespondenceReport {
    pub fn is_match(&self) -> bool {
        self.unmatched_native.is_empty()
            && self.unmatched_external.is_empty()
            && self.duplicate_external.is_empty()
    }
}

/// The atoms an answer set records: firings and markings at steps `0..=k`.
fn atoms(s: &ExecutionSequence) -> (&[FiringSet], &[Marking]) {
    (s.firings(), s.observed_markings())
}

/// Checks the two collections are equal as sets of fires/holds atom sets.
pub fn cross_validate(
    native: &[ExecutionSequence],
    external: &[ExecutionSequence],
) -> CorrespondenceReport {
    let mut native_index: HashMap<_, usize> = HashMap::new();
    for (i, s) in native.iter().enumerate() {
        native_index.entry(atoms(s)).or_insert(i);
    }
    let mut hit = vec![false; native.len()];
    let mut seen = HashMap::new();
    let mut unmatched_external = Vec::new();
    let mut duplicate_external = Vec::new();
    for (i, s) in external.iter().enumerate() {
        if seen.insert(atoms(s), i).is_some() {
            duplicate_external.push(i);
            continue;
        }
        match native_index.get(&atoms(s)) {
            Some(&n) => hit[n] = true,
            None => unmatched_external.push(i),
        }
    }
    let unmatched_native: Vec<usize> = hit
        .iter()
        .enumerate()
        .filter(|(_, &h)| !h)
        .map(|(i, _)| i)
        .collect();
    CorrespondenceReport {
        native_count: native.len(),
        external_count: external.len(),
        matched: native.len() - unmatched_native.len(),
        unmatched_native,
        unmatched_external,
        duplicate_external,
    }
}
