//! Firing semantics and exhaustive enumeration of execution sequences.

mod crossval;
mod enumerate;
mod layers;
mod step;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Marking, PetriNet, TransitionIdx, UnknownNode};

pub use crossval::{cross_validate, CorrespondenceReport};
pub use enumerate::{enumerate, walk, SequenceView, WalkSummary};
pub use layers::{LayeredGraph, NodeId};
pub(crate) use step::apply;
pub use step::{
    admissible, effective_consumption, enabled, enabled_transitions, fire, firing_sets, is_enabled,
};

/// Which subsets of the enabled transitions may fire together in one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemanticsMode {
    /// Any admissible subset, including the empty one.
    Set,
    /// Admissible subsets that no further enabled transition can join.
    #[serde(rename = "max")]
    Maximal,
    /// At most one transition per step.
    Interleaved,
}

impl fmt::Display for SemanticsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SemanticsMode::Set => "set",
            SemanticsMode::Maximal => "max",
            SemanticsMode::Interleaved => "interleaved",
        })
    }
}

impl FromStr for SemanticsMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "set" => Ok(SemanticsMode::Set),
            "max" | "maximal" => Ok(SemanticsMode::Maximal),
            "interleaved" => Ok(SemanticsMode::Interleaved),
            other => Err(format!("unknown semantics `{other}`")),
        }
    }
}

/// How reset arcs interact with other consumers of the same place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResetMode {
    /// A reset arc claims the whole current marking of its place, so it
    /// competes with every other consuming arc on that place.
    #[default]
    Contention,
    /// Emptying is a side effect applied after normal consumption.
    Standard,
}

impl fmt::Display for ResetMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResetMode::Contention => "contention",
            ResetMode::Standard => "standard",
        })
    }
}

impl FromStr for ResetMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "contention" => Ok(ResetMode::Contention),
            "standard" => Ok(ResetMode::Standard),
            other => Err(format!("unknown reset mode `{other}`")),
        }
    }
}

/// Transitions fired together in one step, sorted by index.
///
/// Ordering is canonical: smaller sets first, then lexicographic on members.
/// Since transitions are indexed in name order this equals ordering by the
/// sorted member names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FiringSet(Vec<TransitionIdx>);

impl FiringSet {
    pub fn empty() -> Self {
        FiringSet(Vec::new())
    }

    pub fn new(mut members: Vec<TransitionIdx>) -> Self {
        members.sort();
        members.dedup();
        FiringSet(members)
    }

    pub fn from_names(net: &PetriNet, names: &[&str]) -> Result<Self, UnknownNode> {
        names
            .iter()
            .map(|n| net.transition_index(n))
            .collect::<Result<Vec<_>, _>>()
            .map(FiringSet::new)
    }

    pub fn members(&self) -> &[TransitionIdx] {
        &self.0
    }

    pub fn contains(&self, t: TransitionIdx) -> bool {
        self.0.binary_search(&t).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names<'n>(&self, net: &'n PetriNet) -> Vec<&'n str> {
        self.0.iter().map(|&t| net.transition(t).as_str()).collect()
    }
}

impl Ord for FiringSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for FiringSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Alternating markings and firing sets `M0, T0, M1, ..., Tk, Mk+1`.
///
/// The markings at steps `0..=k` are the ones an answer set of the ASP
/// encoding records; `Mk+1` is the result of the last firing and is kept so
/// every firing has a visible effect.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExecutionSequence {
    firings: Vec<FiringSet>,
    markings: Vec<Marking>,
}

impl ExecutionSequence {
    /// `markings` must hold exactly one more entry than `firings`.
    pub fn new(firings: Vec<FiringSet>, markings: Vec<Marking>) -> Self {
        assert!(!firings.is_empty(), "a sequence fires at least once");
        assert_eq!(markings.len(), firings.len() + 1);
        ExecutionSequence { firings, markings }
    }

    /// Horizon `k`: firings happen at steps `0..=k`.
    pub fn horizon(&self) -> usize {
        self.firings.len() - 1
    }

    pub fn firings(&self) -> &[FiringSet] {
        &self.firings
    }

    /// All markings, `M0` through `Mk+1`.
    pub fn markings(&self) -> &[Marking] {
        &self.markings
    }

    /// Markings at steps `0..=k`.
    pub fn observed_markings(&self) -> &[Marking] {
        &self.markings[..self.firings.len()]
    }

    pub fn firing(&self, step: usize) -> &FiringSet {
        &self.firings[step]
    }

    pub fn marking(&self, step: usize) -> &Marking {
        &self.markings[step]
    }

    /// Marking at step `k`, the last one recorded by an answer set.
    pub fn final_marking(&self) -> &Marking {
        &self.markings[self.horizon()]
    }

    /// Marking produced by the firing at step `k`.
    pub fn successor_marking(&self) -> &Marking {
        self.markings.last().expect("non-empty")
    }
}

/// Resource bounds for enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Limits {
    /// Maximum number of complete sequences.
    pub max_sequences: Option<u64>,
    /// Maximum number of search-tree nodes (markings produced).
    pub max_states: Option<u64>,
}

impl Limits {
    pub const fn unlimited() -> Self {
        Limits {
            max_sequences: None,
            max_states: None,
        }
    }
}

/// Everything that selects one family of execution sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationConfig {
    pub steps: usize,
    pub semantics: SemanticsMode,
    pub reset_mode: ResetMode,
    pub limits: Limits,
}

impl EnumerationConfig {
    pub fn new(steps: usize, semantics: SemanticsMode) -> Self {
        EnumerationConfig {
            steps,
            semantics,
            reset_mode: ResetMode::Contention,
            limits: Limits::unlimited(),
        }
    }

    pub fn with_reset_mode(mut self, reset_mode: ResetMode) -> Self {
        self.reset_mode = reset_mode;
        self
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitKind {
    Sequences,
    States,
}

impl fmt::Display for LimitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimitKind::Sequences => "sequence",
            LimitKind::States => "state",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    UnknownNode(#[from] UnknownNode),
    #[error("firing set is not admissible at the given marking")]
    NotAdmissible,
    #[error("{kind} limit of {limit} exceeded after {partial} complete sequences")]
    LimitExceeded {
        kind: LimitKind,
        limit: u64,
        partial: u64,
    },
    #[error("token count overflow at place `{place}`")]
    Overflow { place: String },
}
