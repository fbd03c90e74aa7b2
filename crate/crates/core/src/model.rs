//! Net representation: places, transitions, the four arc kinds and markings.
//!
//! A [`NetDescription`] is the unchecked, name-based form produced by parsers
//! and builders. [`validate`] turns it into a [`PetriNet`], which stores places
//! and transitions in lexicographic order and indexes arcs by transition so the
//! engine never touches strings on its hot path.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Returns true if `name` can be used verbatim as an ASP constant.
pub fn is_valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

macro_rules! name_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(name: impl Into<String>) -> Result<Self, ValidationError> {
                let name = name.into();
                if is_valid_identifier(&name) {
                    Ok(Self(name))
                } else {
                    Err(ValidationError::InvalidName { name })
                }
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }
    };
}

name_type!(
    /// Name of a place.
    PlaceId
);
name_type!(
    /// Name of a transition.
    TransitionId
);

/// Position of a place in [`PetriNet::places`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlaceIdx(pub usize);

/// Position of a transition in [`PetriNet::transitions`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransitionIdx(pub usize);

/// Kind of a place-to-transition arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArcKind {
    /// Consumes `weight` tokens; enabled only with at least that many.
    Normal(u64),
    /// Empties the place when the transition fires.
    Reset,
    /// Disables the transition while the place holds any token.
    Inhibitor,
    /// Requires `weight` tokens without consuming them.
    Read(u64),
}

impl ArcKind {
    /// Discriminant used for duplicate detection and ordering.
    pub fn tag(self) -> ArcTag {
        match self {
            ArcKind::Normal(_) => ArcTag::Normal,
            ArcKind::Reset => ArcTag::Reset,
            ArcKind::Inhibitor => ArcTag::Inhibitor,
            ArcKind::Read(_) => ArcTag::Read,
        }
    }

    pub fn weight(self) -> Option<u64> {
        match self {
            ArcKind::Normal(w) | ArcKind::Read(w) => Some(w),
            ArcKind::Reset | ArcKind::Inhibitor => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ArcTag {
    Normal,
    Reset,
    Inhibitor,
    Read,
}

impl fmt::Display for ArcTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArcTag::Normal => "normal",
            ArcTag::Reset => "reset",
            ArcTag::Inhibitor => "inhibitor",
            ArcTag::Read => "read",
        })
    }
}

/// Unchecked place-to-transition arc.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputArcSpec {
    pub place: String,
    pub transition: String,
    pub kind: ArcKind,
}

/// Unchecked transition-to-place arc.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputArcSpec {
    pub transition: String,
    pub place: String,
    pub weight: u64,
}

/// Name-based net description prior to validation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetDescription {
    pub places: Vec<String>,
    pub transitions: Vec<String>,
    pub input_arcs: Vec<InputArcSpec>,
    pub output_arcs: Vec<OutputArcSpec>,
}

impl NetDescription {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn place(mut self, name: &str) -> Self {
        self.places.push(name.to_owned());
        self
    }

    pub fn transition(mut self, name: &str) -> Self {
        self.transitions.push(name.to_owned());
        self
    }

    pub fn input(mut self, place: &str, transition: &str, kind: ArcKind) -> Self {
        self.input_arcs.push(InputArcSpec {
            place: place.to_owned(),
            transition: transition.to_owned(),
            kind,
        });
        self
    }

    pub fn output(mut self, transition: &str, place: &str, weight: u64) -> Self {
        self.output_arcs.push(OutputArcSpec {
            transition: transition.to_owned(),
            place: place.to_owned(),
            weight,
        });
        self
    }
}

/// A single well-formedness violation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("unknown node `{name}` referenced by {context}")]
    UnknownNode { name: String, context: String },
    #[error("duplicate {kind} arc between `{from}` and `{to}`")]
    DuplicateArc {
        from: String,
        to: String,
        kind: String,
    },
    #[error("arc between `{from}` and `{to}` has weight 0")]
    ZeroWeight { from: String, to: String },
    #[error("`{name}` is declared as both a place and a transition")]
    NameClash { name: String },
    #[error("`{name}` is declared more than once")]
    DuplicateNode { name: String },
    #[error("initial marking has no entry for place `{place}`")]
    MarkingMissingPlace { place: String },
    #[error(
        "`{name}` is not a valid identifier (lowercase letter followed by letters, digits or `_`)"
    )]
    InvalidName { name: String },
}

/// Every violation found in one validation pass.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}", render_list(.0))]
pub struct ValidationErrors(pub Vec<ValidationError>);

fn render_list(errors: &[ValidationError]) -> String {
    errors
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Input arc of a validated net.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputArc {
    pub place: PlaceIdx,
    pub kind: ArcKind,
}

/// Output arc of a validated net.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputArc {
    pub place: PlaceIdx,
    pub weight: u64,
}

/// Validated, immutable Petri net with reset, inhibitor and read arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetriNet {
    places: Vec<PlaceId>,
    transitions: Vec<TransitionId>,
    place_index: HashMap<String, PlaceIdx>,
    transition_index: HashMap<String, TransitionIdx>,
    inputs: Vec<Vec<InputArc>>,
    outputs: Vec<Vec<OutputArc>>,
}

/// Token counts indexed by [`PlaceIdx`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking(Vec<u64>);

impl Marking {
    pub fn from_counts(counts: Vec<u64>) -> Self {
        Marking(counts)
    }

    pub fn zeros(places: usize) -> Self {
        Marking(vec![0; places])
    }

    pub fn get(&self, place: PlaceIdx) -> u64 {
        self.0[place.0]
    }

    pub fn set(&mut self, place: PlaceIdx, count: u64) {
        self.0[place.0] = count;
    }

    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u128 {
        self.0.iter().map(|&c| c as u128).sum()
    }
}

/// Checks `description` and `initial` and builds the indexed net.
///
/// Collects every violation instead of stopping at the first one.
pub fn validate(
    description: &NetDescription,
    initial: &BTreeMap<String, u64>,
) -> Result<(PetriNet, Marking), ValidationErrors> {
    let mut errors = Vec::new();

    let mut place_names = BTreeSet::new();
    for name in &description.places {
        if !is_valid_identifier(name) {
            errors.push(ValidationError::InvalidName { name: name.clone() });
        }
        if !place_names.insert(name.clone()) {
            errors.push(ValidationError::DuplicateNode { name: name.clone() });
        }
    }
    let mut transition_names = BTreeSet::new();
    for name in &description.transitions {
        if !is_valid_identifier(name) {
            errors.push(ValidationError::InvalidName { name: name.clone() });
        }
        if !transition_names.insert(name.clone()) {
            errors.push(ValidationError::DuplicateNode { name: name.clone() });
        }
        if place_names.contains(name) {
            errors.push(ValidationError::NameClash { name: name.clone() });
        }
    }

    let places: Vec<PlaceId> = place_names.iter().map(|n| PlaceId(n.clone())).collect();
    let transitions: Vec<TransitionId> = transition_names
        .iter()
        .map(|n| TransitionId(n.clone()))
        .collect();
    let place_index: HashMap<String, PlaceIdx> = places
        .iter()
        .enumerate()
        .map(|(i, p)| (p.0.clone(), PlaceIdx(i)))
        .collect();
    let transition_index: HashMap<String, TransitionIdx> = transitions
        .iter()
        .enumerate()
        .map(|(i, t)| (t.0.clone(), TransitionIdx(i)))
        .collect();

    let mut inputs: Vec<Vec<InputArc>> = vec![Vec::new(); transitions.len()];
    let mut outputs: Vec<Vec<OutputArc>> = vec![Vec::new(); transitions.len()];
    let mut seen_inputs = BTreeSet::new();
    let mut seen_outputs = BTreeSet::new();

    for arc in &description.input_arcs {
        let context = format!("{} arc {} -> {}", arc.kind.tag(), arc.place, arc.transition);
        let place = lookup(&place_index, &arc.place, &context, &mut errors);
        let transition = lookup(&transition_index, &arc.transition, &context, &mut errors);
        if arc.kind.weight() == Some(0) {
            errors.push(ValidationError::ZeroWeight {
                from: arc.place.clone(),
                to: arc.transition.clone(),
            });
        }
        if !seen_inputs.insert((arc.place.clone(), arc.transition.clone(), arc.kind.tag())) {
            errors.push(ValidationError::DuplicateArc {
                from: arc.place.clone(),
                to: arc.transition.clone(),
                kind: arc.kind.tag().to_string(),
            });
            continue;
        }
        if let (Some(place), Some(transition)) = (place, transition) {
            inputs[transition.0].push(InputArc {
                place,
                kind: arc.kind,
            });
        }
    }

    for arc in &description.output_arcs {
        let context = format!("arc {} -> {}", arc.transition, arc.place);
        let transition = lookup(&transition_index, &arc.transition, &context, &mut errors);
        let place = lookup(&place_index, &arc.place, &context, &mut errors);
        if arc.weight == 0 {
            errors.push(ValidationError::ZeroWeight {
                from: arc.transition.clone(),
                to: arc.place.clone(),
            });
        }
        if !seen_outputs.insert((arc.transition.clone(), arc.place.clone())) {
            errors.push(ValidationError::DuplicateArc {
                from: arc.transition.clone(),
                to: arc.place.clone(),
                kind: ArcTag::Normal.to_string(),
            });
            continue;
        }
        if let (Some(place), Some(transition)) = (place, transition) {
            outputs[transition.0].push(OutputArc {
                place,
                weight: arc.weight,
            });
        }
    }

    let mut marking = Marking::zeros(places.len());
    for place in &places {
        match initial.get(place.as_str()) {
            Some(&count) => marking.set(place_index[place.as_str()], count),
            None => errors.push(ValidationError::MarkingMissingPlace {
                place: place.0.clone(),
            }),
        }
    }
    for name in initial.keys() {
        if !place_index.contains_key(name) {
            errors.push(ValidationError::UnknownNode {
                name: name.clone(),
                context: "initial marking".to_owned(),
            });
        }
    }

    if !errors.is_empty() {
        return Err(ValidationErrors(errors));
    }

    for arcs in &mut inputs {
        arcs.sort_by_key(|a| (a.place, a.kind.tag()));
    }
    for arcs in &mut outputs {
        arcs.sort_by_key(|a| a.place);
    }

    Ok((
        PetriNet {
            places,
            transitions,
            place_index,
            transition_index,
            inputs,
            outputs,
        },
        marking,
    ))
}

fn lookup<I: Copy>(
    index: &HashMap<String, I>,
    name: &str,
    context: &str,
    errors: &mut Vec<ValidationError>,
) -> Option<I> {
    let found = index.get(name).copied();
    if found.is_none() {
        errors.push(ValidationError::UnknownNode {
            name: name.to_owned(),
            context: context.to_owned(),
        });
    }
    found
}

impl PetriNet {
    /// Places in lexicographic order.
    pub fn places(&self) -> &[PlaceId] {
        &self.places
    }

    /// Transitions in lexicographic order.
    pub fn transitions(&self) -> &[TransitionId] {
        &self.transitions
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn place_indices(&self) -> impl Iterator<Item = PlaceIdx> {
        (0..self.places.len()).map(PlaceIdx)
    }

    pub fn transition_indices(&self) -> impl Iterator<Item = TransitionIdx> {
        (0..self.transitions.len()).map(TransitionIdx)
    }

    pub fn place(&self, idx: PlaceIdx) -> &PlaceId {
        &self.places[idx.0]
    }

    pub fn transition(&self, idx: TransitionIdx) -> &TransitionId {
        &self.transitions[idx.0]
    }

    pub fn place_index(&self, name: &str) -> Result<PlaceIdx, UnknownNode> {
        self.place_index
            .get(name)
            .copied()
            .ok_or_else(|| UnknownNode(name.to_owned()))
    }

    pub fn transition_index(&self, name: &str) -> Result<TransitionIdx, UnknownNode> {
        self.transition_index
            .get(name)
            .copied()
            .ok_or_else(|| UnknownNode(name.to_owned()))
    }

    /// Input arcs of `t`, sorted by place then kind.
    pub fn inputs(&self, t: TransitionIdx) -> &[InputArc] {
        &self.inputs[t.0]
    }

    /// Output arcs of `t`, sorted by place.
    pub fn outputs(&self, t: TransitionIdx) -> &[OutputArc] {
        &self.outputs[t.0]
    }

    /// Pre-set of `t` by name, with arc kinds.
    pub fn preset(&self, t: &str) -> Result<Vec<(PlaceId, ArcKind)>, UnknownNode> {
        let idx = self.transition_index(t)?;
        Ok(self.inputs[idx.0]
            .iter()
            .map(|a| (self.place(a.place).clone(), a.kind))
            .collect())
    }

    /// Post-set of `t` by name, with weights.
    pub fn postset(&self, t: &str) -> Result<Vec<(PlaceId, u64)>, UnknownNode> {
        let idx = self.transition_index(t)?;
        Ok(self.outputs[idx.0]
            .iter()
            .map(|a| (self.place(a.place).clone(), a.weight))
            .collect())
    }

    pub fn has_arc_kind(&self, tag: ArcTag) -> bool {
        self.inputs.iter().flatten().any(|a| a.kind.tag() == tag)
    }

    /// Converts back to the name-based form. Validating the result yields an
    /// equal net.
    pub fn to_description(&self) -> NetDescription {
        let mut d = NetDescription {
            places: self.places.iter().map(|p| p.0.clone()).collect(),
            transitions: self.transitions.iter().map(|t| t.0.clone()).collect(),
            ..NetDescription::default()
        };
        for t in self.transition_indices() {
            for arc in self.inputs(t) {
                d.input_arcs.push(InputArcSpec {
                    place: self.place(arc.place).0.clone(),
                    transition: self.transition(t).0.clone(),
                    kind: arc.kind,
                });
            }
            for arc in self.outputs(t) {
                d.output_arcs.push(OutputArcSpec {
                    transition: self.transition(t).0.clone(),
                    place: self.place(arc.place).0.clone(),
                    weight: arc.weight,
                });
            }
        }
        d
    }

    /// Marking with every place at zero except the listed ones.
    pub fn marking_from<'a, I>(&self, counts: I) -> Result<Marking, UnknownNode>
    where
        I: IntoIterator<Item = (&'a str, u64)>,
    {
        let mut m = Marking::zeros(self.places.len());
        for (name, count) in counts {
            m.set(self.place_index(name)?, count);
        }
        Ok(m)
    }

    pub fn marking_to_map(&self, marking: &Marking) -> BTreeMap<String, u64> {
        self.place_indices()
            .map(|p| (self.place(p).0.clone(), marking.get(p)))
            .collect()
    }

    pub fn tokens(&self, marking: &Marking, place: &str) -> Result<u64, UnknownNode> {
        Ok(marking.get(self.place_index(place)?))
    }

    /// Renders a marking as `{a:1, b:0}`.
    pub fn display_marking(&self, marking: &Marking) -> String {
        let body = self
            .place_indices()
            .map(|p| format!("{}:{}", self.place(p), marking.get(p)))
            .collect::<Vec<_>>()
            .join(", ");
        format!("{{{body}}}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown node `{0}`")]
pub struct UnknownNode(pub String);
