//! Shared helpers for integration tests: net loading, a random net corpus and
//! a brute-force enumerator written independently of the engine.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use pnet_core::engine::{ExecutionSequence, ResetMode, SemanticsMode};
use pnet_core::io::parse_net;
use pnet_core::model::{validate, ArcKind, Marking, NetDescription, PetriNet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn nets_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("nets")
}

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn load(name: &str) -> (PetriNet, Marking) {
    let text = std::fs::read_to_string(nets_dir().join(name)).expect("net file");
    let parsed = parse_net(&text).expect("valid net");
    (parsed.net, parsed.marking)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixtures_dir().join(name)).expect("fixture")
}

/// A random net plus the description it was built from.
pub struct RandomNet {
    pub seed: u64,
    pub description: NetDescription,
    pub initial: BTreeMap<String, u64>,
    pub net: PetriNet,
    pub marking: Marking,
}

/// At most 4 places and 4 transitions, weights 1..=2, initial tokens 0..=2,
/// and at most one reset, inhibitor or read arc.
pub fn random_net(seed: u64) -> RandomNet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let np = rng.random_range(1..=4);
    let nt = rng.random_range(1..=4);
    let places: Vec<String> = (0..np).map(|i| format!("p{i}")).collect();
    let transitions: Vec<String> = (0..nt).map(|i| format!("t{i}")).collect();
    let mut d = NetDescription::new();
    for p in &places {
        d = d.place(p);
    }
    for t in &transitions {
        d = d.transition(t);
    }
    for p in &places {
        for t in &transitions {
            if rng.random_bool(0.35) {
                d = d.input(p, t, ArcKind::Normal(rng.random_range(1..=2)));
            }
            if rng.random_bool(0.35) {
                d = d.output(t, p, rng.random_range(1..=2));
            }
        }
    }
    let p = &places[rng.random_range(0..np)];
    let t = &transitions[rng.random_range(0..nt)];
    d = match rng.random_range(0..4) {
        0 => d,
        1 => d.input(p, t, ArcKind::Reset),
        2 => d.input(p, t, ArcKind::Inhibitor),
        _ => d.input(p, t, ArcKind::Read(rng.random_range(1..=2))),
    };
    let initial: BTreeMap<String, u64> = places
        .iter()
        .map(|p| (p.clone(), rng.random_range(0..=2)))
        .collect();
    let (net, marking) = validate(&d, &initial).expect("generated net is valid");
    RandomNet {
        seed,
        description: d,
        initial,
        net,
        marking,
    }
}

/// One step as the oracle sees it: fired transition names, then the marking
/// by place name.
pub type Step = (BTreeSet<String>, BTreeMap<String, u64>);

/// A sequence: the firing sets at `0..=k` with the marking before each, plus
/// the marking after the last.
pub type OracleSequence = (Vec<Step>, BTreeMap<String, u64>);

/// Independent reading of the firing rules, straight from the definitions.
pub struct Oracle {
    places: Vec<String>,
    transitions: Vec<String>,
    // per transition: (place index, kind)
    pre: Vec<Vec<(usize, ArcKind)>>,
    post: Vec<Vec<(usize, u64)>>,
}

impl Oracle {
    pub fn new(d: &NetDescription) -> Self {
        let places = d.places.clone();
        let transitions = d.transitions.clone();
        let pi = |n: &str| places.iter().position(|p| p == n).unwrap();
        let ti = |n: &str| transitions.iter().position(|t| t == n).unwrap();
        let mut pre = vec![Vec::new(); transitions.len()];
        let mut post = vec![Vec::new(); transitions.len()];
        for a in &d.input_arcs {
            pre[ti(&a.transition)].push((pi(&a.place), a.kind));
        }
        for a in &d.output_arcs {
            post[ti(&a.transition)].push((pi(&a.place), a.weight));
        }
        Oracle {
            places,
            transitions,
            pre,
            post,
        }
    }

    fn enabled(&self, m: &[u64], t: usize) -> bool {
        self.pre[t].iter().all(|&(p, kind)| match kind {
            ArcKind::Normal(w) | ArcKind::Read(w) => m[p] >= w,
            ArcKind::Inhibitor => m[p] == 0,
            ArcKind::Reset => true,
        })
    }

    fn admissible(&self, m: &[u64], set: u32, mode: ResetMode) -> bool {
        let members: Vec<usize> = (0..self.transitions.len())
            .filter(|t| set & (1 << t) != 0)
            .collect();
        if !members.iter().all(|&t| self.enabled(m, t)) {
            return false;
        }
        (0..self.places.len()).all(|p| {
            let mut need = 0u64;
            for &t in &members {
                for &(q, kind) in &self.pre[t] {
                    if q != p {
                        continue;
                    }
                    need += match (kind, mode) {
                        (ArcKind::Normal(w), _) => w,
                        (ArcKind::Reset, ResetMode::Contention) => m[p],
                        _ => 0,
                    };
                }
            }
            need <= m[p]
        })
    }

    fn next(&self, m: &[u64], set: u32) -> Vec<u64> {
        let mut out = m.to_vec();
        let mut reset = vec![false; m.len()];
        let mut produced = vec![0u64; m.len()];
        for t in (0..self.transitions.len()).filter(|t| set & (1 << t) != 0) {
            for &(p, kind) in &self.pre[t] {
                match kind {
                    ArcKind::Normal(w) => out[p] -= w,
                    ArcKind::Reset => reset[p] = true,
                    _ => {}
                }
            }
            for &(p, w) in &self.post[t] {
                produced[p] += w;
            }
        }
        for p in 0..m.len() {
            out[p] = if reset[p] {
                produced[p]
            } else {
                out[p] + produced[p]
            };
        }
        out
    }

    /// Whether adding any single enabled outsider breaks admissibility.
    pub fn is_maximal(&self, m: &[u64], set: u32, mode: ResetMode) -> bool {
        (0..self.transitions.len())
            .filter(|t| set & (1 << t) == 0 && self.enabled(m, *t))
            .all(|t| !self.admissible(m, set | (1 << t), mode))
    }

    fn choices(&self, m: &[u64], semantics: SemanticsMode, mode: ResetMode) -> Vec<u32> {
        (0u32..1 << self.transitions.len())
            .filter(|&s| self.admissible(m, s, mode))
            .filter(|&s| match semantics {
                SemanticsMode::Set => true,
                SemanticsMode::Maximal => self.is_maximal(m, s, mode),
                SemanticsMode::Interleaved => s.count_ones() <= 1,
            })
            .collect()
    }

    fn named(&self, m: &[u64]) -> BTreeMap<String, u64> {
        self.places.iter().cloned().zip(m.iter().copied()).collect()
    }

    fn names(&self, set: u32) -> BTreeSet<String> {
        (0..self.transitions.len())
            .filter(|t| set & (1 << t) != 0)
            .map(|t| self.transitions[t].clone())
            .collect()
    }

    /// Every sequence with firings at steps `0..=k`.
    pub fn sequences(
        &self,
        initial: &BTreeMap<String, u64>,
        k: usize,
        semantics: SemanticsMode,
        mode: ResetMode,
    ) -> BTreeSet<OracleSequence> {
        let m0: Vec<u64> = self.places.iter().map(|p| initial[p]).collect();
        let mut out = BTreeSet::new();
        let mut prefix = Vec::new();
        self.extend(&m0, k, semantics, mode, &mut prefix, &mut out);
        out
    }

    fn extend(
        &self,
        m: &[u64],
        remaining: usize,
        semantics: SemanticsMode,
        mode: ResetMode,
        prefix: &mut Vec<Step>,
        out: &mut BTreeSet<OracleSequence>,
    ) {
        for set in self.choices(m, semantics, mode) {
            let next = self.next(m, set);
            prefix.push((self.names(set), self.named(m)));
            if remaining == 0 {
                out.insert((prefix.clone(), self.named(&next)));
            } else {
                self.extend(&next, remaining - 1, semantics, mode, prefix, out);
            }
            prefix.pop();
        }
    }
}

/// Native sequences in the oracle's name-based form.
pub fn to_oracle_form(net: &PetriNet, seqs: &[ExecutionSequence]) -> BTreeSet<OracleSequence> {
    seqs.iter()
        .map(|s| {
            let steps = (0..=s.horizon())
                .map(|i| {
                    let names = s
                        .firing(i)
                        .names(net)
                        .into_iter()
                        .map(str::to_owned)
                        .collect();
                    (names, net.marking_to_map(s.marking(i)))
                })
                .collect();
            (steps, net.marking_to_map(s.successor_marking()))
        })
        .collect()
}
