//! Horizon-bounded property checks. A negative answer only means "not within
//! `k` steps", never a global statement about the net.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::ops::ControlFlow;

use serde::Serialize;

use crate::engine::{
    enabled_transitions, walk, EngineError, EnumerationConfig, ExecutionSequence, LayeredGraph,
    SemanticsMode,
};
use crate::model::{validate, Marking, PetriNet, PlaceIdx};

use super::AnalysisError;

/// Largest number of candidate place subsets [`p_invariants`] will test.
pub const MAX_SUBSETS: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reachability {
    pub horizon: usize,
    /// Earliest step at which the target is met, if any.
    pub step: Option<usize>,
    pub witness: Option<ExecutionSequence>,
}

impl Reachability {
    pub fn reachable(&self) -> bool {
        self.step.is_some()
    }
}

fn resolve_partial(
    net: &PetriNet,
    target: &BTreeMap<String, u64>,
) -> Result<Vec<(PlaceIdx, u64)>, AnalysisError> {
    target
        .iter()
        .map(|(p, &n)| Ok((net.place_index(p)?, n)))
        .collect()
}

/// Searches steps `0..=k` for a marking agreeing with the partial `target`.
pub fn reachable(
    net: &PetriNet,
    initial: &Marking,
    target: &BTreeMap<String, u64>,
    config: &EnumerationConfig,
) -> Result<Reachability, AnalysisError> {
    let target = resolve_partial(net, target)?;
    let graph = LayeredGraph::build(net, initial, config)?;
    for step in 0..=config.steps {
        for &node in graph.layer(step) {
            let m = graph.marking(node);
            if target.iter().all(|&(p, n)| m.get(p) == n) {
                return Ok(Reachability {
                    horizon: config.steps,
                    step: Some(step),
                    witness: Some(graph.sequence_through(node)),
                });
            }
        }
    }
    Ok(Reachability {
        horizon: config.steps,
        step: None,
        witness: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Index in canonical enumeration order.
    pub sequence: u64,
    pub step: usize,
    pub place: String,
    pub count: u64,
}

/// Every `(sequence, step, place)` at steps `0..=k` whose count exceeds
/// `bound`. Empty means k-bounded.
pub fn bounded(
    net: &PetriNet,
    initial: &Marking,
    bound: u64,
    config: &EnumerationConfig,
) -> Result<Vec<Violation>, AnalysisError> {
    let mut out = Vec::new();
    let mut index = 0u64;
    walk(net, initial, config, |v| {
        for step in 0..=v.horizon() {
            let m = v.marking(step);
            for p in net.place_indices() {
                if m.get(p) > bound {
                    out.push(Violation {
                        sequence: index,
                        step,
                        place: net.place(p).to_string(),
                        count: m.get(p),
                    });
                }
            }
        }
        index += 1;
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deadlock {
    pub sequence: u64,
    pub step: usize,
    pub marking: Marking,
}

/// Steps `0..=k` of every sequence at which no transition is enabled.
pub fn deadlocks(
    net: &PetriNet,
    initial: &Marking,
    config: &EnumerationConfig,
) -> Result<Vec<Deadlock>, AnalysisError> {
    let mut dead: HashMap<Marking, bool> = HashMap::new();
    let mut out = Vec::new();
    let mut index = 0u64;
    walk(net, initial, config, |v| {
        for step in 0..=v.horizon() {
            let m = v.marking(step);
            let is_dead = *dead
                .entry(m.clone())
                .or_insert_with(|| enabled_transitions(net, m).is_empty());
            if is_dead {
                out.push(Deadlock {
                    sequence: index,
                    step,
                    marking: m.clone(),
                });
            }
        }
        index += 1;
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// Name of the source transition added for `place` by [`liveness_basic`].
pub fn source_name(place: &str) -> String {
    format!("src_{place}")
}

/// `net` plus one weight-1 source transition `src_<p>` per place.
pub fn with_sources(
    net: &PetriNet,
    initial: &Marking,
) -> Result<(PetriNet, Marking), AnalysisError> {
    let mut d = net.to_description();
    for p in net.places() {
        let name = source_name(p.as_str());
        if net.transition_index(&name).is_ok() || net.place_index(&name).is_ok() {
            return Err(AnalysisError::ReservedName(name));
        }
        d = d.transition(&name).output(&name, p.as_str(), 1);
    }
    let m0 = net.marking_to_map(initial);
    validate(&d, &m0).map_err(|e| AnalysisError::Invalid(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Liveness {
    pub horizon: usize,
    pub fires: bool,
    /// A sequence of the source-augmented net in which the transition fires.
    pub witness: Option<ExecutionSequence>,
    pub augmented: PetriNet,
}

/// Whether `transition` fires within `k` steps once every place is fed by a
/// source, under interleaved semantics.
pub fn liveness_basic(
    net: &PetriNet,
    initial: &Marking,
    transition: &str,
    config: &EnumerationConfig,
) -> Result<Liveness, AnalysisError> {
    net.transition_index(transition)?;
    let (augmented, m0) = with_sources(net, initial)?;
    let t = augmented.transition_index(transition)?;
    let config = EnumerationConfig {
        semantics: SemanticsMode::Interleaved,
        ..*config
    };
    let graph = LayeredGraph::build(&augmented, &m0, &config)?;
    for step in 0..=config.steps {
        for &node in graph.layer(step) {
            if let Some(e) = graph.edges(node).iter().position(|(f, _)| f.contains(t)) {
                return Ok(Liveness {
                    horizon: config.steps,
                    fires: true,
                    witness: Some(graph.sequence_via(node, e)),
                    augmented,
                });
            }
        }
    }
    Ok(Liveness {
        horizon: config.steps,
        fires: false,
        witness: None,
        augmented,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TInvariant {
    /// Transition multiset as name -> count.
    pub transitions: BTreeMap<String, u64>,
    /// Firing order in the first sequence found, restoring `start`.
    pub witness: Vec<String>,
    #[serde(skip)]
    pub start: Marking,
}

/// Multisets of transitions that return an interleaved execution to a marking
/// it held earlier, observed over steps `0..=k`.
pub fn t_invariants(
    net: &PetriNet,
    initial: &Marking,
    config: &EnumerationConfig,
) -> Result<Vec<TInvariant>, AnalysisError> {
    let config = EnumerationConfig {
        semantics: SemanticsMode::Interleaved,
        ..*config
    };
    let mut found: BTreeMap<BTreeMap<String, u64>, TInvariant> = BTreeMap::new();
    walk(net, initial, &config, |v| {
        let k = v.horizon();
        for i in 0..k {
            let mut counts: BTreeMap<String, u64> = BTreeMap::new();
            let mut order = Vec::new();
            for j in i + 1..=k {
                for &t in v.firing(j - 1).members() {
                    let name = net.transition(t).to_string();
                    *counts.entry(name.clone()).or_default() += 1;
                    order.push(name);
                }
                if !counts.is_empty()
                    && v.marking(j) == v.marking(i)
                    && !found.contains_key(&counts)
                {
                    found.insert(
                        counts.clone(),
                        TInvariant {
                            transitions: counts.clone(),
                            witness: order.clone(),
                            start: v.marking(i).clone(),
                        },
                    );
                }
            }
        }
        ControlFlow::Continue(())
    })?;
    Ok(found.into_values().collect())
}

fn binomial_sum(n: u64, max: u64) -> u64 {
    // number of non-empty subsets of size <= max, saturating
    let mut total: u64 = 0;
    let mut c: u128 = 1;
    for r in 1..=max.min(n) {
        c = c * (n - r + 1) as u128 / r as u128;
        total = total.saturating_add(c.min(u64::MAX as u128) as u64);
    }
    total
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PInvariants {
    pub horizon: usize,
    pub sets: Vec<Vec<String>>,
}

/// Place sets of size at most `max_subset_size` whose total token count never
/// changes between consecutive steps `0..=k` of any interleaved sequence.
pub fn p_invariants(
    net: &PetriNet,
    initial: &Marking,
    max_subset_size: usize,
    config: &EnumerationConfig,
) -> Result<PInvariants, AnalysisError> {
    let n = net.place_count();
    let candidates = binomial_sum(n as u64, max_subset_size as u64);
    if candidates > MAX_SUBSETS {
        return Err(AnalysisError::SubsetLimitExceeded {
            places: n,
            max_subset_size,
            candidates,
        });
    }
    let config = EnumerationConfig {
        semantics: SemanticsMode::Interleaved,
        ..*config
    };
    // every edge of the layered graph lies on some sequence, so the distinct
    // step deltas up to step k are exactly its edge deltas
    let graph = LayeredGraph::build(net, initial, &config)?;
    let mut deltas: HashSet<Vec<i128>> = HashSet::new();
    for step in 0..config.steps {
        for &node in graph.layer(step) {
            let from = graph.marking(node);
            for (_, next) in graph.edges(node) {
                let to = graph.marking(*next);
                let d: Vec<i128> = net
                    .place_indices()
                    .map(|p| to.get(p) as i128 - from.get(p) as i128)
                    .collect();
                if d.iter().any(|&x| x != 0) {
                    deltas.insert(d);
                }
            }
        }
    }
    let deltas: Vec<Vec<i128>> = deltas.into_iter().collect();
    let mut sets = Vec::new();
    let mut chosen = Vec::new();
    subsets(n, max_subset_size, 0, &mut chosen, &mut |set| {
        if deltas
            .iter()
            .all(|d| set.iter().map(|&p| d[p]).sum::<i128>() == 0)
        {
            sets.push(
                set.iter()
                    .map(|&p| net.place(PlaceIdx(p)).to_string())
                    .collect(),
            );
        }
    });
    sets.sort_by(|a: &Vec<String>, b: &Vec<String>| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(PInvariants {
        horizon: config.steps,
        sets,
    })
}

fn subsets(
    n: usize,
    max: usize,
    from: usize,
    chosen: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    for p in from..n {
        chosen.push(p);
        visit(chosen);
        if chosen.len() < max {
            subsets(n, max, p + 1, chosen, visit);
        }
        chosen.pop();
    }
}

/// Distinct token counts seen per place, for picking a bound.
pub fn observed_max(
    net: &PetriNet,
    initial: &Marking,
    config: &EnumerationConfig,
) -> Result<BTreeMap<String, u64>, EngineError> {
    let graph = LayeredGraph::build(net, initial, config)?;
    let mut out: BTreeMap<String, u64> = net.places().iter().map(|p| (p.to_string(), 0)).collect();
    for step in 0..=config.steps {
        for &node in graph.layer(step) {
            for p in net.place_indices() {
                let e = out.get_mut(net.place(p).as_str()).expect("known place");
                *e = (*e).max(graph.marking(node).get(p));
            }
        }
    }
    Ok(out)
}

/// Places in `sets` as index sets, for re-checking results.
pub fn place_sets(net: &PetriNet, sets: &[Vec<String>]) -> Vec<BTreeSet<PlaceIdx>> {
    sets.iter()
        .map(|s| {
            s.iter()
                .map(|p| net.place_index(p).expect("known place"))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{fire, ResetMode};
    use crate::model::tests::glycolysis;
    use crate::model::{ArcKind, NetDescription};

    fn build(d: NetDescription, m0: &[(&str, u64)]) -> (PetriNet, Marking) {
        let mut marking: BTreeMap<String, u64> = d.places.iter().map(|p| (p.clone(), 0)).collect();
        for (p, n) in m0 {
            marking.insert((*p).to_owned(), *n);
        }
        validate(&d, &marking).unwrap()
    }

    fn cycle() -> (PetriNet, Marking) {
        build(
            NetDescription::new()
                .place("p1")
                .place("p2")
                .transition("t1")
                .transition("t2")
                .input("p1", "t1", ArcKind::Normal(1))
                .output("t1", "p2", 1)
                .input("p2", "t2", ArcKind::Normal(1))
                .output("t2", "p1", 1),
            &[("p1", 1)],
        )
    }

    fn target(pairs: &[(&str, u64)]) -> BTreeMap<String, u64> {
        pairs.iter().map(|(p, n)| ((*p).to_owned(), *n)).collect()
    }

    #[test]
    fn reachability_with_replayable_witness() {
        let (net, m0) = build(glycolysis(), &[]);
        let config = EnumerationConfig::new(5, SemanticsMode::Set);
        let r = reachable(&net, &m0, &target(&[("bpg13", 4)]), &config).unwrap();
        assert!(r.reachable());
        let w = r.witness.unwrap();
        let step = r.step.unwrap();
        assert_eq!(net.tokens(w.marking(step), "bpg13").unwrap(), 4);
        for s in 0..=w.horizon() {
            assert_eq!(
                &fire(&net, w.marking(s), w.firing(s), ResetMode::Contention).unwrap(),
                w.marking(s + 1)
            );
        }
        let max = EnumerationConfig::new(5, SemanticsMode::Maximal);
        assert!(!reachable(&net, &m0, &target(&[("bpg13", 1)]), &max)
            .unwrap()
            .reachable());
        let zero = EnumerationConfig::new(0, SemanticsMode::Set);
        let r = reachable(&net, &m0, &net.marking_to_map(&m0), &zero).unwrap();
        assert_eq!(r.step, Some(0));
        assert!(matches!(
            reachable(&net, &m0, &target(&[("x", 1)]), &zero),
            Err(AnalysisError::UnknownName(_))
        ));
    }

    #[test]
    fn boundedness() {
        let (net, m0) = build(glycolysis(), &[]);
        let config = EnumerationConfig::new(5, SemanticsMode::Maximal);
        let v = bounded(&net, &m0, 3, &config).unwrap();
        assert!(v
            .iter()
            .any(|v| v.place == "dhap" && v.step == 5 && v.count == 4));
        let max = observed_max(&net, &m0, &config).unwrap();
        let bound = *max.values().max().unwrap();
        assert!(bounded(&net, &m0, bound, &config).unwrap().is_empty());
        assert!(!bounded(&net, &m0, bound - 1, &config).unwrap().is_empty());
        let (net, m0) = cycle();
        assert!(!bounded(&net, &m0, 0, &config).unwrap().is_empty());
    }

    #[test]
    fn deadlock_detection() {
        let (net, m0) = build(glycolysis(), &[]);
        for k in 0..4 {
            assert!(
                deadlocks(&net, &m0, &EnumerationConfig::new(k, SemanticsMode::Set))
                    .unwrap()
                    .is_empty()
            );
        }
        let (net, m0) = build(
            NetDescription::new()
                .place("p")
                .transition("t")
                .input("p", "t", ArcKind::Normal(1)),
            &[],
        );
        let d = deadlocks(&net, &m0, &EnumerationConfig::new(1, SemanticsMode::Set)).unwrap();
        assert_eq!(d[0].step, 0);
        let (net, m0) = build(NetDescription::new().place("p"), &[("p", 2)]);
        let d = deadlocks(&net, &m0, &EnumerationConfig::new(0, SemanticsMode::Set)).unwrap();
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn liveness_with_sources() {
        let (net, m0) = build(glycolysis(), &[]);
        let config = EnumerationConfig::new(2, SemanticsMode::Set);
        let l = liveness_basic(&net, &m0, "t6", &config).unwrap();
        assert!(l.fires);
        let w = l.witness.unwrap();
        let t6 = l.augmented.transition_index("t6").unwrap();
        assert!(w.firings().iter().any(|f| f.contains(t6)));
        assert!(w.firings().iter().all(|f| f.len() <= 1));
        // one step is not enough: g3p is empty at step 0
        let l = liveness_basic(
            &net,
            &m0,
            "t6",
            &EnumerationConfig::new(0, SemanticsMode::Set),
        )
        .unwrap();
        assert!(!l.fires);
        assert!(matches!(
            liveness_basic(&net, &m0, "t9", &config),
            Err(AnalysisError::UnknownName(_))
        ));
    }

    #[test]
    fn liveness_despite_inhibitor_fed_by_source() {
        let (net, m0) = build(
            NetDescription::new()
                .place("a")
                .place("b")
                .transition("g")
                .input("a", "g", ArcKind::Inhibitor)
                .output("g", "b", 1),
            &[],
        );
        let l = liveness_basic(
            &net,
            &m0,
            "g",
            &EnumerationConfig::new(2, SemanticsMode::Set),
        )
        .unwrap();
        assert!(l.fires);
    }

    #[test]
    fn unreachable_read_threshold() {
        let (net, m0) = build(
            NetDescription::new()
                .place("h")
                .transition("syn")
                .input("h", "syn", ArcKind::Read(25)),
            &[],
        );
        // one source token per step reaches 25 only after 25 steps
        let l = liveness_basic(
            &net,
            &m0,
            "syn",
            &EnumerationConfig::new(10, SemanticsMode::Set),
        )
        .unwrap();
        assert!(!l.fires);
    }

    #[test]
    fn reserved_source_names() {
        let (net, m0) = build(NetDescription::new().place("p").transition("src_p"), &[]);
        assert!(matches!(
            liveness_basic(
                &net,
                &m0,
                "src_p",
                &EnumerationConfig::new(1, SemanticsMode::Set)
            ),
            Err(AnalysisError::ReservedName(_))
        ));
    }

    #[test]
    fn two_step_cycle_is_a_t_invariant() {
        let (net, m0) = cycle();
        let inv = t_invariants(&net, &m0, &EnumerationConfig::new(2, SemanticsMode::Set)).unwrap();
        assert_eq!(inv.len(), 1);
        assert_eq!(inv[0].transitions, target(&[("t1", 1), ("t2", 1)]));
        // replaying the witness restores the start marking
        let mut m = inv[0].start.clone();
        for t in &inv[0].witness {
            let f = crate::engine::FiringSet::from_names(&net, &[t]).unwrap();
            m = fire(&net, &m, &f, ResetMode::Contention).unwrap();
        }
        assert_eq!(m, inv[0].start);
        assert!(
            t_invariants(&net, &m0, &EnumerationConfig::new(0, SemanticsMode::Set))
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn draining_net_has_no_t_invariants() {
        let (net, m0) = build(
            NetDescription::new()
                .place("a")
                .place("b")
                .transition("t")
                .input("a", "t", ArcKind::Normal(1))
                .output("t", "b", 1),
            &[("a", 3)],
        );
        assert!(
            t_invariants(&net, &m0, &EnumerationConfig::new(4, SemanticsMode::Set))
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn p_invariants_observed() {
        let (net, m0) = build(
            NetDescription::new()
                .place("p1")
                .place("p2")
                .transition("t1")
                .input("p1", "t1", ArcKind::Normal(1))
                .output("t1", "p2", 1),
            &[("p1", 1)],
        );
        let r = p_invariants(&net, &m0, 2, &EnumerationConfig::new(2, SemanticsMode::Set)).unwrap();
        assert_eq!(r.sets, [vec!["p1".to_owned(), "p2".to_owned()]]);
        let (net, m0) = build(glycolysis(), &[]);
        let r = p_invariants(&net, &m0, 4, &EnumerationConfig::new(3, SemanticsMode::Set)).unwrap();
        assert!(!r.sets.contains(&vec!["f16bp".to_owned()]));
        assert!(r.sets.iter().all(|s| !s.is_empty()));
    }

    #[test]
    fn subset_limit() {
        let mut d = NetDescription::new();
        for i in 0..40 {
            d = d.place(&format!("p{i}"));
        }
        let (net, m0) = build(d, &[]);
        assert!(matches!(
            p_invariants(
                &net,
                &m0,
                20,
                &EnumerationConfig::new(1, SemanticsMode::Set)
            ),
            Err(AnalysisError::SubsetLimitExceeded { .. })
        ));
        assert_eq!(binomial_sum(4, 2), 10);
        assert_eq!(binomial_sum(3, 5), 7);
    }
}
