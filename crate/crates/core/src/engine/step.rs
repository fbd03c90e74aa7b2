use crate::model::{ArcKind, Marking, PetriNet, PlaceIdx, TransitionIdx, UnknownNode};

use super::{EngineError, FiringSet, ResetMode, SemanticsMode};

/// Normal and read arcs meet their weights and every inhibitor place is
/// empty. Reset arcs never block: a marking-dependent weight is met by
/// definition.
pub fn enabled(net: &PetriNet, marking: &Marking, t: TransitionIdx) -> bool {
    net.inputs(t).iter().all(|arc| {
        let have = marking.get(arc.place);
        match arc.kind {
            ArcKind::Normal(w) | ArcKind::Read(w) => have >= w,
            ArcKind::Inhibitor => have == 0,
            ArcKind::Reset => true,
        }
    })
}

/// [`enabled`] by transition name.
pub fn is_enabled(net: &PetriNet, marking: &Marking, t: &str) -> Result<bool, UnknownNode> {
    Ok(enabled(net, marking, net.transition_index(t)?))
}

pub fn enabled_transitions(net: &PetriNet, marking: &Marking) -> Vec<TransitionIdx> {
    net.transition_indices()
        .filter(|&t| enabled(net, marking, t))
        .collect()
}

/// Tokens each transition claims from each place, merged per place.
fn demand(
    net: &PetriNet,
    marking: &Marking,
    t: TransitionIdx,
    reset_mode: ResetMode,
) -> Vec<(PlaceIdx, u128)> {
    let mut out: Vec<(PlaceIdx, u128)> = Vec::new();
    for arc in net.inputs(t) {
        let amount = match (arc.kind, reset_mode) {
            (ArcKind::Normal(w), _) => w as u128,
            (ArcKind::Reset, ResetMode::Contention) => marking.get(arc.place) as u128,
            _ => 0,
        };
        if amount == 0 {
            continue;
        }
        // inputs are sorted by place, so equal places are adjacent
        match out.last_mut() {
            Some((p, a)) if *p == arc.place => *a += amount,
            _ => out.push((arc.place, amount)),
        }
    }
    out
}

/// Tokens a firing set removes from each place, indexed by [`PlaceIdx`].
///
/// Reset arcs count the whole current marking under
/// [`ResetMode::Contention`] and nothing under [`ResetMode::Standard`].
pub fn effective_consumption(
    net: &PetriNet,
    marking: &Marking,
    firing: &FiringSet,
    reset_mode: ResetMode,
) -> Vec<u128> {
    let mut total = vec![0u128; net.place_count()];
    for &t in firing.members() {
        for (p, amount) in demand(net, marking, t, reset_mode) {
            total[p.0] += amount;
        }
    }
    total
}

/// Every member is enabled and no place gives up more tokens than it holds.
pub fn admissible(
    net: &PetriNet,
    marking: &Marking,
    firing: &FiringSet,
    reset_mode: ResetMode,
) -> bool {
    firing.members().iter().all(|&t| enabled(net, marking, t))
        && effective_consumption(net, marking, firing, reset_mode)
            .iter()
            .zip(marking.counts())
            .all(|(&used, &have)| used <= have as u128)
}

/// Applies an admissible firing set.
///
/// Places emptied by a fired reset arc end up holding only what the set
/// produces into them; every other place loses its normal consumption and
/// gains its production.
pub fn fire(
    net: &PetriNet,
    marking: &Marking,
    firing: &FiringSet,
    reset_mode: ResetMode,
) -> Result<Marking, EngineError> {
    if !admissible(net, marking, firing, reset_mode) {
        return Err(EngineError::NotAdmissible);
    }
    apply(net, marking, firing)
}

pub(crate) fn apply(
    net: &PetriNet,
    marking: &Marking,
    firing: &FiringSet,
) -> Result<Marking, EngineError> {
    let mut next = marking.clone();
    let mut emptied = vec![false; net.place_count()];
    for &t in firing.members() {
        for arc in net.inputs(t) {
            match arc.kind {
                ArcKind::Normal(w) => {
                    let left = next
                        .get(arc.place)
                        .checked_sub(w)
                        .ok_or(EngineError::NotAdmissible)?;
                    next.set(arc.place, left);
                }
                ArcKind::Reset => emptied[arc.place.0] = true,
                ArcKind::Inhibitor | ArcKind::Read(_) => {}
            }
        }
    }
    for (i, _) in emptied.iter().enumerate().filter(|(_, &e)| e) {
        next.set(PlaceIdx(i), 0);
    }
    for &t in firing.members() {
        for arc in net.outputs(t) {
            let sum = next.get(arc.place).checked_add(arc.weight).ok_or_else(|| {
                EngineError::Overflow {
                    place: net.place(arc.place).to_string(),
                }
            })?;
            next.set(arc.place, sum);
        }
    }
    Ok(next)
}

/// All firing sets the semantics allows at `marking`, in canonical order.
pub fn firing_sets(
    net: &PetriNet,
    marking: &Marking,
    semantics: SemanticsMode,
    reset_mode: ResetMode,
) -> Vec<FiringSet> {
    let candidates: Vec<(TransitionIdx, Vec<(PlaceIdx, u128)>)> = enabled_transitions(net, marking)
        .into_iter()
        .map(|t| (t, demand(net, marking, t, reset_mode)))
        .collect();
    let capacity: Vec<u128> = marking.counts().iter().map(|&c| c as u128).collect();
    let fits = |used: &[u128], need: &[(PlaceIdx, u128)]| {
        need.iter().all(|&(p, a)| used[p.0] + a <= capacity[p.0])
    };

    let mut sets = match semantics {
        SemanticsMode::Interleaved => {
            let none = vec![0u128; capacity.len()];
            std::iter::once(FiringSet::empty())
                .chain(
                    candidates
                        .iter()
                        .filter(|(_, need)| fits(&none, need))
                        .map(|(t, _)| FiringSet(vec![*t])),
                )
                .collect()
        }
        SemanticsMode::Set | SemanticsMode::Maximal => {
            let mut out = Vec::new();
            let mut chosen = Vec::new();
            let mut used = vec![0u128; capacity.len()];
            admissible_subsets(
                &candidates,
                0,
                &mut chosen,
                &mut used,
                &fits,
                semantics == SemanticsMode::Maximal,
                &mut out,
            );
            out
        }
    };
    sets.sort();
    sets
}

/// Include/exclude recursion. Consumption only grows, so a member that does
/// not fit prunes every superset through it.
fn admissible_subsets<F>(
    candidates: &[(TransitionIdx, Vec<(PlaceIdx, u128)>)],
    next: usize,
    chosen: &mut Vec<TransitionIdx>,
    used: &mut Vec<u128>,
    fits: &F,
    maximal_only: bool,
    out: &mut Vec<FiringSet>,
) where
    F: Fn(&[u128], &[(PlaceIdx, u128)]) -> bool,
{
    if next == candidates.len() {
        // single-transition augmentation: any enabled outsider that still
        // fits disqualifies the set
        let is_maximal = || {
            candidates
                .iter()
                .filter(|(t, _)| !chosen.contains(t))
                .all(|(_, need)| !fits(used, need))
        };
        if !maximal_only || is_maximal() {
            out.push(FiringSet(chosen.clone()));
        }
        return;
    }
    let (t, need) = &candidates[next];
    if fits(used, need) {
        for &(p, a) in need {
            used[p.0] += a;
        }
        chosen.push(*t);
        admissible_subsets(candidates, next + 1, chosen, used, fits, maximal_only, out);
        chosen.pop();
        for &(p, a) in need {
            used[p.0] -= a;
        }
    }
    admissible_subsets(candidates, next + 1, chosen, used, fits, maximal_only, out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::glycolysis;
    use crate::model::{validate, NetDescription};
    use std::collections::BTreeMap;

    fn build(d: NetDescription) -> PetriNet {
        let m0: BTreeMap<_, _> = d.places.iter().map(|p| (p.clone(), 0)).collect();
        validate(&d, &m0).unwrap().0
    }

    fn with_dhap_removal() -> PetriNet {
        build(
            glycolysis()
                .transition("tr")
                .input("dhap", "tr", ArcKind::Reset),
        )
    }

    fn atp_synthase() -> PetriNet {
        build(
            NetDescription::new()
                .place("h_is")
                .place("atp")
                .transition("syn")
                .input("h_is", "syn", ArcKind::Read(25))
                .input("h_is", "syn", ArcKind::Normal(3))
                .output("syn", "atp", 1),
        )
    }

    fn names(net: &PetriNet, sets: &[FiringSet]) -> Vec<Vec<String>> {
        sets.iter()
            .map(|s| s.names(net).into_iter().map(String::from).collect())
            .collect()
    }

    #[test]
    fn source_transition_is_always_enabled() {
        let net = build(glycolysis());
        let m0 = Marking::zeros(4);
        assert!(is_enabled(&net, &m0, "t3").unwrap());
        assert!(!is_enabled(&net, &m0, "t4").unwrap());
        assert!(is_enabled(&net, &m0, "nope").is_err());
    }

    #[test]
    fn read_arc_threshold() {
        let net = atp_synthase();
        let at = |n| net.marking_from([("h_is", n)]).unwrap();
        assert!(!is_enabled(&net, &at(24), "syn").unwrap());
        assert!(is_enabled(&net, &at(25), "syn").unwrap());
        let syn = FiringSet::from_names(&net, &["syn"]).unwrap();
        let after = fire(&net, &at(30), &syn, ResetMode::Contention).unwrap();
        assert_eq!(net.tokens(&after, "h_is").unwrap(), 27);
        assert_eq!(net.tokens(&after, "atp").unwrap(), 1);
    }

    #[test]
    fn inhibitor_blocks_while_place_is_marked() {
        let net = build(
            NetDescription::new()
                .place("atp")
                .place("glu")
                .transition("gly1")
                .input("glu", "gly1", ArcKind::Normal(1))
                .input("atp", "gly1", ArcKind::Inhibitor)
                .output("gly1", "atp", 2),
        );
        for atp in 1..4 {
            let m = net.marking_from([("atp", atp), ("glu", 5)]).unwrap();
            assert!(!is_enabled(&net, &m, "gly1").unwrap());
        }
        let m = net.marking_from([("glu", 5)]).unwrap();
        assert!(is_enabled(&net, &m, "gly1").unwrap());
    }

    #[test]
    fn reset_contention_versus_standard() {
        let net = with_dhap_removal();
        let m = net.marking_from([("dhap", 1)]).unwrap();
        let both = FiringSet::from_names(&net, &["t5a", "tr"]).unwrap();
        let dhap = net.place_index("dhap").unwrap();

        let c = effective_consumption(&net, &m, &both, ResetMode::Contention);
        assert_eq!(c[dhap.0], 2);
        let s = effective_consumption(&net, &m, &both, ResetMode::Standard);
        assert_eq!(s[dhap.0], 1);

        assert!(!admissible(&net, &m, &both, ResetMode::Contention));
        assert!(admissible(&net, &m, &both, ResetMode::Standard));

        // nothing in the set produces dhap, so the reset leaves it empty
        let after = fire(&net, &m, &both, ResetMode::Standard).unwrap();
        assert_eq!(after.get(dhap), 0);
        assert_eq!(net.tokens(&after, "g3p").unwrap(), 1);
        assert_eq!(
            fire(&net, &m, &both, ResetMode::Contention),
            Err(EngineError::NotAdmissible)
        );
    }

    #[test]
    fn empty_set_consumes_nothing_and_changes_nothing() {
        let net = build(glycolysis());
        let m = net.marking_from([("g3p", 3), ("dhap", 1)]).unwrap();
        let none = FiringSet::empty();
        assert!(
            effective_consumption(&net, &m, &none, ResetMode::Contention)
                .iter()
                .all(|&c| c == 0)
        );
        assert!(admissible(&net, &m, &none, ResetMode::Contention));
        assert_eq!(fire(&net, &m, &none, ResetMode::Contention).unwrap(), m);
    }

    #[test]
    fn g3p_conflict() {
        let net = build(glycolysis());
        let pair = FiringSet::from_names(&net, &["t5b", "t6"]).unwrap();
        let one = net
            .marking_from([("g3p", 1), ("dhap", 1), ("f16bp", 1)])
            .unwrap();
        assert!(!admissible(&net, &one, &pair, ResetMode::Contention));
        let two = net
            .marking_from([("g3p", 2), ("dhap", 1), ("f16bp", 1)])
            .unwrap();
        assert!(admissible(&net, &two, &pair, ResetMode::Contention));
    }

    #[test]
    fn trace_step_two() {
        let net = build(glycolysis());
        let m = net
            .marking_from([("f16bp", 1), ("dhap", 1), ("g3p", 1)])
            .unwrap();
        let f = FiringSet::from_names(&net, &["t3", "t4", "t5a", "t5b"]).unwrap();
        let next = fire(&net, &m, &f, ResetMode::Contention).unwrap();
        assert_eq!(
            next,
            net.marking_from([("f16bp", 1), ("dhap", 2), ("g3p", 2)])
                .unwrap()
        );
    }

    #[test]
    fn maximal_sets_at_first_conflict() {
        let net = build(glycolysis());
        let m = net
            .marking_from([("f16bp", 1), ("dhap", 1), ("g3p", 1)])
            .unwrap();
        let sets = firing_sets(&net, &m, SemanticsMode::Maximal, ResetMode::Contention);
        assert_eq!(
            names(&net, &sets),
            vec![
                vec!["t3", "t4", "t5a", "t5b"],
                vec!["t3", "t4", "t5a", "t6"]
            ]
        );
        let m0 = Marking::zeros(4);
        let sets = firing_sets(&net, &m0, SemanticsMode::Maximal, ResetMode::Contention);
        assert_eq!(names(&net, &sets), vec![vec!["t3"]]);
    }

    #[test]
    fn set_semantics_lists_all_admissible_subsets() {
        let net = build(glycolysis());
        let m = net
            .marking_from([("f16bp", 1), ("dhap", 1), ("g3p", 1)])
            .unwrap();
        let sets = firing_sets(&net, &m, SemanticsMode::Set, ResetMode::Contention);
        // 2^5 subsets minus the 2^3 that contain both t5b and t6
        assert_eq!(sets.len(), 24);
        assert!(sets[0].is_empty());
        assert!(sets.windows(2).all(|w| w[0] < w[1]));
        let interleaved = firing_sets(&net, &m, SemanticsMode::Interleaved, ResetMode::Contention);
        assert_eq!(interleaved.len(), 6);
    }

    #[test]
    fn nothing_enabled_yields_only_the_empty_set() {
        let net = build(NetDescription::new().place("p").transition("t").input(
            "p",
            "t",
            ArcKind::Normal(1),
        ));
        let m = Marking::zeros(1);
        for mode in [
            SemanticsMode::Set,
            SemanticsMode::Maximal,
            SemanticsMode::Interleaved,
        ] {
            assert_eq!(
                firing_sets(&net, &m, mode, ResetMode::Contention),
                vec![FiringSet::empty()]
            );
        }
    }

    #[test]
    fn reset_on_empty_place_claims_nothing() {
        let net = with_dhap_removal();
        let m = net.marking_from([("g3p", 1)]).unwrap();
        let sets = firing_sets(&net, &m, SemanticsMode::Maximal, ResetMode::Contention);
        // tr is enabled and free, so it joins every maximal set
        assert!(sets.iter().all(|s| s.names(&net).contains(&"tr")));
    }

    #[test]
    fn overflow_is_reported() {
        let net = build(
            NetDescription::new()
                .place("p")
                .transition("t")
                .output("t", "p", 2),
        );
        let m = Marking::from_counts(vec![u64::MAX - 1]);
        let t = FiringSet::from_names(&net, &["t"]).unwrap();
        assert!(matches!(
            fire(&net, &m, &t, ResetMode::Contention),
            Err(EngineError::Overflow { .. })
        ));
    }
}
