use std::collections::HashMap;
use std::ops::ControlFlow;
use std::rc::Rc;

use crate::model::{Marking, PetriNet};

use super::step::{apply, firing_sets};
use super::{EngineError, EnumerationConfig, ExecutionSequence, FiringSet, LimitKind};

type Successors = Rc<[(FiringSet, Marking)]>;

/// Borrowed view of one complete sequence during [`walk`].
pub struct SequenceView<'a> {
    initial: &'a Marking,
    path: &'a [(Successors, usize)],
}

impl<'a> SequenceView<'a> {
    pub fn horizon(&self) -> usize {
        self.path.len() - 1
    }

    pub fn firing(&self, step: usize) -> &'a FiringSet {
        let (succ, i) = &self.path[step];
        &succ[*i].0
    }

    /// Marking at `step`, for `step` in `0..=k+1`.
    pub fn marking(&self, step: usize) -> &'a Marking {
        if step == 0 {
            self.initial
        } else {
            let (succ, i) = &self.path[step - 1];
            &succ[*i].1
        }
    }

    pub fn final_marking(&self) -> &'a Marking {
        self.marking(self.horizon())
    }

    pub fn to_sequence(&self) -> ExecutionSequence {
        let steps = self.path.len();
        ExecutionSequence::new(
            (0..steps).map(|s| self.firing(s).clone()).collect(),
            (0..=steps).map(|s| self.marking(s).clone()).collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WalkSummary {
    pub sequences: u64,
    pub states: u64,
    /// The visitor asked to stop before the tree was exhausted.
    pub stopped: bool,
}

struct Walker<'n> {
    net: &'n PetriNet,
    config: EnumerationConfig,
    cache: HashMap<Marking, Successors>,
    summary: WalkSummary,
}

impl Walker<'_> {
    fn successors(&mut self, marking: &Marking) -> Result<Successors, EngineError> {
        if let Some(s) = self.cache.get(marking) {
            return Ok(s.clone());
        }
        let sets = firing_sets(
            self.net,
            marking,
            self.config.semantics,
            self.config.reset_mode,
        );
        let succ: Successors = sets
            .into_iter()
            .map(|f| apply(self.net, marking, &f).map(|m| (f, m)))
            .collect::<Result<Vec<_>, _>>()?
            .into();
        self.cache.insert(marking.clone(), succ.clone());
        Ok(succ)
    }

    fn bump_states(&mut self) -> Result<(), EngineError> {
        self.summary.states += 1;
        match self.config.limits.max_states {
            Some(limit) if self.summary.states > limit => Err(EngineError::LimitExceeded {
                kind: LimitKind::States,
                limit,
                partial: self.summary.sequences,
            }),
            _ => Ok(()),
        }
    }

    fn bump_sequences(&mut self) -> Result<(), EngineError> {
        match self.config.limits.max_sequences {
            Some(limit) if self.summary.sequences >= limit => Err(EngineError::LimitExceeded {
                kind: LimitKind::Sequences,
                limit,
                partial: self.summary.sequences,
            }),
            _ => {
                self.summary.sequences += 1;
                Ok(())
            }
        }
    }

    /// Explicit-stack depth-first walk; `path[d]` holds the successor list at
    /// depth `d` and the index of the branch currently taken.
    fn run<F>(&mut self, initial: &Marking, mut visit: F) -> Result<(), EngineError>
    where
        F: FnMut(&SequenceView<'_>) -> ControlFlow<()>,
    {
        let last = self.config.steps;
        let mut path: Vec<(Successors, usize)> = Vec::with_capacity(last + 1);
        let root = self.successors(initial)?;
        path.push((root, 0));

        while let Some((succ, idx)) = path.last() {
            if *idx >= succ.len() {
                path.pop();
                if let Some(parent) = path.last_mut() {
                    parent.1 += 1;
                }
                continue;
            }
            self.bump_states()?;
            if path.len() == last + 1 {
                self.bump_sequences()?;
                let view = SequenceView {
                    initial,
                    path: &path,
                };
                if visit(&view).is_break() {
                    self.summary.stopped = true;
                    return Ok(());
                }
                path.last_mut().expect("non-empty").1 += 1;
            } else {
                let next = succ[*idx].1.clone();
                let children = self.successors(&next)?;
                path.push((children, 0));
            }
        }
        Ok(())
    }
}

/// Visits every execution sequence of length `config.steps + 1` in
/// canonical order without materialising the whole list.
///
/// The walk is a tree: histories that reach the same marking stay distinct.
/// Successor lists are memoised per marking.
pub fn walk<F>(
    net: &PetriNet,
    initial: &Marking,
    config: &EnumerationConfig,
    visit: F,
) -> Result<WalkSummary, EngineError>
where
    F: FnMut(&SequenceView<'_>) -> ControlFlow<()>,
{
    let mut walker = Walker {
        net,
        config: *config,
        cache: HashMap::new(),
        summary: WalkSummary::default(),
    };
    walker.run(initial, visit)?;
    Ok(walker.summary)
}

/// Every execution sequence with firings at steps `0..=config.steps`.
pub fn enumerate(
    net: &PetriNet,
    initial: &Marking,
    config: &EnumerationConfig,
) -> Result<Vec<ExecutionSequence>, EngineError> {
    let mut out = Vec::new();
    walk(net, initial, config, |view| {
        out.push(view.to_sequence());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}
