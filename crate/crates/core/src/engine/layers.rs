use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::model::{Marking, PetriNet};

use super::step::{apply, firing_sets};
use super::{EngineError, EnumerationConfig, ExecutionSequence, FiringSet, LimitKind};

pub type NodeId = usize;

/// Reachable markings per step with their firing edges.
///
/// Unlike [`walk`](super::walk) this merges histories: one node per
/// `(step, marking)` pair. Every root-to-last-layer path is exactly one
/// execution sequence, so path counts recover sequence statistics without
/// visiting sequences one by one.
#[derive(Debug, Clone)]
pub struct LayeredGraph {
    steps: usize,
    layers: Vec<Vec<NodeId>>,
    markings: Vec<Marking>,
    step_of: Vec<usize>,
    edges: Vec<Vec<(FiringSet, NodeId)>>,
    parent: Vec<Option<(NodeId, usize)>>,
}

impl LayeredGraph {
    /// Expands layers `0..=steps+1`. Only `limits.max_states` applies; it
    /// bounds the number of nodes.
    pub fn build(
        net: &PetriNet,
        initial: &Marking,
        config: &EnumerationConfig,
    ) -> Result<Self, EngineError> {
        let mut g = LayeredGraph {
            steps: config.steps,
            layers: vec![vec![0]],
            markings: vec![initial.clone()],
            step_of: vec![0],
            edges: vec![Vec::new()],
            parent: vec![None],
        };
        let mut cache: HashMap<Marking, Vec<(FiringSet, Marking)>> = HashMap::new();
        for step in 0..=config.steps {
            let mut index: HashMap<Marking, NodeId> = HashMap::new();
            let mut next_layer = Vec::new();
            for &node in &g.layers[step].clone() {
                let marking = g.markings[node].clone();
                if !cache.contains_key(&marking) {
                    let succ = firing_sets(net, &marking, config.semantics, config.reset_mode)
                        .into_iter()
                        .map(|f| apply(net, &marking, &f).map(|m| (f, m)))
                        .collect::<Result<Vec<_>, _>>()?;
                    cache.insert(marking.clone(), succ);
                }
                let mut edges = Vec::new();
                for (edge_idx, (f, m)) in cache[&marking].iter().enumerate() {
                    let target = match index.get(m) {
                        Some(&id) => id,
                        None => {
                            let id = g.markings.len();
                            if let Some(limit) = config.limits.max_states {
                                if id as u64 >= limit {
                                    return Err(EngineError::LimitExceeded {
                                        kind: LimitKind::States,
                                        limit,
                                        partial: 0,
                                    });
                                }
                            }
                            g.markings.push(m.clone());
                            g.step_of.push(step + 1);
                            g.edges.push(Vec::new());
                            g.parent.push(Some((node, edge_idx)));
                            index.insert(m.clone(), id);
                            next_layer.push(id);
                            id
                        }
                    };
                    edges.push((f.clone(), target));
                }
                g.edges[node] = edges;
            }
            g.layers.push(next_layer);
        }
        Ok(g)
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Nodes at `step`, for `step` in `0..=steps+1`, in discovery order.
    pub fn layer(&self, step: usize) -> &[NodeId] {
        &self.layers[step]
    }

    pub fn node_count(&self) -> usize {
        self.markings.len()
    }

    pub fn marking(&self, node: NodeId) -> &Marking {
        &self.markings[node]
    }

    pub fn step(&self, node: NodeId) -> usize {
        self.step_of[node]
    }

    /// Outgoing edges in canonical firing-set order; empty on the last layer.
    pub fn edges(&self, node: NodeId) -> &[(FiringSet, NodeId)] {
        &self.edges[node]
    }

    /// A full execution sequence passing through `node`: the first-found
    /// history leading to it, then the canonically first continuation.
    pub fn sequence_through(&self, node: NodeId) -> ExecutionSequence {
        let (firings, markings) = self.history(node);
        self.complete(node, firings, markings)
    }

    /// Like [`sequence_through`](Self::sequence_through) but leaving `node`
    /// along its `edge`-th outgoing edge.
    pub fn sequence_via(&self, node: NodeId, edge: usize) -> ExecutionSequence {
        let (mut firings, mut markings) = self.history(node);
        let (f, next) = &self.edges[node][edge];
        firings.push(f.clone());
        markings.push(self.markings[*next].clone());
        self.complete(*next, firings, markings)
    }

    fn history(&self, node: NodeId) -> (Vec<FiringSet>, Vec<Marking>) {
        let mut firings = Vec::new();
        let mut markings = vec![self.markings[node].clone()];
        let mut cur = node;
        while let Some((parent, edge)) = self.parent[cur] {
            firings.push(self.edges[parent][edge].0.clone());
            markings.push(self.markings[parent].clone());
            cur = parent;
        }
        firings.reverse();
        markings.reverse();
        (firings, markings)
    }

    fn complete(
        &self,
        mut cur: NodeId,
        mut firings: Vec<FiringSet>,
        mut markings: Vec<Marking>,
    ) -> ExecutionSequence {
        while let Some((f, next)) = self.edges[cur].first() {
            firings.push(f.clone());
            markings.push(self.markings[*next].clone());
            cur = *next;
        }
        ExecutionSequence::new(firings, markings)
    }

    /// Number of histories from the root reaching each node.
    pub fn prefix_counts(&self) -> Vec<BigUint> {
        let mut counts = vec![BigUint::zero(); self.node_count()];
        counts[0] = BigUint::one();
        for layer in &self.layers {
            for &node in layer {
                let c = counts[node].clone();
                for (_, next) in &self.edges[node] {
                    counts[*next] += &c;
                }
            }
        }
        counts
    }

    /// Number of ways to complete a sequence from each node.
    pub fn suffix_counts(&self) -> Vec<BigUint> {
        let mut counts = vec![BigUint::zero(); self.node_count()];
        for layer in self.layers.iter().rev() {
            for &node in layer {
                counts[node] = if self.step_of[node] == self.steps + 1 {
                    BigUint::one()
                } else {
                    self.edges[node].iter().map(|(_, n)| &counts[*n]).sum()
                };
            }
        }
        counts
    }

    /// Total number of execution sequences.
    pub fn sequence_count(&self) -> BigUint {
        self.suffix_counts().swap_remove(0)
    }
}
