//! JSON and text renderings of execution sequences.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::engine::{
    EnumerationConfig, ExecutionSequence, FiringSet, ResetMode, SemanticsMode, SequenceView,
};
use crate::model::{Marking, PetriNet};

/// One sequence as written to trace files: `k+1` firing sets and `k+2`
/// markings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSequence {
    pub firings: Vec<Vec<String>>,
    pub markings: Vec<BTreeMap<String, u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub semantics: SemanticsMode,
    pub reset_mode: ResetMode,
    pub k: usize,
    pub sequences: Vec<TraceSequence>,
}

fn names(net: &PetriNet, f: &FiringSet) -> Vec<String> {
    f.names(net).into_iter().map(str::to_owned).collect()
}

impl TraceSequence {
    pub fn from_sequence(net: &PetriNet, s: &ExecutionSequence) -> Self {
        TraceSequence {
            firings: s.firings().iter().map(|f| names(net, f)).collect(),
            markings: s.markings().iter().map(|m| net.marking_to_map(m)).collect(),
        }
    }

    pub fn from_view(net: &PetriNet, v: &SequenceView<'_>) -> Self {
        let k = v.horizon();
        TraceSequence {
            firings: (0..=k).map(|s| names(net, v.firing(s))).collect(),
            markings: (0..=k + 1)
                .map(|s| net.marking_to_map(v.marking(s)))
                .collect(),
        }
    }

    /// Converts back, resolving names against `net`.
    pub fn to_sequence(&self, net: &PetriNet) -> Result<ExecutionSequence, String> {
        let firings = self
            .firings
            .iter()
            .map(|f| {
                let refs: Vec<&str> = f.iter().map(String::as_str).collect();
                FiringSet::from_names(net, &refs).map_err(|e| e.to_string())
            })
            .collect::<Result<Vec<_>, _>>()?;
        let markings = self
            .markings
            .iter()
            .map(|m| {
                if m.len() != net.place_count() {
                    return Err("marking does not cover every place".to_owned());
                }
                net.marking_from(m.iter().map(|(p, &n)| (p.as_str(), n)))
                    .map_err(|e| e.to_string())
            })
            .collect::<Result<Vec<Marking>, _>>()?;
        if firings.is_empty() || markings.len() != firings.len() + 1 {
            return Err("a trace needs k+1 firing sets and k+2 markings".to_owned());
        }
        Ok(ExecutionSequence::new(firings, markings))
    }
}

/// Streams a trace document so large enumerations need not be held in memory.
pub struct TraceWriter<W: Write> {
    out: W,
    first: bool,
}

impl<W: Write> TraceWriter<W> {
    pub fn begin(mut out: W, config: &EnumerationConfig) -> io::Result<Self> {
        write!(
            out,
            "{{\"semantics\":{},\"reset_mode\":{},\"k\":{},\"sequences\":[",
            serde_json::to_string(&config.semantics)?,
            serde_json::to_string(&config.reset_mode)?,
            config.steps
        )?;
        Ok(TraceWriter { out, first: true })
    }

    pub fn push(&mut self, seq: &TraceSequence) -> io::Result<()> {
        if !self.first {
            self.out.write_all(b",")?;
        }
        self.first = false;
        self.out.write_all(b"\n")?;
        serde_json::to_writer(&mut self.out, seq)?;
        Ok(())
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.write_all(b"\n]}\n")?;
        Ok(self.out)
    }
}

/// Human-readable rendering: one line per step.
pub fn render_text(net: &PetriNet, index: usize, v: &SequenceView<'_>) -> String {
    let mut out = format!("sequence {}\n", index + 1);
    for s in 0..=v.horizon() {
        out.push_str(&format!(
            "  {s}: {} fires {{{}}}\n",
            net.display_marking(v.marking(s)),
            v.firing(s).names(net).join(", ")
        ));
    }
    let k1 = v.horizon() + 1;
    out.push_str(&format!("  {k1}: {}\n", net.display_marking(v.marking(k1))));
    out
}
