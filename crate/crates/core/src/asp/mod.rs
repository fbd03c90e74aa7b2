//! Generation of answer-set programs that simulate a net.
//!
//! Each emitted line is one fact or rule and carries the label of the rule
//! schema it instantiates (`f1`..`f10`, `x1`, `i1`, `e1`..`e5`, `a1`..`a6`,
//! `r1`..`r7` and the primed variants), so golden tests can check structure
//! rule by rule.

mod shorthand;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{ResetMode, SemanticsMode};
use crate::model::{ArcKind, ArcTag, Marking, PetriNet};

pub use shorthand::{expand_shorthand, fact_set, ShorthandError};

/// Net extension an encoding supports. Higher levels include lower ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AspLevel {
    Base,
    Reset,
    Inhibit,
    Read,
}

impl AspLevel {
    /// Lowest level that covers every arc kind in `net`.
    pub fn required_for(net: &PetriNet) -> AspLevel {
        if net.has_arc_kind(ArcTag::Read) {
            AspLevel::Read
        } else if net.has_arc_kind(ArcTag::Inhibitor) {
            AspLevel::Inhibit
        } else if net.has_arc_kind(ArcTag::Reset) {
            AspLevel::Reset
        } else {
            AspLevel::Base
        }
    }
}

impl fmt::Display for AspLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AspLevel::Base => "base",
            AspLevel::Reset => "reset",
            AspLevel::Inhibit => "inhibit",
            AspLevel::Read => "read",
        })
    }
}

impl FromStr for AspLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "base" => Ok(AspLevel::Base),
            "reset" => Ok(AspLevel::Reset),
            "inhibit" => Ok(AspLevel::Inhibit),
            "read" => Ok(AspLevel::Read),
            other => Err(format!("unknown level `{other}`")),
        }
    }
}

/// Aggregate syntax of the target grounder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AspDialect {
    /// `#sum[atom=weight:cond]` aggregates and term pooling in bodies, as in
    /// the original listings.
    #[default]
    Legacy,
    /// `#sum{weight,tuple:cond}` aggregates accepted by clingo 4 and later.
    Clingo,
}

impl FromStr for AspDialect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "legacy" => Ok(AspDialect::Legacy),
            "clingo" => Ok(AspDialect::Clingo),
            other => Err(format!("unknown dialect `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AspVariant {
    pub level: AspLevel,
    pub semantics: SemanticsMode,
    pub reset_mode: ResetMode,
    /// Largest token count the program can represent.
    pub ntok: u64,
    /// Horizon: `time(0..k)`.
    pub steps: usize,
    pub dialect: AspDialect,
}

impl AspVariant {
    pub fn new(level: AspLevel, semantics: SemanticsMode, steps: usize, ntok: u64) -> Self {
        AspVariant {
            level,
            semantics,
            reset_mode: ResetMode::Contention,
            ntok,
            steps,
            dialect: AspDialect::Legacy,
        }
    }

    pub fn with_reset_mode(mut self, reset_mode: ResetMode) -> Self {
        self.reset_mode = reset_mode;
        self
    }

    pub fn with_dialect(mut self, dialect: AspDialect) -> Self {
        self.dialect = dialect;
        self
    }

    fn timed(&self) -> bool {
        self.level >= AspLevel::Reset
    }

    fn standard_reset(&self) -> bool {
        self.timed() && self.reset_mode == ResetMode::Standard
    }
}

/// Rule schema a program line instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RuleLabel {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    F8,
    F8Prime,
    F9,
    F10,
    X1,
    I1,
    E1,
    E2,
    E3,
    E4,
    E5,
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
    A5Prime,
    A6Prime,
    A7Prime,
    R1,
    R2,
    R3,
    R4,
    R5,
    R5aPrime,
    R5bPrime,
    R6,
    R7,
}

impl RuleLabel {
    pub fn as_str(self) -> &'static str {
        use RuleLabel::*;
        match self {
            F1 => "f1",
            F2 => "f2",
            F3 => "f3",
            F4 => "f4",
            F5 => "f5",
            F6 => "f6",
            F7 => "f7",
            F8 => "f8",
            F8Prime => "f8'",
            F9 => "f9",
            F10 => "f10",
            X1 => "x1",
            I1 => "i1",
            E1 => "e1",
            E2 => "e2",
            E3 => "e3",
            E4 => "e4",
            E5 => "e5",
            A1 => "a1",
            A2 => "a2",
            A3 => "a3",
            A4 => "a4",
            A5 => "a5",
            A6 => "a6",
            A5Prime => "a5'",
            A6Prime => "a6'",
            A7Prime => "a7'",
            R1 => "r1",
            R2 => "r2",
            R3 => "r3",
            R4 => "r4",
            R5 => "r5",
            R5aPrime => "r5a'",
            R5bPrime => "r5b'",
            R6 => "r6",
            R7 => "r7",
        }
    }
}

impl fmt::Display for RuleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProgramLine {
    pub label: RuleLabel,
    pub text: String,
}

/// Emitted program: one labelled fact or rule per line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AspProgram {
    pub lines: Vec<ProgramLine>,
    /// Predicate signatures the program defines, e.g. `place/1`.
    pub atom_schema: Vec<String>,
}

impl AspProgram {
    /// Program source, newline-terminated.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            out.push_str(&line.text);
            out.push('\n');
        }
        out
    }

    /// Source with a `% label` comment after every line.
    pub fn annotated_text(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            out.push_str(&format!("{}  % {}\n", line.text, line.label));
        }
        out
    }

    pub fn lines_labelled(&self, label: RuleLabel) -> impl Iterator<Item = &str> {
        self.lines
            .iter()
            .filter(move |l| l.label == label)
            .map(|l| l.text.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("net needs encoding level `{required}` but `{requested}` was requested")]
    VariantTooLow {
        required: AspLevel,
        requested: AspLevel,
    },
}

/// A token bound that no count reachable within `steps` firings can exceed,
/// also covering every arc weight so weight comparisons stay grounded.
///
/// Never applied implicitly: callers pass `ntok` explicitly.
pub fn suggest_ntok(net: &PetriNet, initial: &Marking, steps: usize) -> u64 {
    let per_step: u128 = net
        .transition_indices()
        .flat_map(|t| net.outputs(t).iter().map(|a| a.weight as u128))
        .sum();
    let reach = initial.total() + steps as u128 * per_step;
    let max_weight = net
        .transition_indices()
        .flat_map(|t| {
            net.inputs(t)
                .iter()
                .filter_map(|a| a.kind.weight())
                .chain(net.outputs(t).iter().map(|a| a.weight))
        })
        .max()
        .unwrap_or(0) as u128;
    reach.max(max_weight).min(u64::MAX as u128) as u64
}

struct Builder {
    lines: Vec<ProgramLine>,
}

impl Builder {
    fn push(&mut self, label: RuleLabel, text: impl Into<String>) {
        self.lines.push(ProgramLine {
            label,
            text: text.into(),
        });
    }
}

/// Emits the program for `net` started at `initial` under `variant`.
pub fn emit(
    net: &PetriNet,
    initial: &Marking,
    variant: &AspVariant,
) -> Result<AspProgram, EmitError> {
    use RuleLabel::*;

    let required = AspLevel::required_for(net);
    if variant.level < required {
        return Err(EmitError::VariantTooLow {
            required,
            requested: variant.level,
        });
    }
    let timed = variant.timed();
    let mut b = Builder { lines: Vec::new() };

    for p in net.places() {
        b.push(F1, format!("place({p})."));
    }
    for t in net.transitions() {
        b.push(F2, format!("trans({t})."));
    }
    for t in net.transition_indices() {
        let tn = net.transition(t);
        for arc in net.inputs(t) {
            let pn = net.place(arc.place);
            match arc.kind {
                ArcKind::Normal(w) if timed => {
                    b.push(F6, format!("ptarc({pn},{tn},{w},TS) :- time(TS)."))
                }
                ArcKind::Normal(w) => b.push(F3, format!("ptarc({pn},{tn},{w}).")),
                ArcKind::Reset if variant.reset_mode == ResetMode::Standard => {
                    b.push(F8Prime, format!("rptarc({pn},{tn})."))
                }
                ArcKind::Reset => b.push(
                    F8,
                    format!("ptarc({pn},{tn},X,TS) :- holds({pn},X,TS), num(X), X > 0."),
                ),
                ArcKind::Inhibitor => b.push(F9, format!("iptarc({pn},{tn},1,TS) :- time(TS).")),
                ArcKind::Read(w) => b.push(F10, format!("tptarc({pn},{tn},{w},TS) :- time(TS).")),
            }
        }
        for arc in net.outputs(t) {
            let pn = net.place(arc.place);
            let w = arc.weight;
            if timed {
                b.push(F7, format!("tparc({tn},{pn},{w},TS) :- time(TS)."));
            } else {
                b.push(F4, format!("tparc({tn},{pn},{w})."));
            }
        }
    }
    for ts in 0..=variant.steps {
        b.push(F5, format!("time({ts})."));
    }
    for n in 0..=variant.ntok {
        b.push(X1, format!("num({n})."));
    }
    for p in net.place_indices() {
        b.push(I1, format!("holds({},{},0).", net.place(p), initial.get(p)));
    }

    if timed {
        b.push(E3, "notenabled(T,TS) :- ptarc(P,T,N,TS), holds(P,Q,TS), Q < N, place(P), trans(T), time(TS), num(N), num(Q).");
    } else {
        b.push(E1, "notenabled(T,TS) :- ptarc(P,T,N), holds(P,Q,TS), Q < N, place(P), trans(T), time(TS), num(N), num(Q).");
    }
    if variant.level >= AspLevel::Inhibit {
        b.push(E4, "notenabled(T,TS) :- iptarc(P,T,N,TS), holds(P,Q,TS), place(P), trans(T), time(TS), num(N), num(Q), Q >= N.");
    }
    if variant.level >= AspLevel::Read {
        b.push(E5, "notenabled(T,TS) :- tptarc(P,T,N,TS), holds(P,Q,TS), place(P), trans(T), time(TS), num(N), num(Q), Q < N.");
    }
    b.push(
        E2,
        "enabled(T,TS) :- trans(T), time(TS), not notenabled(T,TS).",
    );
    b.push(A1, "{fires(T,TS)} :- enabled(T,TS), trans(T), time(TS).");
    if timed {
        b.push(
            R6,
            "add(P,Q,T,TS) :- fires(T,TS), tparc(T,P,Q,TS), time(TS).",
        );
        b.push(
            R7,
            "del(P,Q,T,TS) :- fires(T,TS), ptarc(P,T,Q,TS), time(TS).",
        );
    } else {
        b.push(R1, "add(P,Q,T,TS) :- fires(T,TS), tparc(T,P,Q), time(TS).");
        b.push(R2, "del(P,Q,T,TS) :- fires(T,TS), ptarc(P,T,Q), time(TS).");
    }
    let (nums4, nums1) = match variant.dialect {
        AspDialect::Legacy => ("num(Q;Q1;Q2;Q3)", "num(Q)"),
        AspDialect::Clingo => ("num(Q), num(Q1), num(Q2), num(Q3)", "num(Q)"),
    };
    for (label, head, atom) in [(R3, "tot_incr", "add"), (R4, "tot_decr", "del")] {
        let agg = match variant.dialect {
            AspDialect::Legacy => format!("#sum[{atom}(P,Q,T,TS)=Q:num(Q):trans(T)]"),
            AspDialect::Clingo => format!("#sum{{Q,T : {atom}(P,Q,T,TS), num(Q), trans(T)}}"),
        };
        b.push(
            label,
            format!("{head}(P,QQ,TS) :- QQ={agg}, time(TS), num(QQ), place(P)."),
        );
    }
    if variant.standard_reset() {
        b.push(
            A7Prime,
            "reset(P,TS) :- rptarc(P,T), place(P), trans(T), fires(T,TS), time(TS).",
        );
        b.push(R5aPrime, format!("holds(P,Q,TS+1) :- holds(P,Q1,TS), tot_incr(P,Q2,TS), tot_decr(P,Q3,TS), Q=Q1+Q2-Q3, place(P), {nums4}, time(TS), time(TS+1), not reset(P,TS)."));
        b.push(R5bPrime, format!("holds(P,Q,TS+1) :- tot_incr(P,Q,TS), place(P), {nums1}, time(TS), time(TS+1), reset(P,TS)."));
    } else {
        b.push(R5, format!("holds(P,Q,TS+1) :- holds(P,Q1,TS), tot_incr(P,Q2,TS), time(TS+1), tot_decr(P,Q3,TS), Q=Q1+Q2-Q3, place(P), {nums4}, time(TS)."));
    }
    b.push(
        A2,
        "consumesmore(P,TS) :- holds(P,Q,TS), tot_decr(P,Q1,TS), Q1 > Q.",
    );
    b.push(A3, "consumesmore :- consumesmore(P,TS).");
    b.push(A4, ":- consumesmore.");

    match variant.semantics {
        SemanticsMode::Set => {}
        SemanticsMode::Maximal => {
            let ptarc = if timed {
                "ptarc(S,T,Q,TS)"
            } else {
                "ptarc(S,T,Q)"
            };
            b.push(A5, format!("could_not_have(T,TS) :- enabled(T,TS), not fires(T,TS), {ptarc}, holds(S,QQ,TS), tot_decr(S,QQQ,TS), Q > QQ - QQQ."));
            b.push(
                A6,
                ":- not could_not_have(T,TS), enabled(T,TS), not fires(T,TS), trans(T), time(TS).",
            );
        }
        SemanticsMode::Interleaved => {
            b.push(
                A5Prime,
                "more_than_one_fires :- fires(T1,TS), fires(T2,TS), T1 != T2, time(TS).",
            );
            b.push(A6Prime, ":- more_than_one_fires.");
        }
    }

    Ok(AspProgram {
        atom_schema: atom_schema(variant),
        lines: b.lines,
    })
}

fn atom_schema(variant: &AspVariant) -> Vec<String> {
    let timed = variant.timed();
    let mut s = vec![
        "place/1",
        "trans/1",
        if timed { "ptarc/4" } else { "ptarc/3" },
        if timed { "tparc/4" } else { "tparc/3" },
        "time/1",
        "num/1",
        "holds/3",
        "notenabled/2",
        "enabled/2",
        "fires/2",
        "add/4",
        "del/4",
        "tot_incr/3",
        "tot_decr/3",
        "consumesmore/2",
        "consumesmore/0",
    ];
    if variant.standard_reset() {
        s.extend(["rptarc/2", "reset/2"]);
    }
    if variant.level >= AspLevel::Inhibit {
        s.push("iptarc/4");
    }
    if variant.level >= AspLevel::Read {
        s.push("tptarc/4");
    }
    match variant.semantics {
        SemanticsMode::Set => {}
        SemanticsMode::Maximal => s.push("could_not_have/2"),
        SemanticsMode::Interleaved => s.push("more_than_one_fires/0"),
    }
    s.into_iter().map(String::from).collect()
}
