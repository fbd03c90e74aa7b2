//! Line-oriented net description format (`.pnet`).
//!
//! ```text
//! # comment
//! place f16bp tokens=1
//! trans t4
//! arc f16bp -> t4            # place -> transition: consuming arc
//! arc t6 -> bpg13 weight=2   # transition -> place: producing arc
//! reset dhap -> tr
//! inhibit atp -> gly1
//! read h_is -> syn weight=25
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::{validate, ArcKind, Marking, NetDescription, PetriNet, ValidationError};

/// 1-based source position of a statement or token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Declaration {
    Place {
        name: String,
        tokens: u64,
    },
    Trans {
        name: String,
    },
    Arc {
        src: String,
        dst: String,
        weight: u64,
    },
    Reset {
        place: String,
        trans: String,
    },
    Inhibit {
        place: String,
        trans: String,
    },
    Read {
        place: String,
        trans: String,
        weight: u64,
    },
}

/// Parsed statements in source order, each with its position.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct NetDocument {
    pub declarations: Vec<Declaration>,
    pub source_spans: Vec<Span>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("{0}")]
    Validation(ValidationError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {kind}")]
pub struct DslError {
    pub span: Span,
    pub kind: DslErrorKind,
}

/// Every problem found in one pass over a document.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct DslErrors(pub Vec<DslError>);

impl fmt::Display for DslErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DslWarning {
    pub span: Span,
    pub message: String,
}

impl fmt::Display for DslWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: warning: {}", self.span, self.message)
    }
}

#[derive(Debug, Clone)]
pub struct ParsedNet {
    pub net: PetriNet,
    pub marking: Marking,
    pub document: NetDocument,
    pub warnings: Vec<DslWarning>,
}

struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let code = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    let mut iter = code.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if c == '-' && iter.peek().map(|&(_, n)| n) == Some('>') {
            if let Some(s) = start.take() {
                tokens.push(Token {
                    text: &code[s..i],
                    col: s,
                });
            }
            iter.next();
            tokens.push(Token { text: "->", col: i });
        } else if c.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(Token {
                    text: &code[s..i],
                    col: s,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            text: &code[s..],
            col: s,
        });
    }
    for t in &mut tokens {
        t.col = code[..t.col].chars().count() + 1;
    }
    tokens
}

struct LineParser<'a> {
    line: usize,
    tokens: Vec<Token<'a>>,
    errors: &'a mut Vec<DslError>,
    warnings: &'a mut Vec<DslWarning>,
}

impl LineParser<'_> {
    fn span(&self, idx: usize) -> Span {
        let col = self.tokens.get(idx).or(self.tokens.last()).map_or(1, |t| {
            t.col
                + if idx >= self.tokens.len() {
                    t.text.chars().count()
                } else {
                    0
                }
        });
        Span {
            line: self.line,
            col,
        }
    }

    fn syntax(&mut self, idx: usize, message: impl Into<String>) {
        let span = self.span(idx);
        self.errors.push(DslError {
            span,
            kind: DslErrorKind::Syntax(message.into()),
        });
    }

    /// `key=value` options starting at token `from`; unknown keys are errors.
    fn options(&mut self, from: usize, allowed: &[&str]) -> Option<BTreeMap<String, u64>> {
        let mut out = BTreeMap::new();
        let mut ok = true;
        for idx in from..self.tokens.len() {
            let text = self.tokens[idx].text;
            let Some((key, value)) = text.split_once('=') else {
                self.syntax(idx, format!("unexpected `{text}`"));
                ok = false;
                continue;
            };
            if !allowed.contains(&key) {
                self.syntax(idx, format!("unknown option `{key}`"));
                ok = false;
                continue;
            }
            match value.parse::<u64>() {
                Ok(v) => {
                    if out.insert(key.to_owned(), v).is_some() {
                        self.syntax(idx, format!("option `{key}` given twice"));
                        ok = false;
                    }
                }
                Err(_) => {
                    self.syntax(
                        idx,
                        format!("`{key}` needs a non-negative integer, got `{value}`"),
                    );
                    ok = false;
                }
            }
        }
        ok.then_some(out)
    }

    /// `<a> -> <b> [options]`
    fn edge(&mut self, allowed: &[&str]) -> Option<(String, String, BTreeMap<String, u64>)> {
        let keyword = self.tokens[0].text;
        let shape_ok = self.tokens.len() >= 4
            && self.tokens[2].text == "->"
            && self.tokens[1].text != "->"
            && self.tokens[3].text != "->";
        if !shape_ok {
            self.syntax(1, format!("expected `{keyword} <src> -> <dst>`"));
            return None;
        }
        let src = self.tokens[1].text.to_owned();
        let dst = self.tokens[3].text.to_owned();
        let opts = self.options(4, allowed)?;
        Some((src, dst, opts))
    }

    fn parse(&mut self) -> Option<Declaration> {
        let keyword = self.tokens[0].text;
        match keyword {
            "place" => {
                if self.tokens.len() < 2 {
                    self.syntax(1, "expected a place name");
                    return None;
                }
                let name = self.tokens[1].text.to_owned();
                let opts = self.options(2, &["tokens"])?;
                Some(Declaration::Place {
                    name,
                    tokens: opts.get("tokens").copied().unwrap_or(0),
                })
            }
            "trans" => {
                if self.tokens.len() != 2 {
                    self.syntax(1, "expected `trans <name>`");
                    return None;
                }
                Some(Declaration::Trans {
                    name: self.tokens[1].text.to_owned(),
                })
            }
            "arc" => {
                let (src, dst, opts) = self.edge(&["weight"])?;
                Some(Declaration::Arc {
                    src,
                    dst,
                    weight: opts.get("weight").copied().unwrap_or(1),
                })
            }
            "reset" => {
                let (place, trans, _) = self.edge(&[])?;
                Some(Declaration::Reset { place, trans })
            }
            "inhibit" => {
                let (place, trans, opts) = self.edge(&["weight"])?;
                if opts.contains_key("weight") {
                    let span = self.span(4);
                    self.warnings.push(DslWarning {
                        span,
                        message: "inhibitor arcs test for an empty place; weight ignored".into(),
                    });
                }
                Some(Declaration::Inhibit { place, trans })
            }
            "read" => {
                let (place, trans, opts) = self.edge(&["weight"])?;
                Some(Declaration::Read {
                    place,
                    trans,
                    weight: opts.get("weight").copied().unwrap_or(1),
                })
            }
            other => {
                self.syntax(0, format!("unknown statement `{other}`"));
                None
            }
        }
    }
}

/// Parses the statements of a document without resolving names.
pub fn parse_document(text: &str) -> Result<(NetDocument, Vec<DslWarning>), DslErrors> {
    let mut doc = NetDocument::default();
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let tokens = tokenize(line);
        if tokens.is_empty() {
            continue;
        }
        let span = Span {
            line: i + 1,
            col: tokens[0].col,
        };
        let mut p = LineParser {
            line: i + 1,
            tokens,
            errors: &mut errors,
            warnings: &mut warnings,
        };
        if let Some(decl) = p.parse() {
            doc.declarations.push(decl);
            doc.source_spans.push(span);
        }
    }
    if errors.is_empty() {
        Ok((doc, warnings))
    } else {
        Err(DslErrors(errors))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum NodeKind {
    Place,
    Trans,
}

/// Turns a document into a validated net and its initial marking.
pub fn build_net(doc: &NetDocument) -> Result<(PetriNet, Marking), DslErrors> {
    let mut kinds: HashMap<&str, NodeKind> = HashMap::new();
    let mut first_decl: HashMap<&str, Span> = HashMap::new();
    let mut desc = NetDescription::new();
    let mut marking = BTreeMap::new();
    let mut errors = Vec::new();
    // Spans for validation errors, keyed by the names they mention.
    let mut arc_spans: HashMap<(String, String), Span> = HashMap::new();
    let mut repeat_spans: HashMap<&str, Span> = HashMap::new();

    for (decl, &span) in doc.declarations.iter().zip(&doc.source_spans) {
        let (name, kind) = match decl {
            Declaration::Place { name, tokens } => {
                marking.entry(name.clone()).or_insert(*tokens);
                (name, NodeKind::Place)
            }
            Declaration::Trans { name } => (name, NodeKind::Trans),
            _ => continue,
        };
        if first_decl.contains_key(name.as_str()) {
            repeat_spans.entry(name).or_insert(span);
        } else {
            first_decl.insert(name, span);
        }
        kinds.entry(name).or_insert(kind);
        desc = match kind {
            NodeKind::Place => desc.place(name),
            NodeKind::Trans => desc.transition(name),
        };
    }

    for (decl, &span) in doc.declarations.iter().zip(&doc.source_spans) {
        let (src, dst) = match decl {
            Declaration::Place { .. } | Declaration::Trans { .. } => continue,
            Declaration::Arc { src, dst, .. } => (src, dst),
            Declaration::Reset { place, trans }
            | Declaration::Inhibit { place, trans }
            | Declaration::Read { place, trans, .. } => (place, trans),
        };
        let mut resolved = true;
        for name in [src, dst] {
            if !kinds.contains_key(name.as_str()) {
                errors.push(DslError {
                    span,
                    kind: DslErrorKind::UnknownNode(name.clone()),
                });
                resolved = false;
            }
        }
        if !resolved {
            continue;
        }
        arc_spans.entry((src.clone(), dst.clone())).or_insert(span);
        let (ks, kd) = (kinds[src.as_str()], kinds[dst.as_str()]);
        desc = match decl {
            Declaration::Arc { weight, .. } => match (ks, kd) {
                (NodeKind::Place, NodeKind::Trans) => {
                    desc.input(src, dst, ArcKind::Normal(*weight))
                }
                (NodeKind::Trans, NodeKind::Place) => desc.output(src, dst, *weight),
                _ => {
                    errors.push(DslError {
                        span,
                        kind: DslErrorKind::Syntax(format!(
                            "arc `{src} -> {dst}` must connect a place and a transition"
                        )),
                    });
                    continue;
                }
            },
            _ if (ks, kd) != (NodeKind::Place, NodeKind::Trans) => {
                errors.push(DslError {
                    span,
                    kind: DslErrorKind::Syntax(format!(
                        "`{src} -> {dst}` must lead from a place to a transition"
                    )),
                });
                continue;
            }
            Declaration::Reset { .. } => desc.input(src, dst, ArcKind::Reset),
            Declaration::Inhibit { .. } => desc.input(src, dst, ArcKind::Inhibitor),
            Declaration::Read { weight, .. } => desc.input(src, dst, ArcKind::Read(*weight)),
            Declaration::Place { .. } | Declaration::Trans { .. } => unreachable!(),
        };
    }

    let validated = validate(&desc, &marking);
    let validation_errors = match validated {
        Ok(ok) if errors.is_empty() => return Ok(ok),
        Ok(_) => Vec::new(),
        Err(e) => e.0,
    };
    for e in validation_errors {
        let span = match &e {
            ValidationError::DuplicateArc { from, to, .. }
            | ValidationError::ZeroWeight { from, to } => {
                arc_spans.get(&(from.clone(), to.clone())).copied()
            }
            ValidationError::NameClash { name } | ValidationError::DuplicateNode { name } => {
                repeat_spans.get(name.as_str()).copied()
            }
            ValidationError::InvalidName { name }
            | ValidationError::UnknownNode { name, .. }
            | ValidationError::MarkingMissingPlace { place: name } => {
                first_decl.get(name.as_str()).copied()
            }
        };
        errors.push(DslError {
            span: span.unwrap_or_default(),
            kind: DslErrorKind::Validation(e),
        });
    }
    errors.sort_by_key(|e| (e.span.line, e.span.col));
    Err(DslErrors(errors))
}

/// Parses a `.pnet` document into a validated net and initial marking,
/// reporting every error found.
pub fn parse_net(text: &str) -> Result<ParsedNet, DslErrors> {
    let (document, warnings) = parse_document(text)?;
    let (net, marking) = build_net(&document)?;
    Ok(ParsedNet {
        net,
        marking,
        document,
        warnings,
    })
}

/// Canonical text: places, transitions, then arcs grouped by transition.
/// Default token counts and weights are omitted.
pub fn serialize_net(net: &PetriNet, marking: &Marking) -> String {
    let mut out = String::new();
    for p in net.place_indices() {
        let name = net.place(p);
        match marking.get(p) {
            0 => out.push_str(&format!("place {name}\n")),
            n => out.push_str(&format!("place {name} tokens={n}\n")),
        }
    }
    for t in net.transitions() {
        out.push_str(&format!("trans {t}\n"));
    }
    let weight = |w: u64| {
        if w == 1 {
            String::new()
        } else {
            format!(" weight={w}")
        }
    };
    for t in net.transition_indices() {
        let tn = net.transition(t);
        for arc in net.inputs(t) {
            let pn = net.place(arc.place);
            let line = match arc.kind {
                ArcKind::Normal(w) => format!("arc {pn} -> {tn}{}", weight(w)),
                ArcKind::Reset => format!("reset {pn} -> {tn}"),
                ArcKind::Inhibitor => format!("inhibit {pn} -> {tn}"),
                ArcKind::Read(w) => format!("read {pn} -> {tn}{}", weight(w)),
            };
            out.push_str(&line);
            out.push('\n');
        }
        for arc in net.outputs(t) {
            out.push_str(&format!(
                "arc {tn} -> {}{}\n",
                net.place(arc.place),
                weight(arc.weight)
            ));
        }
    }
    out
}
