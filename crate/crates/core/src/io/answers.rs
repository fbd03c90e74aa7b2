//! Reading answer sets printed by an external solver back into execution
//! sequences.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::engine::{EngineError, ExecutionSequence, FiringSet};
use crate::model::{Marking, PetriNet, PlaceIdx, TransitionIdx};

/// Layout of solver output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnswerFormat {
    /// `Answer: N` headers, each followed by lines of atoms.
    #[default]
    Blocks,
    /// One answer set per non-empty line.
    Plain,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnswerSetError {
    #[error("answer {answer}: malformed atom `{text}`")]
    MalformedAtom { answer: usize, text: String },
    #[error("answer {answer}: no marking for place `{place}` at step {step}")]
    IncompleteMarking {
        answer: usize,
        place: String,
        step: usize,
    },
    #[error("answer {answer}: place `{place}` holds both {first} and {second} at step {step}")]
    ConflictingMarking {
        answer: usize,
        place: String,
        step: usize,
        first: u64,
        second: u64,
    },
    #[error("answer {answer}: unknown name `{name}`")]
    UnknownName { answer: usize, name: String },
    #[error("answer {answer}: {source}")]
    Engine { answer: usize, source: EngineError },
}

/// Splits solver output into the atom text of each answer set.
fn answer_texts(text: &str, format: AnswerFormat) -> Vec<String> {
    match format {
        AnswerFormat::Plain => text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('%'))
            .map(str::to_owned)
            .collect(),
        AnswerFormat::Blocks => {
            let mut out: Vec<String> = Vec::new();
            let mut open = false;
            for line in text.lines() {
                let trimmed = line.trim();
                if trimmed.starts_with("Answer:") {
                    out.push(String::new());
                    open = true;
                } else if open {
                    // atoms start lowercase (or with `-` for classical
                    // negation); solver summaries start uppercase
                    let atomish = trimmed.is_empty()
                        || trimmed.starts_with(|c: char| c.is_ascii_lowercase() || c == '-');
                    if !atomish {
                        open = false;
                        continue;
                    }
                    let cur = out.last_mut().expect("open block");
                    cur.push(' ');
                    cur.push_str(trimmed);
                }
            }
            out
        }
    }
}

/// Splits a line of atoms at whitespace outside parentheses.
fn split_atoms(text: &str) -> Result<Vec<&str>, String> {
    let mut atoms = Vec::new();
    let mut depth = 0i32;
    let mut start = None;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(text[start.unwrap_or(i)..=i].to_owned());
                }
            }
            _ => {}
        }
        if c.is_whitespace() && depth == 0 {
            if let Some(s) = start.take() {
                atoms.push(&text[s..i]);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if depth != 0 {
        return Err(text[start.unwrap_or(0)..].to_owned());
    }
    if let Some(s) = start {
        atoms.push(&text[s..]);
    }
    Ok(atoms)
}

/// Name and comma-separated arguments of `name(a,b)`, or `name` alone.
fn split_atom(atom: &str) -> Option<(&str, Vec<&str>)> {
    match atom.find('(') {
        None => Some((atom, Vec::new())),
        Some(open) => {
            let inner = atom.strip_suffix(')')?.get(open + 1..)?;
            Some((&atom[..open], inner.split(',').map(str::trim).collect()))
        }
    }
}

/// Expands pooled arguments: `fires(t3;t4,1)` stands for `fires(t3,1)` and
/// `fires(t4,1)`.
fn unpool<'a>(args: &[&'a str]) -> Vec<Vec<&'a str>> {
    let mut out = vec![Vec::new()];
    for arg in args {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                arg.split(';').map(str::trim).map(move |alt| {
                    let mut next = prefix.clone();
                    next.push(alt);
                    next
                })
            })
            .collect();
    }
    out
}

struct Collected {
    fires: BTreeMap<usize, Vec<TransitionIdx>>,
    holds: BTreeMap<(usize, PlaceIdx), u64>,
}

fn collect(
    net: &PetriNet,
    k: usize,
    answer: usize,
    text: &str,
) -> Result<Collected, AnswerSetError> {
    let malformed = |t: &str| AnswerSetError::MalformedAtom {
        answer,
        text: t.to_owned(),
    };
    let atoms = split_atoms(text).map_err(|t| malformed(&t))?;
    let mut c = Collected {
        fires: BTreeMap::new(),
        holds: BTreeMap::new(),
    };
    for atom in atoms {
        let (name, pooled) = split_atom(atom).ok_or_else(|| malformed(atom))?;
        let step = |s: &str| match s.parse::<usize>() {
            Ok(v) if v <= k => Ok(v),
            _ => Err(malformed(atom)),
        };
        for args in unpool(&pooled) {
            match (name, args.as_slice()) {
                ("fires", [t, ts]) => {
                    let t = net
                        .transition_index(t)
                        .map_err(|e| AnswerSetError::UnknownName { answer, name: e.0 })?;
                    let list = c.fires.entry(step(ts)?).or_default();
                    if !list.contains(&t) {
                        list.push(t);
                    }
                }
                ("holds", [p, q, ts]) => {
                    let p = net
                        .place_index(p)
                        .map_err(|e| AnswerSetError::UnknownName { answer, name: e.0 })?;
                    let q: u64 = q.parse().map_err(|_| malformed(atom))?;
                    let ts = step(ts)?;
                    if let Some(&first) = c.holds.get(&(ts, p)) {
                        if first != q {
                            return Err(AnswerSetError::ConflictingMarking {
                                answer,
                                place: net.place(p).to_string(),
                                step: ts,
                                first,
                                second: q,
                            });
                        }
                    }
                    c.holds.insert((ts, p), q);
                }
                ("fires" | "holds", _) => return Err(malformed(atom)),
                _ => {}
            }
        }
    }
    Ok(c)
}

/// Parses solver output for a program with horizon `k`.
///
/// Only `fires/2` and `holds/3` atoms are read; every place must hold
/// exactly one count at each step `0..=k`. The marking after the last step,
/// which the program does not represent, is computed by firing.
pub fn parse_answer_sets(
    text: &str,
    net: &PetriNet,
    k: usize,
    format: AnswerFormat,
) -> Result<Vec<ExecutionSequence>, AnswerSetError> {
    let mut out = Vec::new();
    for (i, body) in answer_texts(text, format).iter().enumerate() {
        let answer = i + 1;
        let c = collect(net, k, answer, body)?;
        let mut markings = Vec::with_capacity(k + 2);
        for ts in 0..=k {
            let mut m = Marking::zeros(net.place_count());
            for p in net.place_indices() {
                match c.holds.get(&(ts, p)) {
                    Some(&q) => m.set(p, q),
                    None => {
                        return Err(AnswerSetError::IncompleteMarking {
                            answer,
                            place: net.place(p).to_string(),
                            step: ts,
                        })
                    }
                }
            }
            markings.push(m);
        }
        let firings: Vec<FiringSet> = (0..=k)
            .map(|ts| FiringSet::new(c.fires.get(&ts).cloned().unwrap_or_default()))
            .collect();
        let last = crate::engine::apply(net, &markings[k], &firings[k])
            .map_err(|source| AnswerSetError::Engine { answer, source })?;
        markings.push(last);
        out.push(ExecutionSequence::new(firings, markings));
    }
    Ok(out)
}
