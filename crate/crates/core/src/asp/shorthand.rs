//! Expansion of pooled (`p(a;b)`) and ranged (`p(0..3)`) arguments in facts
//! and answer-set atoms, so listings written in either style compare equal.

use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("shorthand parse error at byte {offset}: {message}")]
pub struct ShorthandError {
    pub offset: usize,
    pub message: String,
}

fn error(offset: usize, message: impl Into<String>) -> ShorthandError {
    ShorthandError {
        offset,
        message: message.into(),
    }
}

/// Rewrites every fact and bare atom so that no argument uses `;` pooling or
/// an integer range `a..b`.
///
/// Rules (statements containing `:-`, `{` or `#`) and `%` comments are copied
/// unchanged. Expansions of a fact are separated by `". "`, those of a bare
/// atom (answer-set output) by a space. Idempotent.
pub fn expand_shorthand(text: &str) -> Result<String, ShorthandError> {
    let mut out = String::with_capacity(text.len());
    for (chunk, terminated, start) in statements(text)? {
        if is_rule(chunk) {
            out.push_str(chunk);
        } else {
            out.push_str(&expand_statement(chunk, start, terminated)?);
        }
        if terminated {
            out.push('.');
        }
    }
    Ok(out)
}

/// Normalized atoms of every fact and bare atom in `text`, ignoring rules.
/// Handy for comparing listings regardless of ordering or layout.
pub fn fact_set(text: &str) -> Result<BTreeSet<String>, ShorthandError> {
    let expanded = expand_shorthand(text)?;
    let mut facts = BTreeSet::new();
    for (chunk, _, start) in statements(&expanded)? {
        if is_rule(chunk) {
            continue;
        }
        for (a, b) in atoms(chunk, start)? {
            let atom: String = chunk[a..b].chars().filter(|c| !c.is_whitespace()).collect();
            facts.insert(atom);
        }
    }
    Ok(facts)
}

fn is_rule(chunk: &str) -> bool {
    let code = strip_comments(chunk);
    code.contains(":-") || code.contains('{') || code.contains('#') || code.contains(":~")
}

fn strip_comments(chunk: &str) -> String {
    chunk
        .lines()
        .map(|l| l.split('%').next().unwrap_or(""))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Splits at top-level periods that are not part of `..`. Yields each
/// statement's text (without the period), whether it ended with a period and
/// its byte offset. Comments are kept inside the statement that follows them.
fn statements(text: &str) -> Result<Vec<(&str, bool, usize)>, ShorthandError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut depth: i64 = 0;
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'%' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            b'"' => {
                i += 1;
                while i < bytes.len() && bytes[i] != b'"' {
                    if bytes[i] == b'\\' {
                        i += 1;
                    }
                    i += 1;
                }
                if i >= bytes.len() {
                    return Err(error(i, "unterminated string"));
                }
            }
            b'(' | b'{' | b'[' => depth += 1,
            b')' | b'}' | b']' => {
                depth -= 1;
                if depth < 0 {
                    return Err(error(i, "unbalanced closing bracket"));
                }
            }
            b'.' if depth == 0 => {
                let range = bytes.get(i + 1) == Some(&b'.') || (i > 0 && bytes[i - 1] == b'.');
                if !range {
                    out.push((&text[start..i], true, start));
                    start = i + 1;
                }
            }
            _ => {}
        }
        i += 1;
    }
    if depth != 0 {
        return Err(error(text.len(), "unbalanced opening bracket"));
    }
    out.push((&text[start..], false, start));
    Ok(out)
}

/// Byte ranges of `name(...)` atoms at the top level of a statement.
fn atoms(chunk: &str, base: usize) -> Result<Vec<(usize, usize)>, ShorthandError> {
    let bytes = chunk.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'%' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'(' {
                let close = matching_paren(bytes, i)
                    .ok_or_else(|| error(base + i, "unclosed argument list"))?;
                out.push((start, close + 1));
                i = close + 1;
            }
            continue;
        }
        i += 1;
    }
    Ok(out)
}

fn matching_paren(bytes: &[u8], open: usize) -> Option<usize> {
    let mut depth = 0;
    for (j, &b) in bytes.iter().enumerate().skip(open) {
        match b {
            b'(' => depth += 1,
            b')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(j);
                }
            }
            _ => {}
        }
    }
    None
}

/// Splits `s` at `sep` occurring outside nested parentheses.
fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn parse_range(s: &str) -> Option<Result<(i64, i64), ()>> {
    let (lo, hi) = s.trim().split_once("..")?;
    match (lo.trim().parse::<i64>(), hi.trim().parse::<i64>()) {
        (Ok(lo), Ok(hi)) => Some(Ok((lo, hi))),
        _ => Some(Err(())),
    }
}

/// Alternatives for one argument, or `None` if it has no shorthand.
fn alternatives(arg: &str, offset: usize) -> Result<Option<Vec<String>>, ShorthandError> {
    let pooled = split_top(arg, ';');
    let mut values = Vec::new();
    let mut changed = pooled.len() > 1;
    for alt in pooled {
        match parse_range(alt) {
            Some(Ok((lo, hi))) => {
                if lo > hi {
                    return Err(error(offset, format!("empty range `{}`", alt.trim())));
                }
                changed = true;
                values.extend((lo..=hi).map(|v| v.to_string()));
            }
            Some(Err(())) => {
                return Err(error(offset, format!("malformed range `{}`", alt.trim())));
            }
            None => {
                let v = alt.trim();
                if v.is_empty() {
                    return Err(error(offset, "empty pooled alternative"));
                }
                values.push(v.to_owned());
            }
        }
    }
    Ok(changed.then_some(values))
}

/// Expansions of one atom, or `None` if it needs none.
fn expand_atom(atom: &str, offset: usize) -> Result<Option<Vec<String>>, ShorthandError> {
    let open = atom.find('(').expect("atom has arguments");
    let name = &atom[..open];
    let inner = &atom[open + 1..atom.len() - 1];
    let args = split_top(inner, ',');
    let mut any = false;
    let mut choices = Vec::with_capacity(args.len());
    for arg in &args {
        match alternatives(arg, offset)? {
            Some(alts) => {
                any = true;
                choices.push(alts);
            }
            None => choices.push(vec![arg.trim().to_owned()]),
        }
    }
    if !any {
        return Ok(None);
    }
    let mut combos: Vec<Vec<&str>> = vec![Vec::new()];
    for alts in &choices {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                alts.iter().map(move |a| {
                    let mut p = prefix.clone();
                    p.push(a.as_str());
                    p
                })
            })
            .collect();
    }
    Ok(Some(
        combos
            .into_iter()
            .map(|args| format!("{name}({})", args.join(",")))
            .collect(),
    ))
}

fn expand_statement(chunk: &str, base: usize, terminated: bool) -> Result<String, ShorthandError> {
    let sep = if terminated { ". " } else { " " };
    let mut out = String::with_capacity(chunk.len());
    let mut last = 0;
    for (a, b) in atoms(chunk, base)? {
        if let Some(expanded) = expand_atom(&chunk[a..b], base + a)? {
            out.push_str(&chunk[last..a]);
            out.push_str(&expanded.join(sep));
            last = b;
        }
    }
    out.push_str(&chunk[last..]);
    Ok(out)
}
