//! Plain-text family files and matrix dumps.
//!
//! One set per line, elements separated by whitespace or commas, `empty` for
//! the empty set, `#` starts a comment. Optional header lines: `ground <n>`
//! declares the ground set (otherwise the largest element), and `generators`
//! marks the listed sets as generators to be closed under union.

use std::fmt::Write as _;

use thiserror::Error;

use crate::family::{mask_to_complement_column, ElementSet, FamilyError, SetFamily, MAX_GROUND};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate set {set} (first on line {first})")]
    Duplicate { line: usize, first: usize, set: String },
    #[error("line {line}: element {element} exceeds the declared ground set of size {ground}")]
    OutsideGround { line: usize, element: usize, ground: usize },
    #[error("no sets given")]
    NoSets,
    #[error(transparent)]
    Family(#[from] FamilyError),
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, message: message.into() }
}

/// Parses a family file; with the `generators` header the result is the union closure.
pub fn parse_family(text: &str) -> Result<SetFamily, ParseError> {
    let mut ground: Option<(usize, usize)> = None;
    let mut generators = false;
    let mut sets: Vec<(usize, ElementSet, Vec<usize>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).collect();
        match tokens[0] {
            "ground" => {
                if ground.is_some() || !sets.is_empty() {
                    return Err(syntax(line, "`ground` must appear once, before any set"));
                }
                let n = match tokens.as_slice() {
                    [_, n] => n.parse::<usize>().map_err(|_| syntax(line, format!("bad ground size {n:?}")))?,
                    _ => return Err(syntax(line, "expected `ground <n>`")),
                };
                if n == 0 || n > MAX_GROUND {
                    return Err(syntax(line, format!("ground size must be in 1..={MAX_GROUND}")));
                }
                ground = Some((n, line));
            }
            "generators" => {
                if tokens.len() != 1 || generators {
                    return Err(syntax(line, "`generators` takes no arguments and appears once"));
                }
                generators = true;
            }
            "empty" => {
                if tokens.len() != 1 {
                    return Err(syntax(line, "`empty` must stand alone"));
                }
                sets.push((line, ElementSet::EMPTY, Vec::new()));
            }
            _ => {
                let mut elements = Vec::with_capacity(tokens.len());
                for t in &tokens {
                    let e = t.parse::<usize>().map_err(|_| syntax(line, format!("bad element {t:?}")))?;
                    if e == 0 || e > MAX_GROUND {
                        return Err(syntax(line, format!("element {e} must be in 1..={MAX_GROUND}")));
                    }
                    if elements.contains(&e) {
                        return Err(syntax(line, format!("element {e} repeated")));
                    }
                    elements.push(e);
                }
                if let Some((n, _)) = ground {
                    if let Some(&e) = elements.iter().find(|&&e| e > n) {
                        return Err(ParseError::OutsideGround { line, element: e, ground: n });
                    }
                }
                sets.push((line, ElementSet::from_elements(elements.iter().copied()), elements));
            }
        }
    }
    if sets.is_empty() {
        return Err(ParseError::NoSets);
    }
    for (k, (line, set, _)) in sets.iter().enumerate() {
        if let Some((first, _, _)) = sets[..k].iter().find(|(_, s, _)| s == set) {
            return Err(ParseError::Duplicate { line: *line, first: *first, set: set.to_string() });
        }
    }
    let n = match ground {
        Some((n, _)) => n,
        None => sets.iter().flat_map(|(_, _, e)| e.iter().copied()).max().unwrap_or(1),
    };
    let family = SetFamily::from_masks(n, sets.iter().map(|(_, s, _)| s.mask()))?;
    Ok(if generators { family.union_closure()? } else { family })
}

/// Prints a family in the file format, sets ordered by mask.
pub fn print_family(family: &SetFamily) -> String {
    let mut masks: Vec<u32> = family.masks().collect();
    masks.sort_unstable();
    let mut out = format!("ground {}\n", family.n());
    for m in masks {
        let set = ElementSet(m);
        if set.is_empty() {
            out.push_str("empty\n");
        } else {
            let items: Vec<String> = set.elements().iter().map(|e| e.to_string()).collect();
            out.push_str(&items.join(" "));
            out.push('\n');
        }
    }
    out
}

/// 0/1 incidence matrix with one column per set and rows `c_1..c_n`.
/// Columns are labeled and ordered by mask, or by the complemented column
/// index (element `i` present iff bit `n - i` is zero) with `complemented`.
pub fn matrix_dump(family: &SetFamily, complemented: bool) -> String {
    let n = family.n();
    let mut cols: Vec<(u32, u32)> = family
        .masks()
        .map(|m| (if complemented { mask_to_complement_column(m, n) } else { m }, m))
        .collect();
    cols.sort_unstable();
    let width = cols.iter().map(|(l, _)| l.to_string().len()).max().unwrap_or(1).max(1);
    let label_width = format!("c_{n}").len();
    let mut out = String::new();
    let _ = write!(out, "{:>label_width$}", "");
    for (label, _) in &cols {
        let _ = write!(out, " {label:>width$}");
    }
    out.push('\n');
    for i in 1..=n {
        let _ = write!(out, "{:>label_width$}", format!("c_{i}"));
        for (_, m) in &cols {
            let _ = write!(out, " {:>width$}", if ElementSet(*m).contains(i) { 1 } else { 0 });
        }
        out.push('\n');
    }
    out
}
