//! Parsers for rows and chains written the way they are printed, e.g.
//! `22y1 + 46y2 >= 43`, `x11 + x45 - x9 <= 1`, `62 --19/FS--> 18 --16/FS--> 16`.

use num_traits::{One, Zero};

use crate::lp::{parse_rational, Rational, Relation};
use crate::separation::LinkKind;

/// One parsed row: `(coefficient, variable prefix, index)` terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedRow {
    pub terms: Vec<(Rational, String, u32)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl ParsedRow {
    /// Dense coefficients over indices `first..first + dim`, summing repeated terms.
    pub fn dense(&self, prefix: &str, first: u32, dim: usize) -> Result<Vec<Rational>, String> {
        let mut coeffs = vec![Rational::zero(); dim];
        for (a, p, j) in &self.terms {
            if p != prefix {
                return Err(format!("unexpected variable {p}{j}"));
            }
            let k = j.checked_sub(first).filter(|&k| (k as usize) < dim).ok_or_else(|| format!("index {p}{j} out of range"))?;
            coeffs[k as usize] += a;
        }
        Ok(coeffs)
    }
}

pub fn parse_row(text: &str) -> Result<ParsedRow, String> {
    let (pos, op) = ["<=", ">=", "="]
        .iter()
        .find_map(|op| text.find(op).map(|p| (p, *op)))
        .ok_or_else(|| format!("no relation in {text:?}"))?;
    let relation = Relation::parse(op).expect("known relation");
    let lhs: String = text[..pos].chars().filter(|c| !c.is_whitespace()).collect();
    let rhs = parse_rational(text[pos + op.len()..].trim()).map_err(|e| e.to_string())?;
    let bytes = lhs.as_bytes();
    let mut i = 0;
    let mut terms = Vec::new();
    while i < bytes.len() {
        let mut sign = Rational::one();
        if bytes[i] == b'+' || bytes[i] == b'-' {
            if bytes[i] == b'-' {
                sign = -sign;
            }
            i += 1;
        } else if !terms.is_empty() {
            return Err(format!("missing operator in {text:?}"));
        }
        let start = i;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.' || bytes[i] == b'/') {
            i += 1;
        }
        let coef = if i > start { parse_rational(&lhs[start..i]).map_err(|e| e.to_string())? } else { Rational::one() };
        while i < bytes.len() && bytes[i] == b'*' {
            i += 1;
        }
        let pstart = i;
        while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
            i += 1;
        }
        if i == pstart {
            return Err(format!("expected a variable in {text:?}"));
        }
        let prefix = lhs[pstart..i].to_string();
        while i < bytes.len() && bytes[i] == b'_' {
            i += 1;
        }
        let istart = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let index = lhs[istart..i].parse::<u32>().map_err(|_| format!("expected an index in {text:?}"))?;
        terms.push((sign * coef, prefix, index));
    }
    if terms.is_empty() {
        return Err(format!("empty left-hand side in {text:?}"));
    }
    Ok(ParsedRow { terms, relation, rhs })
}

/// Links `(from, via, kind, to)` of a chain.
pub fn parse_chain(text: &str) -> Result<Vec<(u32, u32, LinkKind, u32)>, String> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() < 3 || tokens.len().is_multiple_of(2) {
        return Err(format!("malformed chain {text:?}"));
    }
    let num = |s: &str| s.parse::<u32>().map_err(|_| format!("bad set index {s:?} in {text:?}"));
    let mut links = Vec::new();
    let mut from = num(tokens[0])?;
    for pair in tokens[1..].chunks(2) {
        let arrow = pair[0]
            .strip_prefix("--")
            .and_then(|s| s.strip_suffix("-->"))
            .ok_or_else(|| format!("bad link {:?}", pair[0]))?;
        let (via, kind) = arrow.split_once('/').ok_or_else(|| format!("bad link {:?}", pair[0]))?;
        let kind = match kind {
            "FS" => LinkKind::Fs,
            "UC" => LinkKind::Uc,
            other => return Err(format!("unknown link kind {other:?}")),
        };
        let to = num(pair[1])?;
        links.push((from, num(via)?, kind, to));
        from = to;
    }
    Ok(links)
}
