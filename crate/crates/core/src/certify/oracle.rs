//! Exhaustive enumeration for ground sets with at most four elements.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::CertifyError;
use crate::driver::{nonfc_system, poonen_row, witness_row_name};
use crate::family::SetFamily;
use crate::lp::{lcm_scale, solve_feasibility, LinearSystem, LpOutcome, Rational};
use crate::separation::WeightVector;

pub const ORACLE_MAX_N: usize = 4;

/// Result of the exhaustive classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum OracleVerdict {
    Fc {
        weights: WeightVector,
    },
    NonFc {
        system: LinearSystem,
        #[serde(with = "crate::lp::rational::serde_rational_map")]
        duals: BTreeMap<String, Rational>,
    },
}

impl OracleVerdict {
    pub fn is_fc(&self) -> bool {
        matches!(self, OracleVerdict::Fc { .. })
    }
}

/// Nonempty union-closed subfamilies of `P([n])`, bit `m` standing for mask `m`.
fn union_closed_families(n: usize) -> &'static [u64] {
    static CACHE: [OnceLock<Vec<u64>>; ORACLE_MAX_N + 1] =
        [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    CACHE[n].get_or_init(|| {
        let dim = 1usize << n;
        (1u64..1u64 << dim).filter(|&f| is_closed_under(f, f, dim)).collect()
    })
}

/// Whether `s ∪ t ∈ f` for every `s ∈ f`, `t ∈ g`.
fn is_closed_under(f: u64, g: u64, dim: usize) -> bool {
    (0..dim).filter(|&s| f >> s & 1 == 1).all(|s| (0..dim).filter(|&t| g >> t & 1 == 1).all(|t| f >> (s | t) & 1 == 1))
}

/// `{s ∪ t : s ∈ f, t ∈ g}`.
fn uplus_bits(f: u64, g: u64, dim: usize) -> u64 {
    let mut out = 0u64;
    for s in (0..dim).filter(|&s| f >> s & 1 == 1) {
        for t in (0..dim).filter(|&t| g >> t & 1 == 1) {
            out |= 1 << (s | t);
        }
    }
    out
}

fn bits_of(a: &SetFamily) -> u64 {
    a.masks().fold(0, |acc, m| acc | 1 << m)
}

fn family_of(n: usize, bits: u64) -> SetFamily {
    SetFamily::from_masks(n, (0..1u32 << n).filter(|&m| bits >> m & 1 == 1)).expect("masks within the ground set")
}

fn check_size(a: &SetFamily) -> Result<(), CertifyError> {
    if a.n() > ORACLE_MAX_N {
        return Err(CertifyError::OracleTooLarge(a.n()));
    }
    Ok(())
}

/// Every nonempty union-closed `B ⊆ P([n])` with `B ⊎ A = B`, in enumeration order.
pub fn feasible_families(a: &SetFamily) -> Result<Vec<SetFamily>, CertifyError> {
    check_size(a)?;
    let n = a.n();
    let dim = 1usize << n;
    let ab = bits_of(a);
    Ok(union_closed_families(n)
        .iter()
        .filter(|&&f| uplus_bits(f, ab, dim) == f)
        .map(|&f| family_of(n, f))
        .collect())
}

/// Lexicographic order on incidence vectors read over masks ascending.
fn lex_cmp(x: u64, y: u64) -> Ordering {
    if x == y {
        return Ordering::Equal;
    }
    let d = (x ^ y).trailing_zeros();
    if x >> d & 1 == 0 {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// Maximum of `Σ_{S∈B} (Σc - 2c(S))` over feasible families (with `∅` adjoined
/// to `A`) whose value is at least one, ties broken by the lexicographically
/// smallest incidence vector. `None` when no family qualifies.
pub fn brute_force_separation(a: &SetFamily, c: &WeightVector) -> Result<Option<(i64, SetFamily)>, CertifyError> {
    check_size(a)?;
    let n = a.n();
    if c.entries.len() != n {
        return Err(CertifyError::Malformed(format!("{} weights for a ground set of size {n}", c.entries.len())));
    }
    let dim = 1usize << n;
    let ab = bits_of(&a.add_empty());
    let total = c.total();
    let value = |f: u64| (0..dim as u32).filter(|&m| f >> m & 1 == 1).map(|m| total - 2 * c.weight_of(m)).sum::<i64>();
    let mut best: Option<(i64, u64)> = None;
    for &f in union_closed_families(n) {
        if uplus_bits(f, ab, dim) != f {
            continue;
        }
        let v = value(f);
        if v < 1 {
            continue;
        }
        best = match best {
            Some((bv, bf)) if bv > v || (bv == v && lex_cmp(bf, f) != Ordering::Greater) => Some((bv, bf)),
            _ => Some((v, f)),
        };
    }
    Ok(best.map(|(v, f)| (v, family_of(n, f))))
}

/// Classifies by solving the complete system over all feasible families.
///
/// Rows are added by exact row generation over the deduplicated list, so a
/// Non-FC certificate lists only the rows it needs.
pub fn brute_force_classify(a: &SetFamily) -> Result<OracleVerdict, CertifyError> {
    check_size(a)?;
    let n = a.n();
    if !a.is_union_closed()? || a.sets().iter().all(|s| s.is_empty()) || a.union_all().mask() != a.ground().full_mask()
    {
        return Err(CertifyError::Malformed("the oracle needs a spanning union-closed family other than {∅}".into()));
    }
    let mut seen = BTreeSet::new();
    let candidates: Vec<SetFamily> = feasible_families(&a.add_empty())?
        .into_iter()
        .filter(|b| seen.insert((b.frequencies().counts, b.len())))
        .collect();
    let mut chosen: Vec<SetFamily> = Vec::new();
    loop {
        let sys = nonfc_system(n, &chosen);
        match solve_feasibility(&sys) {
            LpOutcome::Infeasible { duals } => return Ok(OracleVerdict::NonFc { system: sys, duals }),
            LpOutcome::Feasible { point } => {
                let violated = candidates
                    .iter()
                    .map(|b| (b, poonen_row(b, witness_row_name(0))))
                    .filter(|(_, row)| !row.satisfied_by(&point))
                    .map(|(b, row)| (&row.lhs(&point) - &row.rhs, b))
                    .min_by(|x, y| x.0.cmp(&y.0));
                match violated {
                    Some((_, b)) => chosen.push(b.clone()),
                    None => {
                        let scaled = lcm_scale(&point)?;
                        let entries = scaled
                            .iter()
                            .map(|v| v.to_u64().ok_or_else(|| CertifyError::Malformed("weight overflow".into())))
                            .collect::<Result<Vec<_>, _>>()?;
                        return Ok(OracleVerdict::Fc { weights: WeightVector::new(entries)? });
                    }
                }
            }
        }
    }
}
