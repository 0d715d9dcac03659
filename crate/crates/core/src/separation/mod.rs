//! The separation problem: does some union-closed `B` with `B ⊎ A = B`
//! violate the weighted Poonen inequality for weights `c`?
//!
//! Variables are the indicators `x_S`, one per subset of `[n]`, named
//! `x_<mask>`. Rows:
//! - UC: `x_S + x_T - x_{S∪T} <= 1`
//! - FS: `x_S - x_{A∪S} <= 0` for `A ∈ A`
//! - WV: `Σ_S (c(S) - c([n]∖S)) x_S <= -1`
//! - bounds `0 <= x_S <= 1`

mod bnb;
mod cuts;
mod relax;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::family::{FamilyError, SetFamily};
use crate::lp::rational::serde_rational_map;
use crate::lp::{int, LinearConstraint, LinearSystem, Rational, Relation};

pub use bnb::solve_separation_with;
pub use cuts::{
    fc_chain_cut, generate_fc_cuts, validate_row, verify_fc_chain, ChainCutError, DEFAULT_FC_CUT_CAP,
};

/// Default branch-and-bound node cap.
pub const DEFAULT_NODE_LIMIT: u64 = 1_000_000;
/// Environment variable overriding [`DEFAULT_NODE_LIMIT`].
pub const NODE_LIMIT_ENV: &str = "FRANKL_NODE_LIMIT";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SepError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("weight vector must have {expected} entries, got {got}")]
    WeightLength { expected: usize, got: usize },
    #[error("weights sum to zero")]
    ZeroWeights,
    #[error("union of the family is not the whole ground set")]
    NotSpanning,
    #[error("undecided: node limit {0} exceeded")]
    NodeLimit(u64),
}

/// Nonnegative integer weights per ground element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector {
    pub entries: Vec<u64>,
}

impl WeightVector {
    pub fn new(entries: Vec<u64>) -> Result<Self, SepError> {
        if entries.iter().all(|&c| c == 0) {
            return Err(SepError::ZeroWeights);
        }
        Ok(Self { entries })
    }

    pub fn total(&self) -> i64 {
        self.entries.iter().map(|&c| c as i64).sum()
    }

    /// `c(S) = Σ_{i∈S} c_i`.
    pub fn weight_of(&self, mask: u32) -> i64 {
        self.entries
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &c)| c as i64)
            .sum()
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub fn var_name(mask: u32) -> String {
    format!("x_{mask}")
}

pub fn parse_var_name(name: &str) -> Option<u32> {
    name.strip_prefix("x_")?.parse().ok()
}

/// One link `from -> to` of a chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainLink {
    pub from: u32,
    pub to: u32,
    pub via: u32,
    pub kind: LinkKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    /// `via ∈ A` and `via ∪ from = to`.
    Fs,
    /// `via` lies in the closure of the positive side and `from ∪ via = to`.
    Uc,
}

/// Sequence of justified links starting at `source`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FcChain {
    pub source: u32,
    pub links: Vec<ChainLink>,
}

impl FcChain {
    pub fn target(&self) -> u32 {
        self.links.last().map_or(self.source, |l| l.to)
    }

    pub fn is_well_formed(&self) -> bool {
        let mut at = self.source;
        for l in &self.links {
            if l.from != at {
                return false;
            }
            at = l.to;
        }
        !self.links.is_empty()
    }
}

/// What a proof row claims to be; every claim is rechecked by [`validate_row`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RowKind {
    Uc,
    Fs,
    Wv,
    Fc,
    FcChain {
        positive: Vec<u32>,
        negative: Vec<u32>,
        chains: Vec<FcChain>,
    },
    Fixing,
}

/// Sparse integer row `Σ coeffs <= rhs` (or `=` for fixings).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseRow {
    pub name: String,
    pub coeffs: Vec<(u32, i64)>,
    pub rhs: i64,
    pub relation: Relation,
    pub kind: RowKind,
}

impl SparseRow {
    pub fn to_constraint(&self, dim: usize) -> LinearConstraint {
        let mut coeffs = vec![Rational::zero(); dim];
        for &(m, a) in &self.coeffs {
            coeffs[m as usize] += int(a);
        }
        LinearConstraint::new(self.name.clone(), coeffs, self.relation, int(self.rhs))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(m, a)| a as f64 * x[m as usize]).sum()
    }
}

pub fn uc_row(s: u32, t: u32) -> SparseRow {
    let (s, t) = (s.min(t), s.max(t));
    let mut coeffs = BTreeMap::new();
    *coeffs.entry(s).or_insert(0) += 1;
    *coeffs.entry(t).or_insert(0) += 1;
    *coeffs.entry(s | t).or_insert(0) -= 1;
    SparseRow {
        name: format!("uc:{s}+{t}"),
        coeffs: coeffs.into_iter().filter(|(_, a)| *a != 0).collect(),
        rhs: 1,
        relation: Relation::Le,
        kind: RowKind::Uc,
    }
}

pub fn fs_row(s: u32, t: u32) -> SparseRow {
    SparseRow {
        name: format!("fs:{s}->{t}"),
        coeffs: vec![(s, 1), (t, -1)],
        rhs: 0,
        relation: Relation::Le,
        kind: RowKind::Fs,
    }
}

pub fn fc_row(t: u32, u: u32, f: u32) -> SparseRow {
    let (t, u) = (t.min(u), t.max(u));
    let mut coeffs = BTreeMap::new();
    *coeffs.entry(t).or_insert(0) += 1;
    *coeffs.entry(u).or_insert(0) += 1;
    *coeffs.entry(t | u).or_insert(0) -= 1;
    *coeffs.entry(f).or_insert(0) -= 1;
    SparseRow {
        name: format!("fc:{t}+{u}-{f}"),
        coeffs: coeffs.into_iter().filter(|(_, a)| *a != 0).collect(),
        rhs: 0,
        relation: Relation::Le,
        kind: RowKind::Fc,
    }
}

pub fn fixing_row(mask: u32, value: u8) -> SparseRow {
    SparseRow {
        name: format!("fix:{mask}"),
        coeffs: vec![(mask, 1)],
        rhs: value as i64,
        relation: Relation::Eq,
        kind: RowKind::Fixing,
    }
}

/// One FS pair: `x_s <= x_t` with `t = a ∪ s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FsPair {
    pub s: u32,
    pub a: u32,
    pub t: u32,
}

/// `X(A, c)` with its materialized rows and cut pool.
#[derive(Debug, Clone)]
pub struct SeparationModel {
    a: SetFamily,
    c: WeightVector,
    wv: Vec<i64>,
    fs_pairs: Vec<FsPair>,
    /// Nonempty join-irreducible members of `A`; their FS rows imply all others.
    generators: Vec<u32>,
    pub cut_pool: Vec<SparseRow>,
}

pub fn build_model(a: &SetFamily, c: &WeightVector) -> Result<SeparationModel, SepError> {
    if !a.is_union_closed()? {
        return Err(FamilyError::NotUnionClosed.into());
    }
    if !a.contains_empty() {
        return Err(FamilyError::MissingEmptySet.into());
    }
    let n = a.n();
    if c.entries.len() != n {
        return Err(SepError::WeightLength { expected: n, got: c.entries.len() });
    }
    if c.total() < 1 {
        return Err(SepError::ZeroWeights);
    }
    if a.union_all().mask() != a.ground().full_mask() {
        return Err(SepError::NotSpanning);
    }
    let total = c.total();
    let size = a.ground().power_size() as u32;
    let wv = (0..size).map(|m| 2 * c.weight_of(m) - total).collect();
    let mut fs_pairs = Vec::new();
    for s in 0..size {
        for am in a.masks() {
            if am | s != s {
                fs_pairs.push(FsPair { s, a: am, t: am | s });
            }
        }
    }
    let generators = a.minimal_generator()?.masks().filter(|&m| m != 0).collect();
    Ok(SeparationModel { a: a.clone(), c: c.clone(), wv, fs_pairs, generators, cut_pool: Vec::new() })
}

impl SeparationModel {
    pub fn family(&self) -> &SetFamily {
        &self.a
    }

    pub fn weights(&self) -> &WeightVector {
        &self.c
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn dim(&self) -> usize {
        1 << self.n()
    }

    /// WV coefficient `c(S) - c([n]∖S)` per mask.
    pub fn wv_coeffs(&self) -> &[i64] {
        &self.wv
    }

    pub fn fs_pairs(&self) -> &[FsPair] {
        &self.fs_pairs
    }

    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    pub fn wv_row(&self) -> SparseRow {
        SparseRow {
            name: "wv".into(),
            coeffs: self.wv.iter().enumerate().filter(|(_, &w)| w != 0).map(|(m, &w)| (m as u32, w)).collect(),
            rhs: -1,
            relation: Relation::Le,
            kind: RowKind::Wv,
        }
    }

    /// Objective `Σ_{S∈B} (Σc - 2c(S))`, the negated WV value.
    pub fn objective(&self, family: &[u32]) -> i64 {
        -family.iter().map(|&m| self.wv[m as usize]).sum::<i64>()
    }

    pub fn variables(&self) -> Vec<String> {
        (0..self.dim() as u32).map(var_name).collect()
    }

    /// Empty system over the model variables with bounds `0 <= x <= 1`.
    pub fn empty_system(&self) -> LinearSystem {
        let mut sys = LinearSystem::new(self.variables());
        sys.upper = vec![Some(int(1)); self.dim()];
        sys
    }

    /// Every materialized row (UC over all pairs, FS, WV) plus the cut pool.
    pub fn full_system(&self) -> LinearSystem {
        let mut sys = self.empty_system();
        let dim = self.dim() as u32;
        for s in 0..dim {
            for t in s + 1..dim {
                if s | t != s && s | t != t {
                    sys.push(uc_row(s, t).to_constraint(self.dim()));
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        for p in &self.fs_pairs {
            if seen.insert((p.s, p.t)) {
                sys.push(fs_row(p.s, p.t).to_constraint(self.dim()));
            }
        }
        sys.push(self.wv_row().to_constraint(self.dim()));
        for cut in &self.cut_pool {
            sys.push(cut.to_constraint(self.dim()));
        }
        sys
    }

    /// Exact membership test for `X(A, c)`.
    pub fn is_feasible_family(&self, family: &SetFamily) -> bool {
        family.n() == self.n()
            && !family.is_empty()
            && family.is_union_closed().unwrap_or(false)
            && family.uplus(&self.a).is_ok_and(|u| &u == family)
            && -self.objective(&family.masks().collect::<Vec<_>>()) <= -1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Feasibility,
    #[default]
    MaxViolation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    pub mode: Mode,
    pub node_limit: u64,
    /// Variables branched on first, in order, while unfixed.
    pub branch_first_on: Vec<u32>,
    /// Separate FC cuts at fractional points.
    pub fc_cuts: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        let node_limit = std::env::var(NODE_LIMIT_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(DEFAULT_NODE_LIMIT);
        Self { mode: Mode::MaxViolation, node_limit, branch_first_on: Vec::new(), fc_cuts: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofLeaf {
    /// Branch fixings on the path to this leaf, `(mask, value)`.
    pub fixed: Vec<(u32, u8)>,
    /// Claimed type of every row, keyed by row name.
    pub rows: BTreeMap<String, RowKind>,
    pub system: LinearSystem,
    #[serde(with = "serde_rational_map")]
    pub duals: BTreeMap<String, Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProofNode {
    Branch { var: u32, zero: Box<ProofNode>, one: Box<ProofNode> },
    Leaf(ProofLeaf),
}

impl ProofNode {
    pub fn leaves(&self) -> Vec<&ProofLeaf> {
        match self {
            ProofNode::Leaf(l) => vec![l],
            ProofNode::Branch { zero, one, .. } => {
                let mut v = zero.leaves();
                v.extend(one.leaves());
                v
            }
        }
    }
}

/// Branch-and-bound infeasibility proof.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BnbProof {
    pub n: usize,
    pub root: ProofNode,
}

impl BnbProof {
    pub fn leaf_count(&self) -> usize {
        self.root.leaves().len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SeparationOutcome {
    Violating { family: SetFamily, objective: i64 },
    Empty { proof: BnbProof },
}

impl SeparationOutcome {
    pub fn is_empty(&self) -> bool {
        matches!(self, SeparationOutcome::Empty { .. })
    }
}

pub fn solve_separation(model: &SeparationModel, mode: Mode) -> Result<SeparationOutcome, SepError> {
    solve_separation_with(model, &SolveOptions { mode, ..SolveOptions::default() })
}
