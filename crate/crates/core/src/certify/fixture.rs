//! Fixture formats for certificates stored the way they are printed.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::text::{parse_chain, parse_row};
use super::{verify_nonfc, CertifyError, PrintedSystem, RowForm};
use crate::family::{mask_to_complement_column, complement_column_to_mask, ElementSet, SetFamily};
use crate::lp::{parse_rational, LinearConstraint, Rational};
use crate::report::VerificationReport;
use crate::separation::{
    build_model, var_name, BnbProof, ChainLink, FcChain, ProofLeaf, ProofNode, RowKind, WeightVector,
};

/// How set indices in a fixture map to masks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnConvention {
    /// Element `i` is in column `j` iff bit `n - i` of `j` is zero.
    #[serde(alias = "paper")]
    Complemented,
    /// Index is the mask: element `i` is bit `i - 1`.
    #[default]
    Native,
}

impl ColumnConvention {
    pub fn to_mask(self, j: u32, n: usize) -> u32 {
        match self {
            ColumnConvention::Complemented => complement_column_to_mask(j, n),
            ColumnConvention::Native => j,
        }
    }

    pub fn from_mask(self, mask: u32, n: usize) -> u32 {
        match self {
            ColumnConvention::Complemented => mask_to_complement_column(mask, n),
            ColumnConvention::Native => mask,
        }
    }
}

/// A family given by generators (closed under union) or listed exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilySpec {
    Generated { generators: Vec<String> },
    Explicit { sets: Vec<String> },
}

impl FamilySpec {
    /// Builds the family; a set listed twice is rejected rather than merged.
    pub fn build(&self, n: usize) -> Result<SetFamily, CertifyError> {
        let (listed, closed) = match self {
            FamilySpec::Generated { generators } => (generators, true),
            FamilySpec::Explicit { sets } => (sets, false),
        };
        let refs: Vec<&str> = listed.iter().map(String::as_str).collect();
        let family = SetFamily::from_digit_strings(n, &refs)?;
        if family.len() != listed.len() {
            return Err(CertifyError::Malformed(format!("a set is listed twice in {}", listed.join(", "))));
        }
        Ok(if closed { family.union_closure()? } else { family })
    }
}

/// A printed row with its printed dual.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrintedEntry {
    pub row: String,
    pub dual: String,
}

/// A witness family: a 0/1 matrix with one string per column (elements top
/// to bottom), or `(P([n] ∖ avoid) ⊎ A) ∪ extra`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WitnessSpec {
    Columns {
        columns: Vec<String>,
    },
    Derived {
        avoid: Vec<usize>,
        #[serde(default)]
        extra: Vec<String>,
    },
}

impl WitnessSpec {
    pub fn build(&self, n: usize, a: &SetFamily) -> Result<SetFamily, CertifyError> {
        match self {
            WitnessSpec::Columns { columns } => {
                let mut masks = Vec::with_capacity(columns.len());
                for col in columns {
                    if col.len() != n || !col.chars().all(|ch| ch == '0' || ch == '1') {
                        return Err(CertifyError::Malformed(format!("column {col:?} is not a 0/1 string of length {n}")));
                    }
                    let set = ElementSet::from_elements(col.chars().enumerate().filter(|(_, ch)| *ch == '1').map(|(i, _)| i + 1));
                    if masks.contains(&set.mask()) {
                        return Err(CertifyError::Malformed(format!("duplicate column {col}")));
                    }
                    masks.push(set.mask());
                }
                Ok(SetFamily::from_masks(n, masks)?)
            }
            WitnessSpec::Derived { avoid, extra } => {
                if avoid.iter().any(|&j| j == 0 || j > n) {
                    return Err(CertifyError::Malformed(format!("avoided element out of range in {avoid:?}")));
                }
                let base = SetFamily::power_set_avoiding(n, ElementSet::from_elements(avoid.iter().copied()))?;
                let mut b = base.uplus(a)?;
                if !extra.is_empty() {
                    let refs: Vec<&str> = extra.iter().map(String::as_str).collect();
                    let more = SetFamily::from_digit_strings(n, &refs)?;
                    b = SetFamily::from_masks(n, b.masks().chain(more.masks()))?;
                }
                Ok(b)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessEntry {
    #[serde(flatten)]
    pub family: WitnessSpec,
    pub row: String,
    pub dual: String,
}

/// A printed Non-FC system: normalization row plus one row per witness family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonFcFixture {
    pub schema_version: u32,
    pub id: String,
    pub source: String,
    pub n: usize,
    pub family: FamilySpec,
    pub form: RowForm,
    pub normalization: PrintedEntry,
    pub witnesses: Vec<WitnessEntry>,
}

impl NonFcFixture {
    fn prefix(&self) -> &'static str {
        match self.form {
            RowForm::Y => "y",
            RowForm::Z => "z",
        }
    }

    fn printed_row(&self, text: &str, name: String) -> Result<LinearConstraint, CertifyError> {
        let row = parse_row(text).map_err(CertifyError::Malformed)?;
        let coeffs = row.dense(self.prefix(), 1, self.n).map_err(CertifyError::Malformed)?;
        Ok(LinearConstraint::new(name, coeffs, row.relation, row.rhs))
    }

    pub fn family(&self) -> Result<SetFamily, CertifyError> {
        self.family.build(self.n)
    }

    pub fn witnesses(&self) -> Result<Vec<SetFamily>, CertifyError> {
        let a = self.family()?;
        self.witnesses.iter().map(|w| w.family.build(self.n, &a)).collect()
    }

    pub fn printed(&self) -> Result<PrintedSystem, CertifyError> {
        let normalization = self.printed_row(&self.normalization.row, crate::driver::NORMALIZATION_ROW.into())?;
        let rows = self
            .witnesses
            .iter()
            .enumerate()
            .map(|(k, w)| self.printed_row(&w.row, crate::driver::witness_row_name(k + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PrintedSystem { normalization, rows })
    }

    pub fn duals(&self) -> Result<BTreeMap<String, Rational>, CertifyError> {
        let mut duals = BTreeMap::new();
        duals.insert(crate::driver::NORMALIZATION_ROW.to_string(), parse_rational(&self.normalization.dual)?);
        for (k, w) in self.witnesses.iter().enumerate() {
            duals.insert(crate::driver::witness_row_name(k + 1), parse_rational(&w.dual)?);
        }
        Ok(duals)
    }

    pub fn verify(&self) -> Result<VerificationReport, CertifyError> {
        let a = self.family()?;
        let witnesses = self.witnesses()?;
        verify_nonfc(&a, &witnesses, &self.duals()?, Some(&self.printed()?), self.form)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKindTag {
    Uc,
    Fs,
    Fc,
    FcChain,
    Wv,
    Fixing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofRowEntry {
    pub kind: RowKindTag,
    pub row: String,
    pub dual: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub chains: Vec<String>,
    /// The row as printed, kept when `row` corrects a misprint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub printed: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafEntry {
    /// Branch fixings `(set index, value)` in the fixture's convention.
    pub fixed: Vec<(u32, u8)>,
    pub rows: Vec<ProofRowEntry>,
}

/// A printed branch-and-bound proof with leaf systems listed row by row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FcProofFixture {
    pub schema_version: u32,
    pub id: String,
    pub source: String,
    pub n: usize,
    pub column_convention: ColumnConvention,
    pub family: FamilySpec,
    pub weights: Vec<u64>,
    pub leaves: Vec<LeafEntry>,
}

impl FcProofFixture {
    fn mask(&self, j: u32) -> Result<u32, CertifyError> {
        if (j as usize) >= 1 << self.n {
            return Err(CertifyError::Malformed(format!("set index {j} out of range")));
        }
        Ok(self.column_convention.to_mask(j, self.n))
    }

    /// Converts to the native proof representation.
    pub fn to_proof(&self) -> Result<(SetFamily, WeightVector, BnbProof), CertifyError> {
        let a = self.family.build(self.n)?;
        let c = WeightVector::new(self.weights.clone())?;
        let model = build_model(&a.add_empty(), &c)?;
        let dim = model.dim();
        let mut leaves = Vec::new();
        for leaf in &self.leaves {
            let fixed = leaf
                .fixed
                .iter()
                .map(|&(j, v)| Ok((self.mask(j)?, v)))
                .collect::<Result<Vec<_>, CertifyError>>()?;
            let mut system = model.empty_system();
            let mut rows = BTreeMap::new();
            let mut duals = BTreeMap::new();
            for (k, entry) in leaf.rows.iter().enumerate() {
                let parsed = parse_row(&entry.row).map_err(CertifyError::Malformed)?;
                let mut coeffs = vec![Rational::zero(); dim];
                for (a, p, j) in &parsed.terms {
                    if p != "x" {
                        return Err(CertifyError::Malformed(format!("unexpected variable {p}{j}")));
                    }
                    coeffs[self.mask(*j)? as usize] += a;
                }
                let name = format!("{}:{}", tag_name(entry.kind), k + 1);
                let kind = self.row_kind(entry, &coeffs)?;
                system.push(LinearConstraint::new(name.clone(), coeffs, parsed.relation, parsed.rhs));
                rows.insert(name.clone(), kind);
                duals.insert(name, parse_rational(&entry.dual)?);
            }
            leaves.push(ProofLeaf { fixed, rows, system, duals });
        }
        let root = build_tree(leaves, &mut Vec::new())?;
        Ok((a, c, BnbProof { n: self.n, root }))
    }

    /// `(leaf, row)` pairs whose text corrects the printed original.
    pub fn corrections(&self) -> Vec<(usize, &ProofRowEntry)> {
        self.leaves
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.rows.iter().filter(|r| r.printed.is_some()).map(move |r| (i + 1, r)))
            .collect()
    }

    fn row_kind(&self, entry: &ProofRowEntry, coeffs: &[Rational]) -> Result<RowKind, CertifyError> {
        Ok(match entry.kind {
            RowKindTag::Uc => RowKind::Uc,
            RowKindTag::Fs => RowKind::Fs,
            RowKindTag::Fc => RowKind::Fc,
            RowKindTag::Wv => RowKind::Wv,
            RowKindTag::Fixing => RowKind::Fixing,
            RowKindTag::FcChain => {
                let side = |sign: i64| {
                    coeffs
                        .iter()
                        .enumerate()
                        .filter(|(_, a)| **a == Rational::from_integer(sign.into()))
                        .map(|(m, _)| m as u32)
                        .collect::<Vec<_>>()
                };
                let mut chains = Vec::new();
                for text in &entry.chains {
                    let links = parse_chain(text)
                        .map_err(CertifyError::Malformed)?
                        .into_iter()
                        .map(|(from, via, kind, to)| {
                            Ok(ChainLink { from: self.mask(from)?, via: self.mask(via)?, to: self.mask(to)?, kind })
                        })
                        .collect::<Result<Vec<_>, CertifyError>>()?;
                    chains.push(FcChain { source: links[0].from, links });
                }
                RowKind::FcChain { positive: side(1), negative: side(-1), chains }
            }
        })
    }
}

fn tag_name(tag: RowKindTag) -> &'static str {
    match tag {
        RowKindTag::Uc => "uc",
        RowKindTag::Fs => "fs",
        RowKindTag::Fc => "fc",
        RowKindTag::FcChain => "chain",
        RowKindTag::Wv => "wv",
        RowKindTag::Fixing => "fix",
    }
}

/// Rebuilds the branch tree from the leaves' ordered fixing paths.
fn build_tree(mut leaves: Vec<ProofLeaf>, path: &mut Vec<(u32, u8)>) -> Result<ProofNode, CertifyError> {
    if leaves.len() == 1 && leaves[0].fixed.len() == path.len() {
        return Ok(ProofNode::Leaf(leaves.pop().expect("one leaf")));
    }
    let depth = path.len();
    let var = leaves
        .iter()
        .find_map(|l| l.fixed.get(depth).map(|f| f.0))
        .ok_or_else(|| CertifyError::Malformed("leaves do not cover the branch tree".into()))?;
    let (zero, one): (Vec<_>, Vec<_>) = leaves.into_iter().partition(|l| l.fixed.get(depth) == Some(&(var, 0)));
    if zero.is_empty() || one.is_empty() || one.iter().any(|l| l.fixed.get(depth) != Some(&(var, 1))) {
        return Err(CertifyError::Malformed(format!("branch on {} lacks a side", var_name(var))));
    }
    path.push((var, 0));
    let z = build_tree(zero, path)?;
    path.pop();
    path.push((var, 1));
    let o = build_tree(one, path)?;
    path.pop();
    Ok(ProofNode::Branch { var, zero: Box::new(z), one: Box::new(o) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convention_is_an_involution() {
        for n in 1..=7 {
            for j in 0..1u32 << n {
                let p = ColumnConvention::Complemented;
                assert_eq!(p.from_mask(p.to_mask(j, n), n), j);
                assert_eq!(p.to_mask(p.from_mask(j, n), n), j);
            }
        }
    }

    #[test]
    fn witness_specs() {
        let a = SetFamily::from_digit_strings(3, &["empty", "123"]).unwrap();
        let w = WitnessSpec::Columns { columns: vec!["000".into(), "111".into()] };
        assert_eq!(w.build(3, &a).unwrap(), a);
        let bad = WitnessSpec::Columns { columns: vec!["0001".into()] };
        assert!(bad.build(3, &a).is_err());
        let d = WitnessSpec::Derived { avoid: vec![1], extra: vec![] };
        // P({2,3}) ⊎ {∅, 123} = P({2,3}) ∪ {123}
        assert_eq!(d.build(3, &a).unwrap().len(), 5);
    }
}
