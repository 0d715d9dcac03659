//! Solver-independent verification of classification certificates.
//!
//! Everything here recomputes rows from the families and weights and replays
//! the Farkas conditions; no optimization is run.

mod fixture;
mod oracle;
pub mod text;

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fixture::{
    ColumnConvention, FamilySpec, FcProofFixture, LeafEntry, NonFcFixture, PrintedEntry, ProofRowEntry, RowKindTag,
    WitnessEntry, WitnessSpec,
};
pub use oracle::{
    brute_force_classify, brute_force_separation, feasible_families, OracleVerdict, ORACLE_MAX_N,
};

use crate::driver::{
    nonfc_system, nonfc_z_system, ClassificationCertificate, IterationRecord, WeightsVerdict, NORMALIZATION_ROW,
};
use crate::family::{FamilyError, SetFamily};
use crate::lp::rational::format_rational;
use crate::lp::{verify_farkas, LinearConstraint, LinearSystem, LpError, Rational, Relation};
use crate::report::VerificationReport;
use crate::separation::{build_model, validate_row, BnbProof, ProofNode, SepError, WeightVector};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Separation(#[from] SepError),
    #[error("brute force supports n <= {ORACLE_MAX_N}, got {0}")]
    OracleTooLarge(usize),
    #[error("malformed certificate: {0}")]
    Malformed(String),
    #[error("unsupported schema version {0}")]
    Schema(u32),
}

/// Row form of a Non-FC system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowForm {
    /// `Σ y = 1` and `Σ |B_i| y_i >= |B|/2`.
    #[default]
    Y,
    /// `Σ z >= 1` and `Σ (2|B_i| - |B|) z_i >= 0`.
    Z,
}

/// Rows as printed, compared against their recomputation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrintedSystem {
    pub normalization: LinearConstraint,
    pub rows: Vec<LinearConstraint>,
}

/// Compares a printed row with a recomputed `>=` row; the printed row must be
/// a positive multiple with a right-hand side no larger than the implied one.
fn compare_printed(printed: &LinearConstraint, recomputed: &LinearConstraint) -> Result<Option<String>, String> {
    if printed.relation != recomputed.relation || printed.coeffs.len() != recomputed.coeffs.len() {
        return Err("relation or dimension differs".into());
    }
    let scale = match recomputed.coeffs.iter().position(|a| !a.is_zero()) {
        Some(j) => &printed.coeffs[j] / &recomputed.coeffs[j],
        None if !recomputed.rhs.is_zero() => &printed.rhs / &recomputed.rhs,
        None => Rational::from_integer(1.into()),
    };
    if !scale.is_positive() {
        return Err("printed row is not a positive multiple".into());
    }
    for (j, (p, r)) in printed.coeffs.iter().zip(&recomputed.coeffs).enumerate() {
        if *p != &scale * r {
            return Err(format!(
                "coefficient {} is {}, recomputed {} (scale {})",
                j + 1,
                format_rational(p),
                format_rational(&(&scale * r)),
                format_rational(&scale)
            ));
        }
    }
    let implied = &scale * &recomputed.rhs;
    let ok = match printed.relation {
        Relation::Ge => printed.rhs <= implied,
        Relation::Le => printed.rhs >= implied,
        Relation::Eq => printed.rhs == implied,
    };
    if !ok {
        return Err(format!(
            "rhs {} is stronger than the implied {}",
            format_rational(&printed.rhs),
            format_rational(&implied)
        ));
    }
    Ok((printed.rhs != implied).then(|| {
        format!("rhs {} vs implied {} (delta {})", format_rational(&printed.rhs), format_rational(&implied), format_rational(&(&implied - &printed.rhs)))
    }))
}

/// Checks a Non-FC certificate: every witness is union-closed and closed under
/// `⊎ a`, the printed rows follow from the witnesses, and the duals prove the
/// assembled system infeasible.
pub fn verify_nonfc(
    a: &SetFamily,
    witnesses: &[SetFamily],
    duals: &BTreeMap<String, Rational>,
    printed: Option<&PrintedSystem>,
    form: RowForm,
) -> Result<VerificationReport, CertifyError> {
    let mut report = VerificationReport::new();
    let n = a.n();
    report.check("family union-closed", a.is_union_closed()?, format!("{} sets", a.len()));
    if !report.check("witness count", !witnesses.is_empty(), format!("{}", witnesses.len())) {
        return Ok(report);
    }
    for (k, b) in witnesses.iter().enumerate() {
        let label = format!("witness {}", k + 1);
        if !report.check(format!("{label} ground"), b.n() == n && !b.is_empty(), format!("{} sets on n = {}", b.len(), b.n())) {
            continue;
        }
        report.check(format!("{label} union-closed"), b.is_union_closed()?, "");
        let closed = b.uplus(a)? == *b;
        report.check(format!("{label} closed under the family"), closed, "");
    }
    let recomputed = match form {
        RowForm::Y => nonfc_system(n, witnesses),
        RowForm::Z => nonfc_z_system(n, witnesses),
    };
    let system = match printed {
        None => recomputed,
        Some(p) => {
            let norm = &recomputed.constraints[0];
            let same = p.normalization.coeffs == norm.coeffs
                && p.normalization.relation == norm.relation
                && p.normalization.rhs == norm.rhs;
            report.check("normalization row", same, "");
            if !report.check("printed row count", p.rows.len() == witnesses.len(), format!("{}", p.rows.len())) {
                return Ok(report);
            }
            let mut sys = LinearSystem::new(recomputed.variables.clone());
            let mut normalization = p.normalization.clone();
            normalization.name = NORMALIZATION_ROW.into();
            sys.push(normalization);
            for (k, row) in p.rows.iter().enumerate() {
                let rec = &recomputed.constraints[k + 1];
                match compare_printed(row, rec) {
                    Ok(delta) => {
                        let detail = delta.clone().unwrap_or_else(|| "exact".into());
                        report.check(format!("row {} recomputed", k + 1), true, detail);
                        if let Some(d) = delta {
                            report.note(format!("row {}: {d}", k + 1));
                        }
                    }
                    Err(e) => {
                        report.check(format!("row {} recomputed", k + 1), false, e);
                    }
                }
                let mut r = row.clone();
                r.name = rec.name.clone();
                sys.push(r);
            }
            sys
        }
    };
    match verify_farkas(&system, duals) {
        Ok(r) => report.absorb("farkas", r),
        Err(e) => {
            report.check("farkas duals", false, e.to_string());
        }
    }
    Ok(report)
}

/// Checks a branch-and-bound proof that `X(a, c)` is empty.
pub fn verify_fc(a: &SetFamily, c: &WeightVector, proof: &BnbProof) -> Result<VerificationReport, CertifyError> {
    let mut report = VerificationReport::new();
    let model = match build_model(&a.add_empty(), c) {
        Ok(m) => m,
        Err(e) => {
            report.check("model", false, e.to_string());
            return Ok(report);
        }
    };
    report.check("dimension", proof.n == model.n(), format!("proof n = {}, family n = {}", proof.n, model.n()));
    let names = model.variables();
    let mut leaves = Vec::new();
    let coverage = collect_leaves(&proof.root, &mut Vec::new(), model.dim(), &mut leaves);
    report.check("branch tree", coverage.is_ok(), coverage.err().unwrap_or_else(|| format!("{} leaves", leaves.len())));
    for (idx, (path, leaf)) in leaves.iter().enumerate() {
        let tag = format!("leaf {}", idx + 1);
        let fixed: BTreeSet<(u32, u8)> = leaf.fixed.iter().copied().collect();
        let on_path: BTreeSet<(u32, u8)> = path.iter().copied().collect();
        report.check(format!("{tag} fixings"), fixed == on_path, format!("{:?}", leaf.fixed));
        let sys = &leaf.system;
        let bounds_ok = sys.variables == names
            && sys.nonneg.iter().all(|&b| b)
            && sys.upper.iter().all(|u| u.as_ref().is_none_or(|u| *u >= Rational::from_integer(1.into())));
        if !report.check(format!("{tag} variables and bounds"), bounds_ok, "") {
            continue;
        }
        let mut canonical = sys.clone();
        let mut failures = Vec::new();
        for (i, row) in sys.constraints.iter().enumerate() {
            let Some(kind) = leaf.rows.get(&row.name) else {
                failures.push(format!("{}: no claimed kind", row.name));
                continue;
            };
            match validate_row(&model, &names, row, kind, &leaf.fixed) {
                Ok(Some(replacement)) => {
                    report.note(format!("{tag}: {} completed with coefficients of zero-fixed variables", row.name));
                    canonical.constraints[i] = replacement;
                }
                Ok(None) => {}
                Err(e) => failures.push(format!("{}: {e}", row.name)),
            }
        }
        report.check(
            format!("{tag} rows valid"),
            failures.is_empty(),
            if failures.is_empty() { format!("{} rows", sys.constraints.len()) } else { failures.join("; ") },
        );
        match verify_farkas(&canonical, &leaf.duals) {
            Ok(r) => report.absorb(&tag, r),
            Err(e) => {
                report.check(format!("{tag} farkas"), false, e.to_string());
            }
        }
    }
    Ok(report)
}

type LeafPath<'a> = (Vec<(u32, u8)>, &'a crate::separation::ProofLeaf);

fn collect_leaves<'a>(
    node: &'a ProofNode,
    path: &mut Vec<(u32, u8)>,
    dim: usize,
    out: &mut Vec<LeafPath<'a>>,
) -> Result<(), String> {
    match node {
        ProofNode::Leaf(l) => {
            out.push((path.clone(), l));
            Ok(())
        }
        ProofNode::Branch { var, zero, one } => {
            if *var as usize >= dim {
                return Err(format!("branch variable {var} out of range"));
            }
            if path.iter().any(|&(m, _)| m == *var) {
                return Err(format!("variable {var} branched twice"));
            }
            for (v, child) in [(0u8, zero), (1u8, one)] {
                path.push((*var, v));
                let r = collect_leaves(child, path, dim, out);
                path.pop();
                r?;
            }
            Ok(())
        }
    }
}

/// Serialized certificate or fixture; `verify` accepts any of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertificateDocument {
    Classification {
        schema_version: u32,
        family: SetFamily,
        certificate: ClassificationCertificate,
        #[serde(default)]
        history: Vec<IterationRecord>,
    },
    Weights {
        schema_version: u32,
        family: SetFamily,
        weights: WeightVector,
        verdict: WeightsVerdict,
    },
    NonFcFixture(NonFcFixture),
    FcProofFixture(FcProofFixture),
}

impl CertificateDocument {
    pub fn schema_version(&self) -> u32 {
        match self {
            CertificateDocument::Classification { schema_version, .. }
            | CertificateDocument::Weights { schema_version, .. } => *schema_version,
            CertificateDocument::NonFcFixture(f) => f.schema_version,
            CertificateDocument::FcProofFixture(f) => f.schema_version,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CertifyError> {
        let doc: Self = serde_json::from_str(text).map_err(|e| CertifyError::Malformed(e.to_string()))?;
        if doc.schema_version() != SCHEMA_VERSION {
            return Err(CertifyError::Schema(doc.schema_version()));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

/// Replays any certificate document.
pub fn verify_document(doc: &CertificateDocument) -> Result<VerificationReport, CertifyError> {
    match doc {
        CertificateDocument::Classification { family, certificate, .. } => match certificate {
            ClassificationCertificate::Fc { weights, proof } => verify_fc(family, weights, proof),
            ClassificationCertificate::NonFc { witnesses, system, duals } => {
                let printed = split_system(system, witnesses.len())?;
                verify_nonfc(family, witnesses, duals, Some(&printed), RowForm::Y)
            }
        },
        CertificateDocument::Weights { family, weights, verdict, .. } => match verdict {
            WeightsVerdict::Certified { proof } => verify_fc(family, weights, proof),
            WeightsVerdict::Refuted { family: b, objective } => {
                let mut report = VerificationReport::new();
                let model = build_model(&family.add_empty(), weights)?;
                report.check("violating family feasible", model.is_feasible_family(b), format!("{} sets", b.len()));
                let recomputed = model.objective(&b.masks().collect::<Vec<_>>());
                report.check("objective", recomputed == *objective, format!("claimed {objective}, recomputed {recomputed}"));
                Ok(report)
            }
        },
        CertificateDocument::NonFcFixture(f) => f.verify(),
        CertificateDocument::FcProofFixture(f) => {
            let (a, c, proof) = f.to_proof()?;
            let mut report = verify_fc(&a, &c, &proof)?;
            for (leaf, r) in f.corrections() {
                report.note(format!("leaf {leaf}: {} replaces printed {}", r.row, r.printed.as_deref().unwrap_or("")));
            }
            Ok(report)
        }
    }
}

/// Splits a stored Non-FC system into its normalization row and witness rows.
fn split_system(system: &LinearSystem, witnesses: usize) -> Result<PrintedSystem, CertifyError> {
    let norm = system
        .row(NORMALIZATION_ROW)
        .cloned()
        .ok_or_else(|| CertifyError::Malformed("missing normalization row".into()))?;
    let rows = (1..=witnesses)
        .map(|k| {
            let name = crate::driver::witness_row_name(k);
            system.row(&name).cloned().ok_or_else(|| CertifyError::Malformed(format!("missing row {name}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if system.constraints.len() != witnesses + 1 {
        return Err(CertifyError::Malformed("unexpected extra rows".into()));
    }
    Ok(PrintedSystem { normalization: norm, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::{classify, ClassifyOptions};
    use crate::lp::int;

    #[test]
    fn printed_row_comparison() {
        let rec = LinearConstraint::new("r", vec![int(11), int(23)], Relation::Ge, Rational::new(43.into(), 2.into()));
        let exact = LinearConstraint::new("p", vec![int(22), int(46)], Relation::Ge, int(43));
        assert_eq!(compare_printed(&exact, &rec), Ok(None));
        let weaker = LinearConstraint::new("p", vec![int(22), int(46)], Relation::Ge, int(42));
        assert!(compare_printed(&weaker, &rec).unwrap().is_some());
        let stronger = LinearConstraint::new("p", vec![int(22), int(46)], Relation::Ge, int(44));
        assert!(compare_printed(&stronger, &rec).is_err());
        let wrong = LinearConstraint::new("p", vec![int(22), int(45)], Relation::Ge, int(43));
        assert!(compare_printed(&wrong, &rec).is_err());
    }

    #[test]
    fn solver_certificates_replay() {
        for gens in [&["empty", "123"][..], &["12", "13", "23"][..]] {
            let a = SetFamily::from_digit_strings(3, gens).unwrap().union_closure().unwrap();
            let c = classify(&a, &ClassifyOptions::default()).unwrap();
            let doc = CertificateDocument::Classification {
                schema_version: SCHEMA_VERSION,
                family: a.clone(),
                certificate: c.certificate,
                history: c.history,
            };
            let back = CertificateDocument::from_json(&doc.to_json()).unwrap();
            assert_eq!(back, doc);
            let report = verify_document(&back).unwrap();
            assert!(report.passed(), "{report}");
        }
    }
}
