//! Structural queries: generator regularity, the `Z(A)` relaxation built from
//! the families `P([n] ∖ {j}) ⊎ A`, the equation system over the same
//! families, and the reduced `G_j` families.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::driver::{classify, poonen_z_row, z_variables, ClassificationCertificate, ClassifyOptions, DriverError};
use crate::family::{ElementSet, FamilyError, SetFamily};
use crate::lp::{
    int, lcm_scale, solve_feasibility, LinearConstraint, LinearSystem, LpError, LpOutcome, Rational, Relation,
};

#[derive(Debug, Error)]
pub enum StructureError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Driver(#[from] DriverError),
    #[error("element {0} is outside the ground set [1, {1}]")]
    ElementOutOfRange(usize, usize),
    #[error("the generated family is FC, so regularity does not apply")]
    NotNonFc,
    #[error("the given sets are not the minimal generator of their closure (expected {0})")]
    NotMinimalGenerator(String),
    #[error("undecided perturbations: {0}")]
    Undecided(String),
}

/// Row name shared by the `Σ z >= 1` and `Σ y <= 1` rows.
pub const L1_ROW: &str = "l1";

/// `P([n] ∖ {j}) ⊎ A`.
pub fn build_bj(a: &SetFamily, j: usize) -> Result<SetFamily, StructureError> {
    let n = a.n();
    if j == 0 || j > n {
        return Err(StructureError::ElementOutOfRange(j, n));
    }
    Ok(SetFamily::power_set_avoiding(n, ElementSet::from_elements([j]))?.uplus(a)?)
}

/// `(P([n] ∖ {j}) ⊎ A) ∖ P([n] ∖ {j})`: the members of `B_j` containing `j`.
pub fn build_gj(a: &SetFamily, j: usize) -> Result<SetFamily, StructureError> {
    let b = build_bj(a, j)?;
    Ok(SetFamily::from_masks(a.n(), b.sets().iter().filter(|s| s.contains(j)).map(|s| s.mask()))?)
}

/// Coefficients of `Σ_{S∈B} (Σ_{i∈S} z_i - Σ_{i∉S} z_i)` expanded set by set.
pub fn z_row_by_expansion(b: &SetFamily) -> Vec<i64> {
    let mut coeffs = vec![0i64; b.n()];
    for s in b.sets() {
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c += if s.contains(i + 1) { 1 } else { -1 };
        }
    }
    coeffs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaxationKind {
    MorrisZ,
    VaughanEq,
    SmallerG,
}

/// Which family produced a row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowSource {
    pub row: String,
    pub j: usize,
    pub family: SetFamily,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelaxationSystem {
    pub kind: RelaxationKind,
    pub system: LinearSystem,
    pub provenance: Vec<RowSource>,
}

impl RelaxationSystem {
    /// Rows generated from families, without the `l1` row.
    pub fn family_rows(&self) -> impl Iterator<Item = &LinearConstraint> {
        self.system.constraints.iter().filter(|r| r.name != L1_ROW)
    }
}

fn row_name(j: usize) -> String {
    format!("j{j}")
}

fn z_system(a: &SetFamily, kind: RelaxationKind, build: fn(&SetFamily, usize) -> Result<SetFamily, StructureError>) -> Result<RelaxationSystem, StructureError> {
    let n = a.n();
    let mut system = LinearSystem::new(z_variables(n));
    system.push(LinearConstraint::new(L1_ROW, vec![int(1); n], Relation::Ge, int(1)));
    let mut provenance = Vec::with_capacity(n);
    for j in 1..=n {
        let family = build(a, j)?;
        system.push(poonen_z_row(&family, row_name(j)));
        provenance.push(RowSource { row: row_name(j), j, family });
    }
    Ok(RelaxationSystem { kind, system, provenance })
}

/// `Σ z >= 1` and `Σ_i (2|B_i| - |B|) z_i >= 0` for `B = B_j`, `j ∈ [n]`, `z >= 0`.
pub fn morris_system(a: &SetFamily) -> Result<RelaxationSystem, StructureError> {
    z_system(a, RelaxationKind::MorrisZ, build_bj)
}

/// The same rows built from `G_j`.
pub fn smaller_g_system(a: &SetFamily) -> Result<RelaxationSystem, StructureError> {
    z_system(a, RelaxationKind::SmallerG, build_gj)
}

/// `Σ_i |B_i| y_i = |B| / 2` for `B = B_j`, with `Σ y <= 1` and `y >= 0`.
pub fn vaughan_system(a: &SetFamily) -> Result<RelaxationSystem, StructureError> {
    let n = a.n();
    let mut system = LinearSystem::new(crate::driver::y_variables(n));
    let mut provenance = Vec::with_capacity(n);
    for j in 1..=n {
        let family = build_bj(a, j)?;
        let coeffs = family.frequencies().counts.iter().map(|&k| int(k as i64)).collect();
        let rhs = Rational::new(BigInt::from(family.len()), BigInt::from(2));
        system.push(LinearConstraint::new(row_name(j), coeffs, Relation::Eq, rhs));
        provenance.push(RowSource { row: row_name(j), j, family });
    }
    system.push(LinearConstraint::new(L1_ROW, vec![int(1); n], Relation::Le, int(1)));
    Ok(RelaxationSystem { kind: RelaxationKind::VaughanEq, system, provenance })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ZOutcome {
    /// Integer point, lcm-scaled from an exact rational solution.
    Feasible {
        #[serde(with = "crate::lp::rational::serde_bigint_vec")]
        point: Vec<BigInt>,
    },
    Empty {
        #[serde(with = "crate::lp::rational::serde_rational_map")]
        duals: BTreeMap<String, Rational>,
    },
}

/// Decides whether `Z(A)` has an integer point. The family rows are
/// homogeneous, so any rational point scales to an integer one.
pub fn morris_z_nonempty(a: &SetFamily) -> Result<(RelaxationSystem, ZOutcome), StructureError> {
    let sys = morris_system(a)?;
    let outcome = match solve_feasibility(&sys.system) {
        LpOutcome::Feasible { point } => ZOutcome::Feasible { point: lcm_scale(&point)? },
        LpOutcome::Infeasible { duals } => ZOutcome::Empty { duals },
    };
    Ok((sys, outcome))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum VaughanOutcome {
    Feasible {
        #[serde(with = "crate::lp::rational::serde_rational_vec")]
        point: Vec<Rational>,
        #[serde(with = "crate::lp::rational::serde_rational")]
        l1_sum: Rational,
        strictly_below_one: bool,
    },
    Empty {
        #[serde(with = "crate::lp::rational::serde_rational_map")]
        duals: BTreeMap<String, Rational>,
    },
}

pub fn vaughan_solve(a: &SetFamily) -> Result<(RelaxationSystem, VaughanOutcome), StructureError> {
    let sys = vaughan_system(a)?;
    let outcome = match solve_feasibility(&sys.system) {
        LpOutcome::Feasible { point } => {
            let l1_sum: Rational = point.iter().sum();
            let strictly_below_one = l1_sum < Rational::one();
            VaughanOutcome::Feasible { point, l1_sum, strictly_below_one }
        }
        LpOutcome::Infeasible { duals } => VaughanOutcome::Empty { duals },
    };
    Ok((sys, outcome))
}

/// Result of checking that a point of `Z(A)` also satisfies the `G_j` rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImplicationCheck {
    /// Empty when `Z(A)` is empty and the implication holds vacuously.
    #[serde(with = "crate::lp::rational::serde_bigint_vec")]
    pub z_point: Vec<BigInt>,
    pub g_rows_hold: bool,
}

/// Solves `Z(A)` and, when it has a point, evaluates the `G_j` system there.
pub fn smaller_g_implication(a: &SetFamily) -> Result<ImplicationCheck, StructureError> {
    let (_, outcome) = morris_z_nonempty(a)?;
    Ok(match outcome {
        ZOutcome::Empty { .. } => ImplicationCheck { z_point: Vec::new(), g_rows_hold: true },
        ZOutcome::Feasible { point } => {
            let g = smaller_g_system(a)?;
            let rational: Vec<Rational> = point.iter().cloned().map(Rational::from_integer).collect();
            let g_rows_hold = g.system.is_satisfied_by(&rational);
            ImplicationCheck { z_point: point, g_rows_hold }
        }
    })
}

/// Whether `point` satisfies every row of `sys`.
pub fn satisfies(sys: &RelaxationSystem, point: &[Rational]) -> bool {
    sys.system.is_satisfied_by(point)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationVerdict {
    Fc,
    NonFc,
    Undecided,
}

/// Classification of `⟨(S ∖ {A}) ∪ {A ∪ {i}}⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub removed: ElementSet,
    pub element: usize,
    pub generators: SetFamily,
    pub verdict: PerturbationVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<ClassificationCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub generator: SetFamily,
    pub base_certificate: ClassificationCertificate,
    pub perturbations: Vec<Perturbation>,
    pub regular: bool,
    /// Every perturbation, in `(A, i)` order, whose closure is FC.
    pub witnesses: Vec<(ElementSet, usize)>,
}

fn sorted_masks(f: &SetFamily) -> Vec<u32> {
    let mut m: Vec<u32> = f.masks().collect();
    m.sort_unstable();
    m
}

/// Classifies every single-element enlargement of every nonempty generator.
/// Enlargements by an element already in the set change nothing and are skipped.
pub fn regularity_check(s: &SetFamily, opts: &ClassifyOptions) -> Result<RegularityReport, StructureError> {
    let closure = s.union_closure()?;
    let minimal = closure.minimal_generator()?;
    if sorted_masks(&minimal) != sorted_masks(s) {
        let shown: Vec<String> = minimal.sets().iter().map(|x| x.to_string()).collect();
        return Err(StructureError::NotMinimalGenerator(shown.join(", ")));
    }
    let base = classify(&closure, opts)?;
    if base.certificate.is_fc() {
        return Err(StructureError::NotNonFc);
    }
    let n = s.n();
    let mut cases = Vec::new();
    for &a in s.sets().iter().filter(|a| !a.is_empty()) {
        for i in (1..=n).filter(|&i| !a.contains(i)) {
            cases.push((a, i));
        }
    }
    let perturbations: Vec<Perturbation> = cases
        .par_iter()
        .map(|&(a, i)| -> Result<Perturbation, StructureError> {
            let generators = s.replace(a, a.with(i));
            let family = generators.union_closure()?;
            let (verdict, certificate, detail) = match classify(&family, opts) {
                Ok(c) => {
                    let v = if c.certificate.is_fc() { PerturbationVerdict::Fc } else { PerturbationVerdict::NonFc };
                    (v, Some(c.certificate), None)
                }
                Err(e) if e.is_undecided() => (PerturbationVerdict::Undecided, None, Some(e.to_string())),
                Err(e) => return Err(e.into()),
            };
            Ok(Perturbation { removed: a, element: i, generators, verdict, certificate, detail })
        })
        .collect::<Result<_, _>>()?;
    let witnesses: Vec<(ElementSet, usize)> = perturbations
        .iter()
        .filter(|p| p.verdict == PerturbationVerdict::Fc)
        .map(|p| (p.removed, p.element))
        .collect();
    if witnesses.is_empty() {
        let open: Vec<String> = perturbations
            .iter()
            .filter(|p| p.verdict == PerturbationVerdict::Undecided)
            .map(|p| format!("{} + {}", p.removed, p.element))
            .collect();
        if !open.is_empty() {
            return Err(StructureError::Undecided(open.join(", ")));
        }
    }
    let regular = perturbations.iter().all(|p| p.verdict == PerturbationVerdict::NonFc);
    Ok(RegularityReport { generator: s.clone(), base_certificate: base.certificate, perturbations, regular, witnesses })
}

/// Evaluates `Σ_i coeffs_i z_i` on an integer point.
pub fn evaluate(row: &LinearConstraint, point: &[BigInt]) -> Rational {
    row.coeffs.iter().zip(point).fold(Rational::zero(), |acc, (a, z)| acc + a * Rational::from_integer(z.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(n: usize, sets: &[&str]) -> SetFamily {
        SetFamily::from_digit_strings(n, sets).unwrap().union_closure().unwrap()
    }

    #[test]
    fn bj_of_empty_family_is_power_set() {
        let a = SetFamily::from_digit_strings(4, &["empty"]).unwrap();
        for j in 1..=4 {
            let b = build_bj(&a, j).unwrap();
            assert_eq!(b.len(), 8);
            assert!(b.sets().iter().all(|s| !s.contains(j)));
        }
        assert!(matches!(build_bj(&a, 5), Err(StructureError::ElementOutOfRange(5, 4))));
    }

    #[test]
    fn expansion_matches_frequency_form() {
        let a = fam(5, &["empty", "123", "145", "1234", "1235", "1245"]);
        for j in 1..=5 {
            let b = build_bj(&a, j).unwrap();
            let row = poonen_z_row(&b, "r");
            let expanded: Vec<Rational> = z_row_by_expansion(&b).into_iter().map(int).collect();
            assert_eq!(row.coeffs, expanded);
        }
    }

    #[test]
    fn g_family_of_full_set() {
        let a = SetFamily::from_digit_strings(3, &["empty", "123"]).unwrap();
        let g = build_gj(&a, 2).unwrap();
        assert_eq!(g.len(), 1);
        let sys = smaller_g_system(&a).unwrap();
        for row in sys.family_rows() {
            assert_eq!(row.coeffs, vec![int(1); 3]);
        }
    }
}
