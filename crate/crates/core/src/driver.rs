//! Outer cutting-plane loop: alternate a master problem over weights with the
//! separation problem until the weights are certified or the master becomes
//! infeasible.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::family::{FamilyError, SetFamily};
use crate::lp::rational::serde_rational_map;
use crate::lp::{
    int, lcm_scale, optimize, solve_feasibility, LinearConstraint, LinearSystem, LpError, LpOutcome, OptOutcome,
    Rational, Relation, Sense,
};
use crate::separation::{
    build_model, solve_separation_with, BnbProof, SepError, SeparationOutcome, SolveOptions, WeightVector,
};

/// Upper bound on each integer weight in the ℓ1-minimizing master.
pub const IP_WEIGHT_CAP: i64 = 1 << 20;
/// Branch-and-bound nodes spent on the ℓ1-minimizing master before keeping the incumbent.
pub const IP_NODE_CAP: usize = 200;

#[derive(Debug, Error)]
pub enum DriverError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Separation(#[from] SepError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("the family {{∅}} cannot be classified")]
    TrivialFamily,
    #[error("the family does not cover the ground set")]
    NotSpanning,
    #[error("undecided: no verdict after {0} iterations")]
    IterationCap(usize),
    #[error("new witness is not violated by the current weights")]
    NoProgress,
}

impl DriverError {
    /// A resource cap was hit; the question is open rather than answered.
    pub fn is_undecided(&self) -> bool {
        matches!(self, DriverError::IterationCap(_) | DriverError::Separation(SepError::NodeLimit(_)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MasterMode {
    /// Basic solution of the normalized rational master.
    #[default]
    LpNormalized,
    /// Integer weights of minimum ℓ1 norm.
    IpL1Min,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[derive(Default)]
pub struct ClassifyOptions {
    pub master: MasterMode,
    /// Defaults to `4n`.
    pub max_iterations: Option<usize>,
    pub separation: SolveOptions,
}


#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ClassificationCertificate {
    Fc {
        weights: WeightVector,
        proof: BnbProof,
    },
    NonFc {
        witnesses: Vec<SetFamily>,
        system: LinearSystem,
        #[serde(with = "serde_rational_map")]
        duals: BTreeMap<String, Rational>,
    },
}

impl ClassificationCertificate {
    pub fn is_fc(&self) -> bool {
        matches!(self, ClassificationCertificate::Fc { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub weights: WeightVector,
    /// Objective of the violating family, `None` when separation was empty.
    pub violation: Option<i64>,
    pub witness_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub certificate: ClassificationCertificate,
    pub history: Vec<IterationRecord>,
}

/// Result of checking one weight vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum WeightsVerdict {
    Certified { proof: BnbProof },
    Refuted { family: SetFamily, objective: i64 },
}

/// `Σ_i |B_i| y_i >= |B|/2`.
pub fn poonen_row(b: &SetFamily, name: impl Into<String>) -> LinearConstraint {
    let coeffs = b.frequencies().counts.iter().map(|&k| int(k as i64)).collect();
    LinearConstraint::new(name, coeffs, Relation::Ge, Rational::new(BigInt::from(b.len()), BigInt::from(2)))
}

/// `Σ_i (2|B_i| - |B|) z_i >= 0`.
pub fn poonen_z_row(b: &SetFamily, name: impl Into<String>) -> LinearConstraint {
    let size = b.len() as i64;
    let coeffs = b.frequencies().counts.iter().map(|&k| int(2 * k as i64 - size)).collect();
    LinearConstraint::new(name, coeffs, Relation::Ge, Rational::zero())
}

pub fn y_variables(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("y_{i}")).collect()
}

pub fn z_variables(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("z_{i}")).collect()
}

pub const NORMALIZATION_ROW: &str = "normalize";

pub fn witness_row_name(k: usize) -> String {
    format!("witness:{k}")
}

/// `Σ y = 1` plus one Poonen row per witness.
pub fn nonfc_system(n: usize, witnesses: &[SetFamily]) -> LinearSystem {
    let mut sys = LinearSystem::new(y_variables(n));
    sys.push(LinearConstraint::new(NORMALIZATION_ROW, vec![int(1); n], Relation::Eq, int(1)));
    for (k, b) in witnesses.iter().enumerate() {
        sys.push(poonen_row(b, witness_row_name(k + 1)));
    }
    sys
}

/// `Σ z >= 1` plus one homogeneous row per witness.
pub fn nonfc_z_system(n: usize, witnesses: &[SetFamily]) -> LinearSystem {
    let mut sys = LinearSystem::new(z_variables(n));
    sys.push(LinearConstraint::new(NORMALIZATION_ROW, vec![int(1); n], Relation::Ge, int(1)));
    for (k, b) in witnesses.iter().enumerate() {
        sys.push(poonen_z_row(b, witness_row_name(k + 1)));
    }
    sys
}

/// `2 Σ c_i |B_i| < |B| Σ c`: the weights violate the witness's Poonen row.
pub fn violates(b: &SetFamily, c: &WeightVector) -> bool {
    let lhs: i128 = b.frequencies().counts.iter().zip(&c.entries).map(|(&k, &w)| 2 * k as i128 * w as i128).sum();
    lhs < b.len() as i128 * c.total() as i128
}

/// Next weights from the accumulated witnesses, or a proof that none exist.
pub enum MasterStep {
    Weights(WeightVector),
    Infeasible { system: LinearSystem, duals: BTreeMap<String, Rational> },
}

/// Master problem over the accumulated Poonen rows.
#[derive(Debug, Clone)]
pub struct MasterProblem {
    pub mode: MasterMode,
    n: usize,
    witnesses: Vec<SetFamily>,
}

impl MasterProblem {
    pub fn new(n: usize, mode: MasterMode) -> Self {
        Self { mode, n, witnesses: Vec::new() }
    }

    pub fn witnesses(&self) -> &[SetFamily] {
        &self.witnesses
    }

    pub fn add_witness(&mut self, b: SetFamily) {
        self.witnesses.push(b);
    }

    pub fn next(&self) -> Result<MasterStep, DriverError> {
        if self.witnesses.is_empty() {
            // uniform weights, scaled
            return Ok(MasterStep::Weights(WeightVector::new(vec![1; self.n])?));
        }
        let sys = nonfc_system(self.n, &self.witnesses);
        match self.mode {
            MasterMode::LpNormalized => match solve_feasibility(&sys) {
                LpOutcome::Feasible { point } => Ok(MasterStep::Weights(to_weights(&point)?)),
                LpOutcome::Infeasible { duals } => Ok(MasterStep::Infeasible { system: sys, duals }),
            },
            MasterMode::IpL1Min => match self.l1_min()? {
                Some(c) => Ok(MasterStep::Weights(c)),
                None => match solve_feasibility(&sys) {
                    LpOutcome::Infeasible { duals } => Ok(MasterStep::Infeasible { system: sys, duals }),
                    // the homogeneous integer master and the normalized master are equivalent
                    LpOutcome::Feasible { .. } => unreachable!("integer master infeasible but rational master feasible"),
                },
            },
        }
    }

    /// Minimizes `Σ z` over the integer master by branch-and-bound with exact bounds.
    fn l1_min(&self) -> Result<Option<WeightVector>, DriverError> {
        let n = self.n;
        let mut base = nonfc_z_system(n, &self.witnesses);
        base.upper = vec![Some(int(IP_WEIGHT_CAP)); n];
        let ones = vec![Rational::one(); n];
        let root = match optimize(&base, &ones, Sense::Minimize) {
            OptOutcome::Optimal { point, .. } => point,
            _ => return Ok(None),
        };
        let mut best: Vec<BigInt> = lcm_scale(&root)?;
        let mut best_sum: BigInt = best.iter().sum();
        let mut stack: Vec<(Vec<Rational>, Vec<Rational>)> = vec![(vec![Rational::zero(); n], vec![int(IP_WEIGHT_CAP); n])];
        let mut nodes = 0;
        while let Some((lo, hi)) = stack.pop() {
            nodes += 1;
            if nodes > IP_NODE_CAP {
                break;
            }
            let mut sys = base.clone();
            sys.upper = hi.iter().cloned().map(Some).collect();
            for (i, l) in lo.iter().enumerate() {
                if !l.is_zero() {
                    let mut coeffs = vec![Rational::zero(); n];
                    coeffs[i] = Rational::one();
                    sys.push(LinearConstraint::new(format!("lo:{i}"), coeffs, Relation::Ge, l.clone()));
                }
            }
            let OptOutcome::Optimal { point, value } = optimize(&sys, &ones, Sense::Minimize) else { continue };
            if value.ceil().to_integer() >= best_sum {
                continue;
            }
            match point.iter().position(|v| !v.is_integer()) {
                None => {
                    best = point.iter().map(|v| v.to_integer()).collect();
                    best_sum = best.iter().sum();
                }
                Some(j) => {
                    let (f, c) = (point[j].floor(), point[j].ceil());
                    let mut up_lo = lo.clone();
                    up_lo[j] = c;
                    let mut down_hi = hi.clone();
                    down_hi[j] = f;
                    stack.push((up_lo, hi));
                    stack.push((lo, down_hi));
                }
            }
        }
        let g = best.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
        let entries = best
            .iter()
            .map(|v| (v / &g).to_u64().ok_or(LpError::NegativeEntry))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Some(WeightVector::new(entries)?))
    }
}

fn to_weights(point: &[Rational]) -> Result<WeightVector, DriverError> {
    let scaled = lcm_scale(point)?;
    let entries = scaled
        .iter()
        .map(|v| if v.is_negative() { None } else { v.to_u64() })
        .collect::<Option<Vec<_>>>()
        .ok_or(LpError::NegativeEntry)?;
    Ok(WeightVector::new(entries)?)
}

fn prepare(a: &SetFamily) -> Result<SetFamily, DriverError> {
    if !a.is_union_closed()? {
        return Err(FamilyError::NotUnionClosed.into());
    }
    if a.sets().iter().all(|s| s.is_empty()) {
        return Err(DriverError::TrivialFamily);
    }
    if a.union_all().mask() != a.ground().full_mask() {
        return Err(DriverError::NotSpanning);
    }
    Ok(a.add_empty())
}

/// Runs separation on one weight vector.
pub fn certify_weights(a: &SetFamily, c: &WeightVector, opts: &SolveOptions) -> Result<WeightsVerdict, DriverError> {
    let a = prepare(a)?;
    let model = build_model(&a, c)?;
    Ok(match solve_separation_with(&model, opts)? {
        SeparationOutcome::Empty { proof } => WeightsVerdict::Certified { proof },
        SeparationOutcome::Violating { family, objective } => WeightsVerdict::Refuted { family, objective },
    })
}

/// Decides whether `a` is FC, with a certificate either way.
pub fn classify(a: &SetFamily, opts: &ClassifyOptions) -> Result<Classification, DriverError> {
    let a = prepare(a)?;
    let n = a.n();
    let cap = opts.max_iterations.unwrap_or(4 * n);
    let mut master = MasterProblem::new(n, opts.master);
    let mut history = Vec::new();
    for _ in 0..=cap {
        let c = match master.next()? {
            MasterStep::Weights(c) => c,
            MasterStep::Infeasible { system, duals } => {
                let certificate =
                    ClassificationCertificate::NonFc { witnesses: master.witnesses().to_vec(), system, duals };
                return Ok(Classification { certificate, history });
            }
        };
        if history.len() == cap {
            break;
        }
        let model = build_model(&a, &c)?;
        match solve_separation_with(&model, &opts.separation)? {
            SeparationOutcome::Empty { proof } => {
                history.push(IterationRecord { weights: c.clone(), violation: None, witness_size: None });
                let certificate = ClassificationCertificate::Fc { weights: c, proof };
                return Ok(Classification { certificate, history });
            }
            SeparationOutcome::Violating { family, objective } => {
                if !violates(&family, &c) {
                    return Err(DriverError::NoProgress);
                }
                history.push(IterationRecord {
                    weights: c,
                    violation: Some(objective),
                    witness_size: Some(family.len()),
                });
                master.add_witness(family);
            }
        }
    }
    Err(DriverError::IterationCap(cap))
}
