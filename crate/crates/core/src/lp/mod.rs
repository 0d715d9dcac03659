//! Exact rational linear systems, a Bland-rule simplex and Farkas certificate checking.

mod farkas;
pub mod rational;
mod simplex;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use farkas::{bound_completion, verify_farkas};
pub use rational::{format_rational, int, lcm_scale, parse_rational, Rational};
pub use simplex::{optimize, solve_feasibility, OptOutcome, Sense};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("cannot parse rational {0:?}")]
    BadRational(String),
    #[error("unknown row {0:?}")]
    UnknownRow(String),
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("row {row:?} has {got} coefficients, system has {expected} variables")]
    Dimension { row: String, expected: usize, got: usize },
    #[error("duplicate name {0:?}")]
    DuplicateName(String),
    #[error("all-zero vector")]
    AllZero,
    #[error("negative entry")]
    NegativeEntry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Le => "<=",
            Relation::Ge => ">=",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "=" | "==" => Some(Relation::Eq),
            "<=" | "≤" => Some(Relation::Le),
            ">=" | "≥" => Some(Relation::Ge),
            _ => None,
        }
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Eq => lhs == rhs,
            Relation::Le => lhs <= rhs,
            Relation::Ge => lhs >= rhs,
        }
    }
}

impl Serialize for Relation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.symbol())
    }
}

impl<'de> Deserialize<'de> for Relation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Relation::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("bad relation {s:?}")))
    }
}

/// One named row with dense coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub name: String,
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl LinearConstraint {
    pub fn new(name: impl Into<String>, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Self {
        Self { name: name.into(), coeffs, relation, rhs }
    }

    pub fn lhs(&self, point: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .zip(point)
            .filter(|(a, _)| !a.is_zero())
            .fold(Rational::zero(), |acc, (a, x)| acc + a * x)
    }

    pub fn satisfied_by(&self, point: &[Rational]) -> bool {
        self.relation.holds(&self.lhs(point), &self.rhs)
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.coeffs.iter().enumerate().filter(|(_, a)| !a.is_zero())
    }

    /// Human-readable form using the given variable names.
    pub fn render(&self, names: &[String]) -> String {
        let mut out = String::new();
        for (j, a) in self.support() {
            let sign = if a.is_negative() { " - " } else { " + " };
            if out.is_empty() {
                if a.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(sign);
            }
            let mag = a.abs();
            if mag != num_traits::One::one() {
                out.push_str(&format_rational(&mag));
                out.push(' ');
            }
            out.push_str(&names[j]);
        }
        if out.is_empty() {
            out.push('0');
        }
        format!("{out} {} {}", self.relation.symbol(), format_rational(&self.rhs))
    }
}

/// Named variables, nonnegativity flags, optional upper bounds and named rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem {
    pub variables: Vec<String>,
    pub nonneg: Vec<bool>,
    /// Upper bounds of nonnegative variables; their duals are completed implicitly by [`verify_farkas`].
    pub upper: Vec<Option<Rational>>,
    pub constraints: Vec<LinearConstraint>,
}

impl LinearSystem {
    /// Nonnegative, unbounded variables.
    pub fn new(variables: Vec<String>) -> Self {
        let k = variables.len();
        Self { variables, nonneg: vec![true; k], upper: vec![None; k], constraints: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    pub fn push(&mut self, row: LinearConstraint) {
        self.constraints.push(row);
    }

    pub fn row(&self, name: &str) -> Option<&LinearConstraint> {
        self.constraints.iter().find(|r| r.name == name)
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let k = self.dim();
        let mut seen = std::collections::HashSet::new();
        for v in &self.variables {
            if !seen.insert(v.as_str()) {
                return Err(LpError::DuplicateName(v.clone()));
            }
        }
        if self.nonneg.len() != k || self.upper.len() != k {
            return Err(LpError::Dimension { row: "<bounds>".into(), expected: k, got: self.nonneg.len() });
        }
        let mut rows = std::collections::HashSet::new();
        for r in &self.constraints {
            if r.coeffs.len() != k {
                return Err(LpError::Dimension { row: r.name.clone(), expected: k, got: r.coeffs.len() });
            }
            if !rows.insert(r.name.as_str()) {
                return Err(LpError::DuplicateName(r.name.clone()));
            }
        }
        Ok(())
    }

    /// Checks every row and bound exactly.
    pub fn is_satisfied_by(&self, point: &[Rational]) -> bool {
        point.len() == self.dim()
            && point.iter().zip(&self.nonneg).all(|(x, &nn)| !nn || !x.is_negative())
            && point.iter().zip(&self.upper).all(|(x, u)| u.as_ref().is_none_or(|u| x <= u))
            && self.constraints.iter().all(|r| r.satisfied_by(point))
    }
}

#[derive(Serialize, Deserialize)]
struct RowRepr {
    name: String,
    coeffs: BTreeMap<String, String>,
    relation: Relation,
    rhs: String,
}

#[derive(Serialize, Deserialize)]
struct SystemRepr {
    variables: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    free: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    upper: BTreeMap<String, String>,
    rows: Vec<RowRepr>,
}

impl Serialize for LinearSystem {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows = self
            .constraints
            .iter()
            .map(|r| RowRepr {
                name: r.name.clone(),
                coeffs: r.support().map(|(j, a)| (self.variables[j].clone(), format_rational(a))).collect(),
                relation: r.relation,
                rhs: format_rational(&r.rhs),
            })
            .collect();
        let free = self
            .variables
            .iter()
            .zip(&self.nonneg)
            .filter(|(_, &nn)| !nn)
            .map(|(v, _)| v.clone())
            .collect();
        let upper = self
            .variables
            .iter()
            .zip(&self.upper)
            .filter_map(|(v, u)| u.as_ref().map(|u| (v.clone(), format_rational(u))))
            .collect();
        SystemRepr { variables: self.variables.clone(), free, upper, rows }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearSystem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = SystemRepr::deserialize(d)?;
        let index: HashMap<&str, usize> =
            repr.variables.iter().enumerate().map(|(j, v)| (v.as_str(), j)).collect();
        let mut sys = LinearSystem::new(repr.variables.clone());
        for v in &repr.free {
            let j = *index.get(v.as_str()).ok_or_else(|| D::Error::custom(format!("unknown variable {v}")))?;
            sys.nonneg[j] = false;
        }
        for (v, u) in &repr.upper {
            let j = *index.get(v.as_str()).ok_or_else(|| D::Error::custom(format!("unknown variable {v}")))?;
            sys.upper[j] = Some(parse_rational(u).map_err(D::Error::custom)?);
        }
        for r in repr.rows {
            let mut coeffs = vec![Rational::zero(); sys.dim()];
            for (v, a) in &r.coeffs {
                let j = *index.get(v.as_str()).ok_or_else(|| D::Error::custom(format!("unknown variable {v}")))?;
                coeffs[j] = parse_rational(a).map_err(D::Error::custom)?;
            }
            let rhs = parse_rational(&r.rhs).map_err(D::Error::custom)?;
            sys.push(LinearConstraint::new(r.name, coeffs, r.relation, rhs));
        }
        sys.validate().map_err(D::Error::custom)?;
        Ok(sys)
    }
}

impl fmt::Display for LinearSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.constraints {
            writeln!(f, "{}: {}", r.name, r.render(&self.variables))?;
        }
        Ok(())
    }
}

/// Exact feasibility verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LpOutcome {
    Feasible {
        #[serde(with = "rational::serde_rational_vec")]
        point: Vec<Rational>,
    },
    Infeasible {
        #[serde(with = "rational::serde_rational_map")]
        duals: BTreeMap<String, Rational>,
    },
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Feasible { .. })
    }
}
