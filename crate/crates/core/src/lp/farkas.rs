//! Exact Farkas certificate checking.
//!
//! Sign convention: `=` rows take free multipliers, `<=` rows nonpositive and
//! `>=` rows nonnegative ones. The certificate holds when `bᵀy > 0` and every
//! column of `Aᵀy` is `<= 0` (nonnegative variables) or `= 0` (free ones).
//! An upper bound `x_j <= u_j` acts as an extra `<=` row whose multiplier is
//! completed as `-max(0, (Aᵀy)_j)`.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use super::rational::format_rational;
use super::{LinearSystem, LpError, Rational, Relation};
use crate::report::VerificationReport;

fn column_sums(sys: &LinearSystem, duals: &BTreeMap<String, Rational>) -> Result<Vec<Rational>, LpError> {
    sys.validate()?;
    for name in duals.keys() {
        if sys.row(name).is_none() {
            return Err(LpError::UnknownRow(name.clone()));
        }
    }
    let mut r = vec![Rational::zero(); sys.dim()];
    for row in &sys.constraints {
        let Some(y) = duals.get(&row.name).filter(|y| !y.is_zero()) else { continue };
        for (j, a) in row.support() {
            r[j] += a * y;
        }
    }
    Ok(r)
}

/// Multipliers implied for the upper-bound rows, keyed `ub:<variable>`.
pub fn bound_completion(
    sys: &LinearSystem,
    duals: &BTreeMap<String, Rational>,
) -> Result<BTreeMap<String, Rational>, LpError> {
    let r = column_sums(sys, duals)?;
    Ok(sys
        .upper
        .iter()
        .enumerate()
        .filter(|(j, u)| u.is_some() && r[*j].is_positive())
        .map(|(j, _)| (format!("ub:{}", sys.variables[j]), -r[j].clone()))
        .collect())
}

pub fn verify_farkas(
    sys: &LinearSystem,
    duals: &BTreeMap<String, Rational>,
) -> Result<VerificationReport, LpError> {
    let r = column_sums(sys, duals)?;
    let mut report = VerificationReport::new();

    let mut bad_signs = Vec::new();
    for row in &sys.constraints {
        let Some(y) = duals.get(&row.name) else { continue };
        let ok = match row.relation {
            Relation::Eq => true,
            Relation::Le => !y.is_positive(),
            Relation::Ge => !y.is_negative(),
        };
        if !ok {
            bad_signs.push(format!("{} ({} row, dual {})", row.name, row.relation.symbol(), format_rational(y)));
        }
    }
    report.check("dual signs", bad_signs.is_empty(), bad_signs.join("; "));

    let mut bad_columns = Vec::new();
    let mut bound_term = Rational::zero();
    let mut completed = 0usize;
    for (j, rj) in r.iter().enumerate() {
        if !sys.nonneg[j] {
            if !rj.is_zero() {
                bad_columns.push(format!("{} (free) = {}", sys.variables[j], format_rational(rj)));
            }
        } else if let Some(u) = &sys.upper[j] {
            if rj.is_positive() {
                bound_term += rj * u;
                completed += 1;
            }
        } else if rj.is_positive() {
            bad_columns.push(format!("{} = {}", sys.variables[j], format_rational(rj)));
        }
    }
    let detail = if bad_columns.is_empty() {
        format!("{completed} upper-bound multipliers completed")
    } else {
        bad_columns.join("; ")
    };
    report.check("column condition A^T y <= 0", bad_columns.is_empty(), detail);

    let mut by = Rational::zero();
    for row in &sys.constraints {
        if let Some(y) = duals.get(&row.name) {
            by += &row.rhs * y;
        }
    }
    let margin = &by - &bound_term;
    report.check(
        "objective b^T y > 0",
        margin.is_positive(),
        format!(
            "b^T y = {}, bound terms = {}, margin = {}",
            format_rational(&by),
            format_rational(&bound_term),
            format_rational(&margin)
        ),
    );
    Ok(report)
}
