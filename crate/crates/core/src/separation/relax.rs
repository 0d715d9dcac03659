//! Floating-point bounded dual simplex on a dense tableau.
//!
//! Only guides the search: infeasibility rays and dual bounds are rationalized
//! and rechecked exactly before anything is concluded from them.

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum LpStatus {
    Optimal,
    /// Row index whose basic variable cannot reach its bounds.
    Infeasible(usize),
    Stalled,
}

/// Rows are `a x <= b` with slack `s = b - a x >= 0`; structurals carry box bounds.
#[derive(Debug, Clone)]
pub(crate) struct Relaxation {
    nvar: usize,
    tab: Vec<Vec<f64>>,
    beta: Vec<f64>,
    xb: Vec<f64>,
    basis: Vec<usize>,
    row_of: Vec<Option<usize>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    at_upper: Vec<bool>,
    d: Vec<f64>,
    /// Dense copies of the rows as added, for exact postprocessing.
    pub(crate) row_ids: Vec<usize>,
}

impl Relaxation {
    /// Structural variables in `[0, 1]`, maximizing `cost`.
    pub(crate) fn new(cost: &[f64]) -> Self {
        let nvar = cost.len();
        Self {
            nvar,
            tab: Vec::new(),
            beta: Vec::new(),
            xb: Vec::new(),
            basis: Vec::new(),
            row_of: vec![None; nvar],
            lower: vec![0.0; nvar],
            upper: vec![1.0; nvar],
            at_upper: cost.iter().map(|&c| c > 0.0).collect(),
            d: cost.to_vec(),
            row_ids: Vec::new(),
        }
    }

    pub(crate) fn rows(&self) -> usize {
        self.tab.len()
    }

    fn ncols(&self) -> usize {
        self.nvar + self.tab.len()
    }

    fn value(&self, j: usize) -> f64 {
        match self.row_of[j] {
            Some(r) => self.xb[r],
            None if self.at_upper[j] => self.upper[j],
            None => self.lower[j],
        }
    }

    pub(crate) fn primal(&self) -> Vec<f64> {
        (0..self.nvar).map(|j| self.value(j)).collect()
    }

    pub(crate) fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    /// Appends `Σ coeffs x <= rhs` with its slack basic.
    pub(crate) fn add_row(&mut self, id: usize, coeffs: &[(u32, i64)], rhs: f64) {
        let m = self.tab.len();
        for row in self.tab.iter_mut() {
            row.push(0.0);
        }
        let ncols = self.nvar + m + 1;
        let mut row = vec![0.0; ncols];
        let mut b = rhs;
        for &(j, a) in coeffs {
            row[j as usize] += a as f64;
        }
        // eliminate basic structurals
        for &(j, _) in coeffs {
            let j = j as usize;
            if let Some(r) = self.row_of[j] {
                let f = row[j];
                if f != 0.0 {
                    for (x, y) in row.iter_mut().zip(&self.tab[r]) {
                        *x -= f * y;
                    }
                    row[j] = 0.0;
                    b -= f * self.beta[r];
                }
            }
        }
        row[self.nvar + m] = 1.0;
        let value = rhs - coeffs.iter().map(|&(j, a)| a as f64 * self.value(j as usize)).sum::<f64>();
        self.tab.push(row);
        self.beta.push(b);
        self.xb.push(value);
        self.basis.push(self.nvar + m);
        self.row_of.push(Some(m));
        self.lower.push(0.0);
        self.upper.push(f64::INFINITY);
        self.at_upper.push(false);
        self.d.push(0.0);
        self.row_ids.push(id);
    }

    /// Fixes a structural variable to `v`.
    pub(crate) fn fix(&mut self, j: usize, v: f64) {
        let old = self.value(j);
        self.lower[j] = v;
        self.upper[j] = v;
        if self.row_of[j].is_none() {
            self.at_upper[j] = true;
            let delta = v - old;
            if delta != 0.0 {
                for (r, row) in self.tab.iter().enumerate() {
                    self.xb[r] -= row[j] * delta;
                }
            }
        }
    }

    /// Recomputes basic values from `beta` to limit drift.
    fn refresh(&mut self) {
        let mut xb = self.beta.clone();
        for j in 0..self.ncols() {
            if self.row_of[j].is_some() {
                continue;
            }
            let v = if self.at_upper[j] { self.upper[j] } else { self.lower[j] };
            if v != 0.0 {
                for (r, row) in self.tab.iter().enumerate() {
                    xb[r] -= row[j] * v;
                }
            }
        }
        self.xb = xb;
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let p = self.tab[r][q];
        let pivot_row: Vec<f64> = self.tab[r].iter().map(|v| v / p).collect();
        let pivot_beta = self.beta[r] / p;
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&j| pivot_row[j].abs() > 1e-14).collect();
        for (i, row) in self.tab.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[q];
            if f == 0.0 {
                continue;
            }
            for &j in &nz {
                row[j] -= f * pivot_row[j];
            }
            row[q] = 0.0;
            self.beta[i] -= f * pivot_beta;
        }
        let dq = self.d[q];
        if dq != 0.0 {
            for &j in &nz {
                self.d[j] -= dq * pivot_row[j];
            }
            self.d[q] = 0.0;
        }
        self.tab[r] = pivot_row;
        self.tab[r][q] = 1.0;
        self.beta[r] = pivot_beta;
        let leaving = self.basis[r];
        self.row_of[leaving] = None;
        self.row_of[q] = Some(r);
        self.basis[r] = q;
    }

    pub(crate) fn solve(&mut self, max_iter: usize) -> LpStatus {
        self.refresh();
        for _ in 0..max_iter {
            // leaving row: largest bound violation
            let mut leave: Option<(usize, f64, bool)> = None;
            for (r, &b) in self.basis.iter().enumerate() {
                let x = self.xb[r];
                let (viol, up) = if x < self.lower[b] - PRIMAL_TOL {
                    (self.lower[b] - x, true)
                } else if x > self.upper[b] + PRIMAL_TOL {
                    (x - self.upper[b], false)
                } else {
                    continue;
                };
                if leave.is_none_or(|(_, v, _)| viol > v) {
                    leave = Some((r, viol, up));
                }
            }
            let Some((r, _, increase)) = leave else { return LpStatus::Optimal };
            let row = &self.tab[r];
            // Harris ratio test
            let mut bound = f64::INFINITY;
            let mut cands = Vec::new();
            for (j, &alpha) in row.iter().enumerate().take(self.ncols()) {
                if self.row_of[j].is_some() || self.lower[j] == self.upper[j] {
                    continue;
                }
                if alpha.abs() < PIVOT_TOL {
                    continue;
                }
                let eligible = if increase {
                    (!self.at_upper[j] && alpha < 0.0) || (self.at_upper[j] && alpha > 0.0)
                } else {
                    (!self.at_upper[j] && alpha > 0.0) || (self.at_upper[j] && alpha < 0.0)
                };
                if !eligible {
                    continue;
                }
                let dj = if increase { self.d[j] } else { -self.d[j] };
                let ratio = (dj / alpha).max(0.0);
                let relaxed = (dj.abs() + DUAL_TOL) / alpha.abs();
                bound = bound.min(relaxed);
                cands.push((j, ratio, alpha.abs()));
            }
            if cands.is_empty() {
                return LpStatus::Infeasible(r);
            }
            let mut best: Option<(usize, f64)> = None;
            for &(j, ratio, mag) in &cands {
                if ratio <= bound && best.is_none_or(|(_, bm)| mag > bm) {
                    best = Some((j, mag));
                }
            }
            let q = best.map(|b| b.0).unwrap_or(cands[0].0);
            let b = self.basis[r];
            let target = if increase { self.lower[b] } else { self.upper[b] };
            let alpha = self.tab[r][q];
            let delta = (self.xb[r] - target) / alpha;
            let xq = self.value(q) + delta;
            for (i, trow) in self.tab.iter().enumerate() {
                self.xb[i] -= trow[q] * delta;
            }
            self.pivot(r, q);
            self.xb[r] = xq;
            self.at_upper[b] = !increase;
            // keep reduced costs dual feasible
            for j in 0..self.ncols() {
                if self.row_of[j].is_none() && self.lower[j] != self.upper[j] {
                    let wrong_sign = if self.at_upper[j] { self.d[j] < 0.0 } else { self.d[j] > 0.0 };
                    if wrong_sign && self.d[j].abs() < DUAL_TOL {
                        self.d[j] = 0.0;
                    }
                }
            }
        }
        LpStatus::Stalled
    }

    /// Nonnegative multipliers `w` over the rows with `wᵀA x <= wᵀb` infeasible on the box.
    pub(crate) fn ray(&self, r: usize) -> Vec<f64> {
        let b = self.basis[r];
        let increase = self.xb[r] < self.lower[b];
        let sign = if increase { 1.0 } else { -1.0 };
        (0..self.tab.len()).map(|i| (sign * self.tab[r][self.nvar + i]).max(0.0)).collect()
    }

    /// Row duals at an optimum (nonnegative for a maximization).
    pub(crate) fn duals(&self) -> Vec<f64> {
        (0..self.tab.len()).map(|i| (-self.d[self.nvar + i]).max(0.0)).collect()
    }

    pub(crate) fn is_fixed(&self, j: usize) -> bool {
        self.lower[j] == self.upper[j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_max_problem() {
        // max x0 + x1 s.t. x0 + x1 <= 1.5
        let mut lp = Relaxation::new(&[1.0, 1.0]);
        lp.add_row(0, &[(0, 1), (1, 1)], 1.5);
        assert_eq!(lp.solve(100), LpStatus::Optimal);
        let x = lp.primal();
        assert!((x[0] + x[1] - 1.5).abs() < 1e-9);
        assert!((lp.duals()[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasibility() {
        // x0 + x1 >= 2.5 written as -x0 - x1 <= -2.5
        let mut lp = Relaxation::new(&[0.0, 0.0]);
        lp.add_row(0, &[(0, -1), (1, -1)], -2.5);
        match lp.solve(100) {
            LpStatus::Infeasible(r) => {
                let w = lp.ray(r);
                assert!(w[0] > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fixing_and_warm_start() {
        let mut lp = Relaxation::new(&[1.0, 1.0, 0.0]);
        lp.add_row(0, &[(0, 1), (1, 1)], 1.0);
        lp.add_row(1, &[(0, 1), (2, -1)], 0.0);
        assert_eq!(lp.solve(100), LpStatus::Optimal);
        lp.fix(2, 0.0);
        assert_eq!(lp.solve(100), LpStatus::Optimal);
        let x = lp.primal();
        assert!(x[0].abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
        lp.fix(1, 0.0);
        lp.add_row(2, &[(0, -1), (1, -1)], -0.5);
        assert!(matches!(lp.solve(100), LpStatus::Infeasible(_)));
    }
}
