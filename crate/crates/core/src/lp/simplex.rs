//! Dense two-phase simplex over exact rationals with Bland's rule.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::rational::primitive_scale;
use super::{LinearSystem, LpOutcome, Rational, Relation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OptOutcome {
    Optimal { point: Vec<Rational>, value: Rational },
    Infeasible { duals: BTreeMap<String, Rational> },
    Unbounded,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    obj: Vec<Rational>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    /// Identity column each row started with, and whether the row was negated.
    id_col: Vec<usize>,
    negated: Vec<bool>,
    /// Original row name, `None` for upper-bound rows.
    names: Vec<Option<String>>,
    pos: Vec<usize>,
    neg: Vec<Option<usize>>,
}

impl Tableau {
    fn ncols(&self) -> usize {
        self.kinds.len()
    }

    fn build(sys: &LinearSystem) -> Self {
        let k = sys.dim();
        let mut kinds = Vec::new();
        let mut pos = Vec::with_capacity(k);
        let mut neg = Vec::with_capacity(k);
        for j in 0..k {
            pos.push(kinds.len());
            kinds.push(ColKind::Structural);
            if sys.nonneg[j] {
                neg.push(None);
            } else {
                neg.push(Some(kinds.len()));
                kinds.push(ColKind::Structural);
            }
        }
        let nstruct = kinds.len();

        // (structural coefficients, relation, rhs, name)
        let mut raw: Vec<(Vec<Rational>, Relation, Rational, Option<String>)> = Vec::new();
        for row in &sys.constraints {
            let mut a = vec![Rational::zero(); nstruct];
            for (j, v) in row.support() {
                a[pos[j]] = v.clone();
                if let Some(nj) = neg[j] {
                    a[nj] = -v.clone();
                }
            }
            raw.push((a, row.relation, row.rhs.clone(), Some(row.name.clone())));
        }
        for (j, u) in sys.upper.iter().enumerate() {
            if let (Some(u), true) = (u, sys.nonneg[j]) {
                let mut a = vec![Rational::zero(); nstruct];
                a[pos[j]] = Rational::one();
                raw.push((a, Relation::Le, u.clone(), None));
            }
        }

        let m = raw.len();
        let mut negated = vec![false; m];
        for (i, r) in raw.iter_mut().enumerate() {
            if r.2.is_negative() {
                negated[i] = true;
                for v in r.0.iter_mut() {
                    *v = -v.clone();
                }
                r.2 = -r.2.clone();
                r.1 = match r.1 {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }

        let mut aux: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); m];
        let mut id_col = vec![0; m];
        for (i, r) in raw.iter().enumerate() {
            match r.1 {
                Relation::Le => {
                    id_col[i] = kinds.len();
                    aux[i].push((kinds.len(), Rational::one()));
                    kinds.push(ColKind::Slack);
                }
                Relation::Ge => {
                    aux[i].push((kinds.len(), -Rational::one()));
                    kinds.push(ColKind::Slack);
                    id_col[i] = kinds.len();
                    aux[i].push((kinds.len(), Rational::one()));
                    kinds.push(ColKind::Artificial);
                }
                Relation::Eq => {
                    id_col[i] = kinds.len();
                    aux[i].push((kinds.len(), Rational::one()));
                    kinds.push(ColKind::Artificial);
                }
            }
        }
        let ncols = kinds.len();
        let mut rows = Vec::with_capacity(m);
        let mut names = Vec::with_capacity(m);
        for (i, (a, _, b, name)) in raw.into_iter().enumerate() {
            let mut row = a;
            row.resize(ncols + 1, Rational::zero());
            for (c, v) in &aux[i] {
                row[*c] = v.clone();
            }
            row[ncols] = b;
            rows.push(row);
            names.push(name);
        }
        let basis = id_col.clone();
        let mut t = Tableau {
            rows,
            obj: vec![Rational::zero(); ncols + 1],
            basis,
            kinds,
            id_col,
            negated,
            names,
            pos,
            neg,
        };
        let cost: Vec<Rational> = t
            .kinds
            .iter()
            .map(|k| if *k == ColKind::Artificial { Rational::one() } else { Rational::zero() })
            .collect();
        t.set_objective(&cost);
        t
    }

    fn set_objective(&mut self, cost: &[Rational]) {
        let ncols = self.ncols();
        let mut obj = vec![Rational::zero(); ncols + 1];
        obj[..ncols].clone_from_slice(cost);
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (o, v) in obj.iter_mut().zip(row) {
                if !v.is_zero() {
                    *o -= cb * v;
                }
            }
        }
        self.obj = obj;
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let p = self.rows[r][e].clone();
        if !p.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &p;
                }
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[e].is_zero() {
                continue;
            }
            let f = row[e].clone();
            for &j in &nz {
                row[j] -= &f * &pivot_row[j];
            }
        }
        if !self.obj[e].is_zero() {
            let f = self.obj[e].clone();
            for &j in &nz {
                self.obj[j] -= &f * &pivot_row[j];
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = e;
    }

    /// Bland's rule; returns false when unbounded.
    fn run(&mut self, allowed: impl Fn(usize) -> bool) -> bool {
        let ncols = self.ncols();
        loop {
            let Some(e) = (0..ncols).find(|&j| allowed(j) && self.obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[e].is_positive() {
                    continue;
                }
                let ratio = &row[ncols] / &row[e];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, e),
                None => return false,
            }
        }
    }

    fn objective_value(&self) -> Rational {
        -self.obj[self.ncols()].clone()
    }

    fn farkas_duals(&self) -> BTreeMap<String, Rational> {
        let mut duals = BTreeMap::new();
        for (i, name) in self.names.iter().enumerate() {
            let Some(name) = name else { continue };
            let c = self.id_col[i];
            let cost = if self.kinds[c] == ColKind::Artificial { Rational::one() } else { Rational::zero() };
            let mut u = cost - &self.obj[c];
            if self.negated[i] {
                u = -u;
            }
            if !u.is_zero() {
                duals.insert(name.clone(), u);
            }
        }
        primitive_scale(&mut duals);
        duals
    }

    fn point(&self, k: usize) -> Vec<Rational> {
        let ncols = self.ncols();
        let mut x = vec![Rational::zero(); ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            x[b] = self.rows[i][ncols].clone();
        }
        (0..k)
            .map(|j| match self.neg[j] {
                Some(nj) => &x[self.pos[j]] - &x[nj],
                None => x[self.pos[j]].clone(),
            })
            .collect()
    }

    fn phase_one(&mut self) -> bool {
        self.run(|_| true);
        self.objective_value().is_zero()
    }

    fn drive_out_artificials(&mut self) {
        let ncols = self.ncols();
        for r in 0..self.rows.len() {
            if self.kinds[self.basis[r]] != ColKind::Artificial {
                continue;
            }
            if let Some(e) = (0..ncols).find(|&j| self.kinds[j] != ColKind::Artificial && !self.rows[r][j].is_zero()) {
                self.pivot(r, e);
            }
        }
    }
}

/// Exact phase-one feasibility; Bland's rule makes the result deterministic.
pub fn solve_feasibility(sys: &LinearSystem) -> LpOutcome {
    let mut t = Tableau::build(sys);
    if t.phase_one() {
        LpOutcome::Feasible { point: t.point(sys.dim()) }
    } else {
        LpOutcome::Infeasible { duals: t.farkas_duals() }
    }
}

/// Exact optimization of a linear objective over the system.
pub fn optimize(sys: &LinearSystem, objective: &[Rational], sense: Sense) -> OptOutcome {
    let mut t = Tableau::build(sys);
    if !t.phase_one() {
        return OptOutcome::Infeasible { duals: t.farkas_duals() };
    }
    t.drive_out_artificials();
    let sign = match sense {
        Sense::Minimize => Rational::one(),
        Sense::Maximize => -Rational::one(),
    };
    let mut cost = vec![Rational::zero(); t.ncols()];
    for (j, c) in objective.iter().enumerate() {
        cost[t.pos[j]] = &sign * c;
        if let Some(nj) = t.neg[j] {
            cost[nj] = -(&sign * c);
        }
    }
    t.set_objective(&cost);
    let kinds = t.kinds.clone();
    if !t.run(|j| kinds[j] != ColKind::Artificial) {
        return OptOutcome::Unbounded;
    }
    let point = t.point(sys.dim());
    let value = objective.iter().zip(&point).fold(Rational::zero(), |acc, (c, x)| acc + c * x);
    OptOutcome::Optimal { point, value }
}
