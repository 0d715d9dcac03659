//! Depth-first branch-and-bound over the subset indicators.
//!
//! Relaxations run in floating point; every infeasible leaf gets an exact
//! Farkas certificate, every bound used for pruning is recomputed exactly, and
//! every integer point is rechecked against all model rows.

use std::collections::{BTreeMap, HashMap};

use num_traits::{Signed, Zero};

use super::cuts::{fc_chain_cut, row_holds};
use super::relax::{LpStatus, Relaxation};
use super::{
    fixing_row, fs_row, uc_row, BnbProof, ChainLink, FcChain, LinkKind, Mode, ProofLeaf, ProofNode, RowKind,
    SepError, SeparationModel, SeparationOutcome, SolveOptions, SparseRow,
};
use crate::family::{ElementSet, SetFamily};
use crate::lp::rational::{approximate, exact_from_f64, primitive_scale};
use crate::lp::{int, solve_feasibility, verify_farkas, LpOutcome, Rational, Relation};

const INT_TOL: f64 = 1e-6;
const VIOLATION_TOL: f64 = 1e-6;
const MAX_CUT_ROUNDS: usize = 25;
const CUTS_PER_ROUND: usize = 60;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Goal {
    /// Stop at the first feasible integer point.
    Feasible,
    /// Find the maximum objective.
    Optimize,
}

enum Explore {
    Proof(ProofNode),
    Found(Vec<bool>),
    Pruned,
}

#[derive(Clone)]
struct Node {
    lp: Relaxation,
    fixed: Vec<(u32, u8)>,
    in_lp: Vec<bool>,
}

impl Node {
    fn has_row(&self, id: usize) -> bool {
        self.in_lp.get(id).copied().unwrap_or(false)
    }

    fn fix(&mut self, j: u32, v: u8) {
        self.lp.fix(j as usize, v as f64);
        self.fixed.push((j, v));
    }
}

struct Incumbent {
    value: i64,
    members: Vec<bool>,
}

/// `a` precedes `b` lexicographically over ascending masks (0 before 1).
fn lex_less(a: &[bool], b: &[bool]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x != y {
            return !x;
        }
    }
    false
}

struct Engine<'a> {
    model: &'a SeparationModel,
    opts: &'a SolveOptions,
    dim: usize,
    pool: Vec<SparseRow>,
    pool_index: HashMap<String, usize>,
    /// FS successors `A ∪ S ≠ S` per mask, sorted.
    succ: Vec<Vec<u32>>,
    obj: Vec<i64>,
    nodes: u64,
    incumbent: Option<Incumbent>,
    heuristics: bool,
}

impl<'a> Engine<'a> {
    fn new(model: &'a SeparationModel, opts: &'a SolveOptions) -> Self {
        let dim = model.dim();
        let a_masks: Vec<u32> = model.family().masks().collect();
        let succ = (0..dim as u32)
            .map(|s| {
                let mut v: Vec<u32> = a_masks.iter().map(|a| a | s).filter(|&t| t != s).collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        let obj = model.wv_coeffs().iter().map(|w| -w).collect();
        Self {
            model,
            opts,
            dim,
            pool: Vec::new(),
            pool_index: HashMap::new(),
            succ,
            obj,
            nodes: 0,
            incumbent: None,
            heuristics: true,
        }
    }

    fn intern(&mut self, row: SparseRow) -> usize {
        if let Some(&id) = self.pool_index.get(&row.name) {
            return id;
        }
        let id = self.pool.len();
        self.pool_index.insert(row.name.clone(), id);
        self.pool.push(row);
        id
    }

    fn add_to_node(&self, node: &mut Node, id: usize) {
        if node.has_row(id) {
            return;
        }
        let row = &self.pool[id];
        node.lp.add_row(id, &row.coeffs, row.rhs as f64);
        if node.in_lp.len() <= id {
            node.in_lp.resize(id + 1, false);
        }
        node.in_lp[id] = true;
    }

    fn root(&mut self, maximize: bool, extra: Option<SparseRow>) -> Node {
        let cost: Vec<f64> = if maximize { self.obj.iter().map(|&c| c as f64).collect() } else { vec![0.0; self.dim] };
        let mut node = Node { lp: Relaxation::new(&cost), fixed: Vec::new(), in_lp: Vec::new() };
        let mut ids = vec![self.intern(self.model.wv_row())];
        let gens: Vec<u32> = self.model.generators().to_vec();
        for s in 0..self.dim as u32 {
            for &g in &gens {
                if s | g != s {
                    ids.push(self.intern(fs_row(s, s | g)));
                }
            }
        }
        if let Some(row) = extra {
            ids.push(self.intern(row));
        }
        for id in ids {
            self.add_to_node(&mut node, id);
        }
        node
    }

    fn tick(&mut self) -> Result<(), SepError> {
        self.nodes += 1;
        if self.nodes > self.opts.node_limit {
            return Err(SepError::NodeLimit(self.opts.node_limit));
        }
        Ok(())
    }

    fn explore(&mut self, mut node: Node, goal: Goal) -> Result<Explore, SepError> {
        self.tick()?;
        let mut rounds = 0;
        let x = loop {
            let cap = 50 * (node.lp.rows() + self.dim) + 1000;
            match node.lp.solve(cap) {
                LpStatus::Infeasible(r) => {
                    let w = node.lp.ray(r);
                    if let Some(leaf) = self.certify_leaf(&node, &w) {
                        return Ok(Explore::Proof(ProofNode::Leaf(leaf)));
                    }
                    return self.branch(node, None, goal);
                }
                LpStatus::Stalled => return self.branch(node, None, goal),
                LpStatus::Optimal => {}
            }
            let x = node.lp.primal();
            if goal == Goal::Optimize {
                if let Some(inc) = &self.incumbent {
                    let target = inc.value + 1;
                    let fval: f64 = x.iter().zip(&self.obj).map(|(v, &c)| v * c as f64).sum();
                    if fval < target as f64 - 1e-6 && self.exact_bound(&node) < int(target) {
                        return Ok(Explore::Pruned);
                    }
                }
            }
            if is_integral(&x) {
                let members: Vec<bool> = x.iter().map(|&v| v > 0.5).collect();
                let violated = self.violated_rows(&members);
                let fresh: Vec<usize> = violated.into_iter().filter(|&id| !node.has_row(id)).collect();
                if fresh.is_empty() {
                    if self.is_member_point(&members) {
                        return Ok(self.found(members, goal));
                    }
                    return self.branch(node, Some(&x), goal);
                }
                for id in fresh {
                    self.add_to_node(&mut node, id);
                }
                continue;
            }
            if self.heuristics {
                if let Some(found) = self.round_and_close(&x) {
                    if let Explore::Found(m) = self.found(found, goal) {
                        return Ok(Explore::Found(m));
                    }
                }
            }
            if rounds >= MAX_CUT_ROUNDS {
                break x;
            }
            let cuts = self.separate(&x, &node);
            if cuts.is_empty() {
                break x;
            }
            for id in cuts {
                self.add_to_node(&mut node, id);
            }
            rounds += 1;
        };
        self.branch(node, Some(&x), goal)
    }

    /// Records a feasible point; returns `Found` when the goal is satisfied.
    fn found(&mut self, members: Vec<bool>, goal: Goal) -> Explore {
        let masks: Vec<u32> = (0..self.dim as u32).filter(|&m| members[m as usize]).collect();
        let value = self.model.objective(&masks);
        let better = match &self.incumbent {
            None => true,
            Some(inc) => value > inc.value || (value == inc.value && lex_less(&members, &inc.members)),
        };
        if better {
            self.incumbent = Some(Incumbent { value, members: members.clone() });
        }
        match goal {
            Goal::Feasible => Explore::Found(members),
            Goal::Optimize => Explore::Pruned,
        }
    }

    fn branch(&mut self, mut node: Node, x: Option<&[f64]>, goal: Goal) -> Result<Explore, SepError> {
        let Some(j) = self.branch_var(&node, x) else {
            return self.decide_full(node, goal);
        };
        let first = match x {
            Some(x) if x[j as usize] < 0.5 => 0u8,
            _ => 1u8,
        };
        let mut proofs: [Option<ProofNode>; 2] = [None, None];
        let mut pruned = false;
        let mut second = Some(node.clone());
        for (k, v) in [first, 1 - first].into_iter().enumerate() {
            let mut child = if k == 0 { second.take().unwrap() } else { std::mem::replace(&mut node, placeholder()) };
            child.fix(j, v);
            match self.explore(child, goal)? {
                Explore::Found(m) => return Ok(Explore::Found(m)),
                Explore::Pruned => pruned = true,
                Explore::Proof(p) => proofs[v as usize] = Some(p),
            }
        }
        if pruned {
            return Ok(Explore::Pruned);
        }
        let [zero, one] = proofs;
        Ok(Explore::Proof(ProofNode::Branch {
            var: j,
            zero: Box::new(zero.unwrap()),
            one: Box::new(one.unwrap()),
        }))
    }

    fn branch_var(&self, node: &Node, x: Option<&[f64]>) -> Option<u32> {
        let free = |j: u32| !node.lp.is_fixed(j as usize);
        if let Some(&j) = self.opts.branch_first_on.iter().find(|&&j| (j as usize) < self.dim && free(j)) {
            return Some(j);
        }
        if let Some(x) = x {
            let mut best: Option<(u32, f64)> = None;
            for j in 0..self.dim as u32 {
                let v = x[j as usize];
                if !free(j) || !(INT_TOL..=1.0 - INT_TOL).contains(&v) {
                    continue;
                }
                let score = (v - 0.5).abs();
                if best.is_none_or(|(_, s)| score < s - 1e-12) {
                    best = Some((j, score));
                }
            }
            if let Some((j, _)) = best {
                return Some(j);
            }
        }
        (0..self.dim as u32).find(|&j| free(j))
    }

    /// Every variable is fixed: decide exactly.
    fn decide_full(&mut self, node: Node, goal: Goal) -> Result<Explore, SepError> {
        let mut members = vec![false; self.dim];
        for &(m, v) in &node.fixed {
            members[m as usize] = v == 1;
        }
        let mut violated: Option<SparseRow> = None;
        for id in (0..self.pool.len()).filter(|&id| node.has_row(id)) {
            if !row_holds(&self.pool[id], &members) {
                violated = Some(self.pool[id].clone());
                break;
            }
        }
        if violated.is_none() {
            violated = self.violations(&members).into_iter().next();
        }
        match violated {
            None if self.is_member_point(&members) => Ok(self.found(members, goal)),
            None => Ok(Explore::Pruned),
            Some(row) => {
                let mut duals = BTreeMap::new();
                duals.insert(row.name.clone(), int(-1));
                let mut col: HashMap<u32, i64> = HashMap::new();
                for &(m, a) in &row.coeffs {
                    *col.entry(m).or_default() -= a;
                }
                for (m, c) in col {
                    if c != 0 {
                        duals.insert(format!("fix:{m}"), int(-c));
                    }
                }
                let leaf = self.assemble_leaf(&node, &[row], duals);
                Ok(leaf.map_or(Explore::Pruned, |l| Explore::Proof(ProofNode::Leaf(l))))
            }
        }
    }

    fn is_member_point(&self, members: &[bool]) -> bool {
        members.iter().any(|&b| b)
            && self.violations(members).is_empty()
            && self.model.wv_coeffs().iter().zip(members).filter(|(_, &b)| b).map(|(w, _)| w).sum::<i64>() <= -1
    }

    /// Pool ids of UC and FS rows violated by an integer point.
    fn violated_rows(&mut self, members: &[bool]) -> Vec<usize> {
        self.violations(members).into_iter().map(|r| self.intern(r)).collect()
    }

    fn violations(&self, members: &[bool]) -> Vec<SparseRow> {
        let set: Vec<u32> = (0..self.dim as u32).filter(|&m| members[m as usize]).collect();
        let mut rows = Vec::new();
        for (i, &s) in set.iter().enumerate() {
            for &t in &set[i + 1..] {
                if !members[(s | t) as usize] {
                    rows.push(uc_row(s, t));
                }
            }
            for &t in &self.succ[s as usize] {
                if !members[t as usize] {
                    rows.push(fs_row(s, t));
                }
            }
            if rows.len() > 4 * CUTS_PER_ROUND {
                break;
            }
        }
        rows
    }

    fn round_and_close(&self, x: &[f64]) -> Option<Vec<bool>> {
        let rounded: Vec<u32> = (0..self.dim as u32).filter(|&m| x[m as usize] > 0.5).collect();
        if rounded.is_empty() {
            return None;
        }
        let fam = SetFamily::from_masks(self.model.n(), rounded).ok()?;
        let closed = fam.closure_with(self.model.family()).ok()?;
        let members = closed.indicator();
        self.is_member_point(&members).then_some(members)
    }

    fn separate(&mut self, x: &[f64], node: &Node) -> Vec<usize> {
        let support: Vec<u32> = (0..self.dim as u32).filter(|&m| x[m as usize] > 1e-7).collect();
        let mut uc: Vec<(f64, u32, u32)> = Vec::new();
        let mut fc: Vec<(f64, u32, u32, u32)> = Vec::new();
        for (i, &t) in support.iter().enumerate() {
            for &u in &support[i + 1..] {
                let tu = t | u;
                if tu == t || tu == u {
                    continue;
                }
                let (xt, xu, xtu) = (x[t as usize], x[u as usize], x[tu as usize]);
                let v = xt + xu - xtu - 1.0;
                if v > VIOLATION_TOL {
                    uc.push((v, t, u));
                }
                if !self.opts.fc_cuts || xt + xu - xtu <= VIOLATION_TOL {
                    continue;
                }
                let mut best: Option<(f64, u32)> = None;
                for f in common(&self.succ[t as usize], &self.succ[u as usize]) {
                    if f == tu {
                        continue;
                    }
                    let v = xt + xu - xtu - x[f as usize];
                    if v > VIOLATION_TOL && best.is_none_or(|(bv, _)| v > bv + 1e-12) {
                        best = Some((v, f));
                    }
                }
                if let Some((v, f)) = best {
                    fc.push((v, t, u, f));
                }
            }
        }
        let by_violation = |a: &f64, b: &f64| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal);
        uc.sort_by(|a, b| by_violation(&a.0, &b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        fc.sort_by(|a, b| by_violation(&a.0, &b.0).then((a.1, a.2, a.3).cmp(&(b.1, b.2, b.3))));
        let mut ids = Vec::new();
        for &(_, s, t) in uc.iter().take(CUTS_PER_ROUND) {
            let id = self.intern(uc_row(s, t));
            if !node.has_row(id) {
                ids.push(id);
            }
        }
        for &(_, t, u, f) in fc.iter().take(CUTS_PER_ROUND) {
            if let Some(row) = self.forced_union_row(t, u, f) {
                let id = self.intern(row);
                if !node.has_row(id) {
                    ids.push(id);
                }
            }
        }
        ids
    }

    /// `x_T + x_U - x_{T∪U} - x_F <= 0` for a common FS successor `F` of `T` and `U`.
    fn forced_union_row(&self, t: u32, u: u32, f: u32) -> Option<SparseRow> {
        let a = self.model.family();
        if a.masks().any(|s| s | t == f && s | u == f) {
            return Some(super::fc_row(t, u, f));
        }
        let at = a.masks().find(|&s| s | t == f)?;
        let au = a.masks().find(|&s| s | u == f)?;
        let tu = t | u;
        let link = |from, via, to, kind| FcChain { source: from, links: vec![ChainLink { from, to, via, kind }] };
        let chains = vec![
            link(t, at, f, LinkKind::Fs),
            link(t, u, tu, LinkKind::Uc),
            link(u, au, f, LinkKind::Fs),
            link(u, t, tu, LinkKind::Uc),
        ];
        fc_chain_cut(a, &[t, u], &[tu, f], &chains).ok()
    }

    /// Safe upper bound on the objective over the node's box from rationalized duals.
    fn exact_bound(&self, node: &Node) -> Rational {
        let w = node.lp.duals();
        let mut bound = Rational::zero();
        let mut reduced: Vec<Rational> = self.obj.iter().map(|&c| int(c)).collect();
        for (i, &wi) in w.iter().enumerate() {
            if wi <= 0.0 {
                continue;
            }
            let Some(wr) = approximate(wi, 1 << 20).filter(|r| r.is_positive()) else { continue };
            let row = &self.pool[node.lp.row_ids[i]];
            bound += &wr * int(row.rhs);
            for &(m, a) in &row.coeffs {
                reduced[m as usize] -= &wr * int(a);
            }
        }
        for (j, r) in reduced.iter().enumerate() {
            let (lo, hi) = node.lp.bounds(j);
            let v = if r.is_positive() { hi } else { lo };
            if v != 0.0 {
                bound += r * int(v as i64);
            }
        }
        bound
    }

    /// Turns a floating ray into an exactly verified leaf certificate.
    fn certify_leaf(&self, node: &Node, w: &[f64]) -> Option<ProofLeaf> {
        let wmax = w.iter().cloned().fold(0.0, f64::max);
        let support: Vec<usize> = if wmax > 0.0 {
            (0..w.len()).filter(|&i| w[i] > 1e-9 * wmax).collect()
        } else {
            Vec::new()
        };
        if !support.is_empty() {
            let rows: Vec<&SparseRow> = support.iter().map(|&i| &self.pool[node.lp.row_ids[i]]).collect();
            for den in [1u64, 2, 4, 12, 60, 840, 1 << 16, 1 << 24, 0] {
                let weights: Option<Vec<Rational>> = support
                    .iter()
                    .map(|&i| {
                        let v = w[i] / wmax;
                        if den == 0 { exact_from_f64(v) } else { approximate(v, den) }
                    })
                    .collect();
                let Some(weights) = weights else { continue };
                if let Some(duals) = self.ray_duals(node, &rows, &weights) {
                    let owned: Vec<SparseRow> = rows.iter().map(|r| (*r).clone()).collect();
                    if let Some(leaf) = self.assemble_leaf(node, &owned, duals) {
                        return Some(leaf);
                    }
                }
            }
        }
        // exact fallback on the support rows, then on every row of the node
        let candidates: Vec<Vec<usize>> = if support.is_empty() {
            vec![(0..node.lp.rows()).collect()]
        } else {
            vec![support.clone(), (0..node.lp.rows()).collect()]
        };
        for idx in candidates {
            let rows: Vec<SparseRow> = idx.iter().map(|&i| self.pool[node.lp.row_ids[i]].clone()).collect();
            let sys = self.leaf_system(node, &rows);
            if let LpOutcome::Infeasible { duals } = solve_feasibility(&sys) {
                if let Some(leaf) = self.assemble_leaf(node, &rows, duals) {
                    return Some(leaf);
                }
            }
        }
        None
    }

    /// Checks `min_box (wᵀA) x > wᵀb` exactly and converts `w` to signed duals.
    fn ray_duals(&self, node: &Node, rows: &[&SparseRow], weights: &[Rational]) -> Option<BTreeMap<String, Rational>> {
        let mut agg: HashMap<u32, Rational> = HashMap::new();
        let mut wb = Rational::zero();
        for (row, wr) in rows.iter().zip(weights) {
            if wr.is_negative() {
                return None;
            }
            if wr.is_zero() {
                continue;
            }
            wb += wr * int(row.rhs);
            for &(m, a) in &row.coeffs {
                *agg.entry(m).or_insert_with(Rational::zero) += wr * int(a);
            }
        }
        let mut min_lhs = Rational::zero();
        for (&m, r) in &agg {
            let (lo, hi) = node.lp.bounds(m as usize);
            let v = if r.is_positive() { lo } else { hi };
            if v != 0.0 {
                min_lhs += r * int(v as i64);
            }
        }
        if min_lhs <= wb {
            return None;
        }
        let mut duals: BTreeMap<String, Rational> = BTreeMap::new();
        for (row, wr) in rows.iter().zip(weights) {
            if !wr.is_zero() {
                duals.insert(row.name.clone(), -wr.clone());
            }
        }
        for &(m, _) in &node.fixed {
            if let Some(r) = agg.get(&m).filter(|r| !r.is_zero()) {
                duals.insert(format!("fix:{m}"), r.clone());
            }
        }
        Some(duals)
    }

    fn leaf_system(&self, node: &Node, rows: &[SparseRow]) -> crate::lp::LinearSystem {
        let mut sys = self.model.empty_system();
        for row in rows {
            sys.push(row.to_constraint(self.dim));
        }
        for &(m, v) in &node.fixed {
            sys.push(fixing_row(m, v).to_constraint(self.dim));
        }
        sys
    }

    fn assemble_leaf(&self, node: &Node, rows: &[SparseRow], mut duals: BTreeMap<String, Rational>) -> Option<ProofLeaf> {
        let used: Vec<SparseRow> = rows.iter().filter(|r| duals.contains_key(&r.name)).cloned().collect();
        let sys = self.leaf_system(node, &used);
        duals.retain(|k, v| !v.is_zero() && sys.row(k).is_some());
        primitive_scale(&mut duals);
        if !verify_farkas(&sys, &duals).ok()?.passed() {
            return None;
        }
        let mut kinds: BTreeMap<String, RowKind> = used.iter().map(|r| (r.name.clone(), r.kind.clone())).collect();
        for &(m, _) in &node.fixed {
            kinds.insert(format!("fix:{m}"), RowKind::Fixing);
        }
        Some(ProofLeaf { fixed: node.fixed.clone(), rows: kinds, system: sys, duals })
    }
}

fn placeholder() -> Node {
    Node { lp: Relaxation::new(&[]), fixed: Vec::new(), in_lp: Vec::new() }
}

fn is_integral(x: &[f64]) -> bool {
    x.iter().all(|&v| !(INT_TOL..=1.0 - INT_TOL).contains(&v))
}

fn common<'s>(a: &'s [u32], b: &'s [u32]) -> impl Iterator<Item = u32> + 's {
    let (mut i, mut j) = (0, 0);
    std::iter::from_fn(move || {
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                    return Some(a[i - 1]);
                }
            }
        }
        None
    })
}

fn family_of(model: &SeparationModel, members: &[bool]) -> SetFamily {
    let sets = (0..members.len() as u32).filter(|&m| members[m as usize]).map(ElementSet);
    SetFamily::with_ground(model.family().ground().clone(), sets).expect("masks within the ground set")
}

/// Solves `X(A, c)` with explicit options.
pub fn solve_separation_with(model: &SeparationModel, opts: &SolveOptions) -> Result<SeparationOutcome, SepError> {
    let mut engine = Engine::new(model, opts);
    let goal = match opts.mode {
        Mode::Feasibility => Goal::Feasible,
        Mode::MaxViolation => Goal::Optimize,
    };
    let root = engine.root(goal == Goal::Optimize, None);
    let result = engine.explore(root, goal)?;
    if let Explore::Proof(root) = result {
        if engine.incumbent.is_none() {
            return Ok(SeparationOutcome::Empty { proof: BnbProof { n: model.n(), root } });
        }
    }
    let Some(inc) = engine.incumbent.take() else {
        unreachable!("search ended without proof or incumbent")
    };
    if goal == Goal::Feasible {
        let family = family_of(model, &inc.members);
        return Ok(SeparationOutcome::Violating { family, objective: inc.value });
    }
    let members = lex_smallest_optimum(&mut engine, inc)?;
    let family = family_of(model, &members);
    let masks: Vec<u32> = family.masks().collect();
    let objective = model.objective(&masks);
    Ok(SeparationOutcome::Violating { family, objective })
}

/// Among points with the optimal objective, the lexicographically smallest.
fn lex_smallest_optimum(engine: &mut Engine, inc: Incumbent) -> Result<Vec<bool>, SepError> {
    let floor = SparseRow {
        name: "objective-floor".into(),
        coeffs: engine.model.wv_coeffs().iter().enumerate().filter(|(_, &w)| w != 0).map(|(m, &w)| (m as u32, w)).collect(),
        rhs: -inc.value,
        relation: Relation::Le,
        kind: RowKind::Wv,
    };
    engine.heuristics = false;
    let mut witness = inc.members;
    let mut node = engine.root(false, Some(floor));
    for j in 0..engine.dim as u32 {
        if !witness[j as usize] {
            node.fix(j, 0);
            continue;
        }
        let mut trial = node.clone();
        trial.fix(j, 0);
        engine.incumbent = None;
        match engine.explore(trial, Goal::Feasible)? {
            Explore::Found(m) => {
                witness = m;
                node.fix(j, 0);
            }
            _ => node.fix(j, 1),
        }
    }
    Ok(witness)
}
