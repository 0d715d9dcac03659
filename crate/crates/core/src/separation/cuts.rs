//! FC cuts, FC-chain cuts and row validation against a model.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_traits::One;
use thiserror::Error;

use super::{fc_row, uc_row, FcChain, LinkKind, RowKind, SeparationModel, SparseRow};
use crate::family::{ElementSet, SetFamily};
use crate::lp::{int, LinearConstraint, Relation};

pub const DEFAULT_FC_CUT_CAP: usize = 100_000;

/// Largest positive side accepted by [`fc_chain_cut`].
const MAX_CHAIN_SIDE: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainCutError {
    #[error("set {0} lies on both sides")]
    Overlap(u32),
    #[error("positive side has {0} members, at most {MAX_CHAIN_SIDE} supported")]
    TooLarge(usize),
    #[error("chain {0} does not run from the positive to the negative side")]
    Endpoint(usize),
    #[error("chain {0} has an unjustified link")]
    InvalidChain(usize),
    #[error("Hall condition fails for subset {0:?}")]
    HallViolation(Vec<u32>),
}

/// Rows `x_T + x_U - x_{T∪U} - x_F <= 0` for `S ∈ A` with `S∪T = S∪U = F`.
///
/// Pairs with `T ⊆ U` or `U ⊆ T` reduce to FS rows and are skipped.
pub fn generate_fc_cuts(model: &SeparationModel, cap: usize) -> Vec<SparseRow> {
    let n = model.n();
    let full = crate::family::full_mask(n);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for s in model.family().masks() {
        let outside = full & !s;
        // F = S ∪ R for R ⊆ [n]∖S; the class of F is {T : F∖S ⊆ T ⊆ F}
        let mut r = 0u32;
        loop {
            let f = s | r;
            let class: Vec<u32> = submasks(s).map(|x| x | r).collect();
            for (i, &t) in class.iter().enumerate() {
                for &u in &class[i + 1..] {
                    if t & u == t || t & u == u {
                        continue;
                    }
                    if seen.insert((t.min(u), t.max(u), f)) {
                        out.push(fc_row(t, u, f));
                        if out.len() >= cap {
                            return out;
                        }
                    }
                }
            }
            if r == outside {
                break;
            }
            r = (r.wrapping_sub(outside)) & outside;
        }
    }
    out
}

/// All submasks of `m` in increasing order.
fn submasks(m: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(0u32);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == m { None } else { Some((cur.wrapping_sub(m)) & m) };
        Some(cur)
    })
}

/// Checks every link: FS links need `via ∈ A`, UC links need `via` in the
/// closure of `s_family` under union and `⊎ A`.
pub fn verify_fc_chain(a: &SetFamily, s_family: &SetFamily, chain: &FcChain) -> bool {
    if !chain.is_well_formed() {
        return false;
    }
    let closure = if chain.links.iter().any(|l| l.kind == LinkKind::Uc) {
        if s_family.is_empty() {
            return false;
        }
        match s_family.closure_with(a) {
            Ok(c) => Some(c),
            Err(_) => return false,
        }
    } else {
        None
    };
    chain.links.iter().all(|l| match l.kind {
        LinkKind::Fs => a.contains(ElementSet(l.via)) && l.via | l.from == l.to,
        LinkKind::Uc => {
            closure.as_ref().is_some_and(|c| c.contains(ElementSet(l.via))) && l.from | l.via == l.to
        }
    })
}

/// `Σ_{positive} x - Σ_{negative} x <= 0`, emitted only after the chains and the
/// Hall condition `|T| <= |U(T)|` over every subset `T` of the positive side check out.
pub fn fc_chain_cut(
    a: &SetFamily,
    positive: &[u32],
    negative: &[u32],
    chains: &[FcChain],
) -> Result<SparseRow, ChainCutError> {
    let pos: BTreeSet<u32> = positive.iter().copied().collect();
    let neg: BTreeSet<u32> = negative.iter().copied().collect();
    if let Some(&m) = pos.intersection(&neg).next() {
        return Err(ChainCutError::Overlap(m));
    }
    if pos.len() > MAX_CHAIN_SIDE {
        return Err(ChainCutError::TooLarge(pos.len()));
    }
    let s_family = SetFamily::from_masks(a.n(), pos.iter().copied()).map_err(|_| ChainCutError::InvalidChain(0))?;
    let pos_list: Vec<u32> = pos.iter().copied().collect();
    let mut reach: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); pos_list.len()];
    for (k, chain) in chains.iter().enumerate() {
        let (Ok(i), true) = (pos_list.binary_search(&chain.source), neg.contains(&chain.target())) else {
            return Err(ChainCutError::Endpoint(k));
        };
        if !verify_fc_chain(a, &s_family, chain) {
            return Err(ChainCutError::InvalidChain(k));
        }
        reach[i].insert(chain.target());
    }
    for subset in 1u32..(1 << pos_list.len()) {
        let members: Vec<usize> = (0..pos_list.len()).filter(|&i| subset >> i & 1 == 1).collect();
        let image: BTreeSet<u32> = members.iter().flat_map(|&i| reach[i].iter().copied()).collect();
        if members.len() > image.len() {
            return Err(ChainCutError::HallViolation(members.iter().map(|&i| pos_list[i]).collect()));
        }
    }
    let mut coeffs: Vec<(u32, i64)> = pos.iter().map(|&m| (m, 1)).chain(neg.iter().map(|&m| (m, -1))).collect();
    coeffs.sort_unstable();
    let join = |s: &BTreeSet<u32>| s.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("+");
    Ok(SparseRow {
        name: format!("chain:{}-{}", join(&pos), join(&neg)),
        coeffs,
        rhs: 0,
        relation: Relation::Le,
        kind: RowKind::FcChain { positive: pos_list, negative: neg.into_iter().collect(), chains: chains.to_vec() },
    })
}

fn integer_map(row: &LinearConstraint, names: &[String]) -> Result<BTreeMap<u32, i64>, String> {
    let mut map = BTreeMap::new();
    for (j, a) in row.support() {
        if !a.denom().is_one() {
            return Err(format!("non-integer coefficient on {}", names[j]));
        }
        let m = super::parse_var_name(&names[j]).ok_or_else(|| format!("unknown variable {}", names[j]))?;
        let v: i64 = a.numer().try_into().map_err(|_| "coefficient overflow".to_string())?;
        map.insert(m, v);
    }
    Ok(map)
}

fn as_map(row: &SparseRow) -> BTreeMap<u32, i64> {
    row.coeffs.iter().copied().collect()
}

fn expect(row: &LinearConstraint, relation: Relation, rhs: i64) -> Result<(), String> {
    if row.relation != relation || row.rhs != int(rhs) {
        return Err(format!("expected `{} {rhs}`", relation.symbol()));
    }
    Ok(())
}

/// Validates `row` as an instance of `kind` for this model.
///
/// Returns a replacement when a WV row omits terms of variables fixed to 0:
/// the canonical WV row is then used in its place.
pub fn validate_row(
    model: &SeparationModel,
    names: &[String],
    row: &LinearConstraint,
    kind: &RowKind,
    fixed: &[(u32, u8)],
) -> Result<Option<LinearConstraint>, String> {
    let map = integer_map(row, names)?;
    let support: Vec<u32> = map.keys().copied().collect();
    let a = model.family();
    match kind {
        RowKind::Uc => {
            expect(row, Relation::Le, 1)?;
            let found = support.iter().any(|&s| support.iter().any(|&t| as_map(&uc_row(s, t)) == map));
            found.then_some(None).ok_or_else(|| "not of the form x_S + x_T - x_{S∪T} <= 1".into())
        }
        RowKind::Fs => {
            expect(row, Relation::Le, 0)?;
            let ok = support.len() == 2 && {
                let (s, t) = if map[&support[0]] == 1 { (support[0], support[1]) } else { (support[1], support[0]) };
                map[&s] == 1 && map[&t] == -1 && a.masks().any(|am| am | s == t)
            };
            ok.then_some(None).ok_or_else(|| "not of the form x_S - x_{A∪S} <= 0 with A in the family".into())
        }
        RowKind::Fc => {
            expect(row, Relation::Le, 0)?;
            for &t in &support {
                for &u in &support {
                    for &f in &support {
                        if as_map(&fc_row(t, u, f)) == map && a.masks().any(|s| s | t == f && s | u == f) {
                            return Ok(None);
                        }
                    }
                }
            }
            Err("no S in the family with S∪T = S∪U = F matches this row".into())
        }
        RowKind::FcChain { positive, negative, chains } => {
            expect(row, Relation::Le, 0)?;
            let cut = fc_chain_cut(a, positive, negative, chains).map_err(|e| e.to_string())?;
            (as_map(&cut) == map).then_some(None).ok_or_else(|| "coefficients differ from the chain sides".into())
        }
        RowKind::Fixing => {
            let ok = row.relation == Relation::Eq
                && support.len() == 1
                && map[&support[0]] == 1
                && fixed.iter().any(|&(m, v)| m == support[0] && int(v as i64) == row.rhs);
            ok.then_some(None).ok_or_else(|| "not a fixing on this leaf's branch path".into())
        }
        RowKind::Wv => {
            expect(row, Relation::Le, -1)?;
            let zero_fixed: HashSet<u32> = fixed.iter().filter(|f| f.1 == 0).map(|f| f.0).collect();
            let mut differs = false;
            for (m, &w) in model.wv_coeffs().iter().enumerate() {
                let printed = map.get(&(m as u32)).copied().unwrap_or(0);
                if printed != w {
                    if !zero_fixed.contains(&(m as u32)) {
                        return Err(format!("coefficient of x_{m} is {printed}, expected {w}"));
                    }
                    differs = true;
                }
            }
            if map.keys().any(|&m| m as usize >= model.dim()) {
                return Err("variable outside the model".into());
            }
            if differs {
                let mut canonical = model.wv_row().to_constraint(model.dim());
                canonical.name = row.name.clone();
                Ok(Some(canonical))
            } else {
                Ok(None)
            }
        }
    }
}

/// Exact check that an integer incidence vector satisfies a row.
pub(crate) fn row_holds(row: &SparseRow, member: &[bool]) -> bool {
    let lhs: i64 = row.coeffs.iter().filter(|(m, _)| member[*m as usize]).map(|(_, a)| a).sum();
    match row.relation {
        Relation::Le => lhs <= row.rhs,
        Relation::Ge => lhs >= row.rhs,
        Relation::Eq => lhs == row.rhs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::complement_column_to_mask;
    use crate::separation::{build_model, ChainLink, WeightVector};

    fn s_prime() -> SetFamily {
        SetFamily::from_digit_strings(6, &["empty", "456", "134", "1256", "12345"])
            .unwrap()
            .union_closure()
            .unwrap()
    }

    fn pc(j: u32) -> u32 {
        complement_column_to_mask(j, 6)
    }

    fn link(from: u32, via: u32, to: u32, kind: LinkKind) -> ChainLink {
        ChainLink { from: pc(from), to: pc(to), via: pc(via), kind }
    }

    #[test]
    fn fc_cut_from_printed_proof_is_generated() {
        let m = build_model(&s_prime(), &WeightVector::new(vec![16, 8, 12, 20, 17, 15]).unwrap()).unwrap();
        let cuts = generate_fc_cuts(&m, DEFAULT_FC_CUT_CAP);
        let target = fc_row(pc(15), pc(53), pc(1));
        assert!(cuts.iter().any(|c| as_map(c) == as_map(&target)));
        assert!(cuts.iter().all(|c| c.coeffs.iter().filter(|x| x.1 > 0).count() == 2));
    }

    #[test]
    fn chain_links() {
        let a = s_prime();
        let pos = SetFamily::from_masks(6, [pc(29), pc(47), pc(61), pc(63)]).unwrap();
        let fs = FcChain { source: pc(29), links: vec![link(29, 19, 17, LinkKind::Fs)] };
        assert!(verify_fc_chain(&a, &pos, &fs));
        let fs2 = FcChain { source: pc(63), links: vec![link(63, 8, 8, LinkKind::Fs)] };
        assert!(verify_fc_chain(&a, &pos, &fs2));
        let broken = FcChain { source: pc(29), links: vec![ChainLink { via: 0, ..link(29, 19, 17, LinkKind::Fs) }] };
        assert!(!verify_fc_chain(&a, &pos, &broken));
        let uc = FcChain { source: pc(47), links: vec![link(47, 29, 13, LinkKind::Uc)] };
        assert!(verify_fc_chain(&a, &pos, &uc));
    }

    #[test]
    fn printed_chain_cut_and_hall() {
        let a = s_prime();
        let single = vec![FcChain { source: pc(29), links: vec![link(29, 19, 17, LinkKind::Fs)] }];
        assert!(fc_chain_cut(&a, &[pc(29)], &[pc(17)], &single).is_ok());
        let two = vec![
            FcChain { source: pc(29), links: vec![link(29, 19, 17, LinkKind::Fs)] },
            FcChain { source: pc(61), links: vec![link(61, 19, 17, LinkKind::Fs)] },
        ];
        match fc_chain_cut(&a, &[pc(29), pc(61)], &[pc(17)], &two) {
            Err(ChainCutError::HallViolation(t)) => assert_eq!(t.len(), 2),
            other => panic!("{other:?}"),
        }
        assert_eq!(fc_chain_cut(&a, &[1], &[1], &[]), Err(ChainCutError::Overlap(1)));
    }

    #[test]
    fn submask_enumeration() {
        assert_eq!(submasks(0b101).collect::<Vec<_>>(), vec![0, 1, 4, 5]);
        assert_eq!(submasks(0).collect::<Vec<_>>(), vec![0]);
    }
}
