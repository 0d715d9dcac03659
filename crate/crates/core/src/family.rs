//! Bit-encoded set families: union closure, the pairwise-union product,
//! generators and element frequencies.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest supported ground-set size.
pub const MAX_GROUND: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("empty family")]
    EmptyFamily,
    #[error("ground size {0} outside 1..={MAX_GROUND}")]
    GroundSize(usize),
    #[error("ground-set mismatch: {0} vs {1}")]
    GroundMismatch(usize, usize),
    #[error("labels must be distinct and number {expected}, got {got}")]
    Labels { expected: usize, got: usize },
    #[error("mask {mask:#x} has bits outside a ground set of size {n}")]
    MaskOutOfRange { mask: u32, n: usize },
    #[error("element {element} outside ground set [{n}]")]
    ElementOutOfRange { element: usize, n: usize },
    #[error("family is not union-closed")]
    NotUnionClosed,
    #[error("family does not contain the empty set")]
    MissingEmptySet,
}

/// The ground set `[n]` with optional display labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundSet {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self, FamilyError> {
        if n == 0 || n > MAX_GROUND {
            return Err(FamilyError::GroundSize(n));
        }
        Ok(Self { n, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self, FamilyError> {
        let n = labels.len();
        if n == 0 || n > MAX_GROUND {
            return Err(FamilyError::GroundSize(n));
        }
        let distinct: BTreeSet<&String> = labels.iter().collect();
        if distinct.len() != n {
            return Err(FamilyError::Labels { expected: n, got: distinct.len() });
        }
        Ok(Self { n, labels: Some(labels) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self, element: usize) -> String {
        match &self.labels {
            Some(l) => l[element - 1].clone(),
            None => element.to_string(),
        }
    }

    /// Mask of the full set `[n]`.
    pub fn full_mask(&self) -> u32 {
        full_mask(self.n)
    }

    /// Number of subsets of `[n]`.
    pub fn power_size(&self) -> usize {
        1usize << self.n
    }
}

pub fn full_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// A subset of `[n]`; element `i` is bit `i - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ElementSet(pub u32);

impl ElementSet {
    pub const EMPTY: ElementSet = ElementSet(0);

    pub fn from_elements<I: IntoIterator<Item = usize>>(elements: I) -> Self {
        let mut mask = 0u32;
        for e in elements {
            debug_assert!((1..=MAX_GROUND).contains(&e));
            mask |= 1 << (e - 1);
        }
        ElementSet(mask)
    }

    /// Parses a compact digit string such as `"1256"`; each char is one element.
    pub fn from_digits(s: &str) -> Option<Self> {
        let mut elements = Vec::new();
        for ch in s.chars() {
            elements.push(ch.to_digit(10).filter(|&d| d >= 1)? as usize);
        }
        Some(Self::from_elements(elements))
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn contains(self, element: usize) -> bool {
        element >= 1 && self.0 >> (element - 1) & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: ElementSet) -> ElementSet {
        ElementSet(self.0 | other.0)
    }

    pub fn is_subset(self, other: ElementSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn with(self, element: usize) -> ElementSet {
        ElementSet(self.0 | 1 << (element - 1))
    }

    pub fn elements(self) -> Vec<usize> {
        (1..=32).filter(|&i| self.contains(i)).collect()
    }
}

impl fmt::Display for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self.elements().iter().map(|e| e.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Complemented column index: element `i` is present iff bit `n - i` of `j` is 0.
pub fn complement_column_to_mask(j: u32, n: usize) -> u32 {
    let mut mask = 0;
    for i in 1..=n {
        if j >> (n - i) & 1 == 0 {
            mask |= 1 << (i - 1);
        }
    }
    mask
}

pub fn mask_to_complement_column(mask: u32, n: usize) -> u32 {
    let mut j = 0;
    for i in 1..=n {
        if mask >> (i - 1) & 1 == 0 {
            j |= 1 << (n - i);
        }
    }
    j
}

/// Per-element membership counts: `counts[i - 1] = |F_i|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyVector {
    pub counts: Vec<u64>,
}

/// Duplicate-free family sorted by mask.
#[derive(Clone)]
pub struct SetFamily {
    ground: GroundSet,
    sets: Vec<ElementSet>,
    uc_status: OnceLock<bool>,
}

impl PartialEq for SetFamily {
    fn eq(&self, other: &Self) -> bool {
        self.ground.n == other.ground.n && self.sets == other.sets
    }
}

impl Eq for SetFamily {}

impl fmt::Debug for SetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SetFamily(n={}, {})", self.ground.n, self)
    }
}

impl fmt::Display for SetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sets.iter().map(|s| s.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl SetFamily {
    /// Builds a family from masks; duplicates are merged and order is canonical.
    pub fn from_masks<I: IntoIterator<Item = u32>>(n: usize, masks: I) -> Result<Self, FamilyError> {
        let ground = GroundSet::new(n)?;
        Self::with_ground(ground, masks.into_iter().map(ElementSet))
    }

    pub fn with_ground<I: IntoIterator<Item = ElementSet>>(
        ground: GroundSet,
        sets: I,
    ) -> Result<Self, FamilyError> {
        let full = ground.full_mask();
        let mut v: Vec<ElementSet> = Vec::new();
        for s in sets {
            if s.0 & !full != 0 {
                return Err(FamilyError::MaskOutOfRange { mask: s.0, n: ground.n });
            }
            v.push(s);
        }
        v.sort_unstable();
        v.dedup();
        Ok(Self { ground, sets: v, uc_status: OnceLock::new() })
    }

    /// Builds a family from element lists such as `[[1,2],[3]]`.
    pub fn from_element_lists(n: usize, lists: &[Vec<usize>]) -> Result<Self, FamilyError> {
        let ground = GroundSet::new(n)?;
        let mut sets = Vec::with_capacity(lists.len());
        for l in lists {
            for &e in l {
                if e == 0 || e > n {
                    return Err(FamilyError::ElementOutOfRange { element: e, n });
                }
            }
            sets.push(ElementSet::from_elements(l.iter().copied()));
        }
        Self::with_ground(ground, sets)
    }

    /// Builds a family from compact digit strings (`"empty"` or `""` for the empty set).
    pub fn from_digit_strings(n: usize, items: &[&str]) -> Result<Self, FamilyError> {
        let mut lists = Vec::new();
        for item in items {
            if *item == "empty" || item.is_empty() {
                lists.push(Vec::new());
            } else {
                let set = ElementSet::from_digits(item)
                    .ok_or(FamilyError::ElementOutOfRange { element: 0, n })?;
                lists.push(set.elements());
            }
        }
        Self::from_element_lists(n, &lists)
    }

    /// The full power set of `[n]`.
    pub fn power_set(n: usize) -> Result<Self, FamilyError> {
        Self::from_masks(n, 0..=full_mask(n))
    }

    /// All subsets of `[n]` avoiding the elements of `excluded`.
    pub fn power_set_avoiding(n: usize, excluded: ElementSet) -> Result<Self, FamilyError> {
        let allowed = full_mask(n) & !excluded.0;
        Self::from_masks(n, (0..=full_mask(n)).filter(|m| m & !allowed == 0))
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn n(&self) -> usize {
        self.ground.n
    }

    pub fn sets(&self) -> &[ElementSet] {
        &self.sets
    }

    pub fn masks(&self) -> impl Iterator<Item = u32> + '_ {
        self.sets.iter().map(|s| s.0)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn contains(&self, s: ElementSet) -> bool {
        self.sets.binary_search(&s).is_ok()
    }

    pub fn contains_empty(&self) -> bool {
        self.sets.first() == Some(&ElementSet::EMPTY)
    }

    /// Union of all members.
    pub fn union_all(&self) -> ElementSet {
        ElementSet(self.sets.iter().fold(0, |acc, s| acc | s.0))
    }

    /// Largest member when the family is union-closed.
    pub fn top(&self) -> Option<ElementSet> {
        self.sets.iter().copied().max_by_key(|s| (s.len(), s.0))
    }

    /// Membership indicator over all `2^n` masks.
    pub fn indicator(&self) -> Vec<bool> {
        let mut v = vec![false; self.ground.power_size()];
        for s in &self.sets {
            v[s.0 as usize] = true;
        }
        v
    }

    pub fn is_union_closed(&self) -> Result<bool, FamilyError> {
        if self.sets.is_empty() {
            return Err(FamilyError::EmptyFamily);
        }
        Ok(*self.uc_status.get_or_init(|| {
            let ind = self.indicator();
            self.sets.iter().enumerate().all(|(k, a)| {
                self.sets[k + 1..].iter().all(|b| ind[(a.0 | b.0) as usize])
            })
        }))
    }

    fn require_uc(&self) -> Result<(), FamilyError> {
        if self.is_union_closed()? {
            Ok(())
        } else {
            Err(FamilyError::NotUnionClosed)
        }
    }

    fn check_ground(&self, other: &SetFamily) -> Result<(), FamilyError> {
        if self.ground.n != other.ground.n {
            return Err(FamilyError::GroundMismatch(self.ground.n, other.ground.n));
        }
        Ok(())
    }

    /// `{a ∪ b : a ∈ self, b ∈ other}`.
    pub fn uplus(&self, other: &SetFamily) -> Result<SetFamily, FamilyError> {
        self.check_ground(other)?;
        let mut ind = vec![false; self.ground.power_size()];
        for a in &self.sets {
            for b in &other.sets {
                ind[(a.0 | b.0) as usize] = true;
            }
        }
        Ok(self.subfamily_from_indicator(&ind))
    }

    fn subfamily_from_indicator(&self, ind: &[bool]) -> SetFamily {
        let sets = ind
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(m, _)| ElementSet(m as u32))
            .collect();
        SetFamily { ground: self.ground.clone(), sets, uc_status: OnceLock::new() }
    }

    /// Smallest union-closed family containing `self`.
    pub fn union_closure(&self) -> Result<SetFamily, FamilyError> {
        if self.sets.is_empty() {
            return Err(FamilyError::EmptyFamily);
        }
        let mut ind = self.indicator();
        close_in_place(&mut ind, &[]);
        let out = self.subfamily_from_indicator(&ind);
        let _ = out.uc_status.set(true);
        Ok(out)
    }

    /// Smallest union-closed `F ⊇ self` with `F ⊎ a = F`.
    pub fn closure_with(&self, a: &SetFamily) -> Result<SetFamily, FamilyError> {
        self.check_ground(a)?;
        a.require_uc()?;
        if self.sets.is_empty() {
            return Err(FamilyError::EmptyFamily);
        }
        let mut ind = self.indicator();
        let generators: Vec<u32> = a.masks().collect();
        close_in_place(&mut ind, &generators);
        let out = self.subfamily_from_indicator(&ind);
        let _ = out.uc_status.set(true);
        Ok(out)
    }

    pub fn frequencies(&self) -> FrequencyVector {
        let n = self.ground.n;
        let mut counts = vec![0u64; n];
        for s in &self.sets {
            for (i, c) in counts.iter_mut().enumerate() {
                if s.0 >> i & 1 == 1 {
                    *c += 1;
                }
            }
        }
        FrequencyVector { counts }
    }

    /// Members that are not the union of the members strictly below them.
    pub fn minimal_generator(&self) -> Result<SetFamily, FamilyError> {
        self.require_uc()?;
        let keep: Vec<ElementSet> = self
            .sets
            .iter()
            .copied()
            .filter(|&f| {
                let below: Vec<&ElementSet> =
                    self.sets.iter().filter(|&&g| g != f && g.is_subset(f)).collect();
                below.is_empty() || below.iter().fold(0u32, |acc, g| acc | g.0) != f.0
            })
            .collect();
        Self::with_ground(self.ground.clone(), keep)
    }

    pub fn drop_empty(&self) -> SetFamily {
        let sets = self.sets.iter().copied().filter(|s| !s.is_empty()).collect();
        SetFamily { ground: self.ground.clone(), sets, uc_status: OnceLock::new() }
    }

    pub fn add_empty(&self) -> SetFamily {
        let mut sets = self.sets.clone();
        if !self.contains_empty() {
            sets.insert(0, ElementSet::EMPTY);
        }
        SetFamily { ground: self.ground.clone(), sets, uc_status: OnceLock::new() }
    }

    /// Returns a copy with `remove` replaced by `insert`.
    pub fn replace(&self, remove: ElementSet, insert: ElementSet) -> SetFamily {
        let sets = self.sets.iter().copied().filter(|&s| s != remove).chain([insert]);
        Self::with_ground(self.ground.clone(), sets).expect("masks already validated")
    }

    /// Element lists, for display and serialization.
    pub fn element_lists(&self) -> Vec<Vec<usize>> {
        self.sets.iter().map(|s| s.elements()).collect()
    }

    /// Relabels elements: element `i` becomes `perm[i - 1]`.
    pub fn permute(&self, perm: &[usize]) -> SetFamily {
        let sets = self.sets.iter().map(|s| permute_set(*s, perm));
        Self::with_ground(self.ground.clone(), sets).expect("permutation keeps the ground set")
    }
}

pub fn permute_set(s: ElementSet, perm: &[usize]) -> ElementSet {
    ElementSet::from_elements(s.elements().into_iter().map(|e| perm[e - 1]))
}

/// Closes an indicator under pairwise unions and under union with each generator.
pub(crate) fn close_in_place(ind: &mut [bool], generators: &[u32]) {
    let mut members: Vec<u32> =
        ind.iter().enumerate().filter(|(_, &b)| b).map(|(m, _)| m as u32).collect();
    let mut k = 0;
    while k < members.len() {
        let s = members[k];
        for &g in generators {
            let u = (s | g) as usize;
            if !ind[u] {
                ind[u] = true;
                members.push(u as u32);
            }
        }
        for t in 0..k {
            let u = (s | members[t]) as usize;
            if !ind[u] {
                ind[u] = true;
                members.push(u as u32);
            }
        }
        k += 1;
    }
}

#[derive(Serialize, Deserialize)]
struct FamilyRepr {
    ground: usize,
    sets: Vec<Vec<usize>>,
}

/// Serialized as its sorted element list.
impl Serialize for ElementSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.elements().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ElementSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let elements = Vec::<usize>::deserialize(deserializer)?;
        if elements.iter().any(|&e| e == 0 || e > MAX_GROUND) {
            return Err(serde::de::Error::custom("element out of range"));
        }
        Ok(ElementSet::from_elements(elements))
    }
}

impl Serialize for SetFamily {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        FamilyRepr { ground: self.ground.n, sets: self.element_lists() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SetFamily {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = FamilyRepr::deserialize(deserializer)?;
        SetFamily::from_element_lists(repr.ground, &repr.sets).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(n: usize, items: &[&str]) -> SetFamily {
        SetFamily::from_digit_strings(n, items).unwrap()
    }

    fn s_gen() -> SetFamily {
        fam(6, &["empty", "456", "134", "1256", "1234"])
    }

    #[test]
    fn union_closed_examples() {
        assert!(fam(3, &["empty"]).is_union_closed().unwrap());
        assert!(!fam(3, &["12", "23"]).is_union_closed().unwrap());
        let closed = s_gen().union_closure().unwrap();
        assert_eq!(closed.len(), 8);
        assert!(closed.is_union_closed().unwrap());
        let expected = fam(6, &["empty", "456", "134", "1256", "1234", "12456", "13456", "123456"]);
        assert_eq!(closed, expected);
        let empty = SetFamily::from_masks(3, []).unwrap();
        assert_eq!(empty.is_union_closed(), Err(FamilyError::EmptyFamily));
    }

    #[test]
    fn closure_of_three_triples() {
        let c = fam(4, &["123", "124", "134"]).union_closure().unwrap();
        assert_eq!(c, fam(4, &["123", "124", "134", "1234"]));
    }

    #[test]
    fn uplus_examples() {
        let a = fam(2, &["1"]);
        let b = fam(2, &["2"]);
        assert_eq!(a.uplus(&b).unwrap(), fam(2, &["12"]));
        let f = s_gen();
        assert_eq!(f.uplus(&fam(6, &["empty"])).unwrap(), f);
        assert!(a.uplus(&fam(3, &["1"])).is_err());
    }

    #[test]
    fn closure_with_examples() {
        let a = s_gen().union_closure().unwrap();
        assert_eq!(a.closure_with(&a).unwrap(), a);
        assert_eq!(fam(6, &["empty"]).closure_with(&a).unwrap(), a);
        let sp = fam(6, &["empty", "456", "134", "1256", "12345"]).union_closure().unwrap();
        let r = fam(6, &["5"]).closure_with(&sp).unwrap();
        assert!(r.is_union_closed().unwrap());
        assert_eq!(r.uplus(&sp).unwrap(), r);
        assert!(r.contains(ElementSet::from_elements([5])));
        assert_eq!(fam(3, &["1"]).closure_with(&fam(3, &["1", "2"])), Err(FamilyError::NotUnionClosed));
    }

    #[test]
    fn frequency_examples() {
        assert_eq!(fam(4, &["empty"]).frequencies().counts, vec![0; 4]);
        assert_eq!(SetFamily::power_set(5).unwrap().frequencies().counts, vec![16; 5]);
    }

    #[test]
    fn minimal_generator_examples() {
        assert_eq!(fam(3, &["empty"]).minimal_generator().unwrap(), fam(3, &["empty"]));
        let closed = s_gen().union_closure().unwrap();
        assert_eq!(closed.minimal_generator().unwrap(), s_gen());
        let p3 = SetFamily::power_set(3).unwrap();
        assert_eq!(p3.minimal_generator().unwrap(), fam(3, &["empty", "1", "2", "3"]));
        assert_eq!(fam(3, &["1", "2"]).minimal_generator(), Err(FamilyError::NotUnionClosed));
    }

    #[test]
    fn empty_set_toggles() {
        let d = fam(3, &["empty"]).drop_empty();
        assert!(d.is_empty());
        let closed = s_gen().union_closure().unwrap();
        assert_eq!(closed.drop_empty().add_empty(), closed);
    }

    #[test]
    fn complemented_columns_roundtrip() {
        for n in 1..=7 {
            for j in 0..(1u32 << n) {
                assert_eq!(mask_to_complement_column(complement_column_to_mask(j, n), n), j);
            }
        }
        assert_eq!(complement_column_to_mask(0, 6), 0b111111);
        assert_eq!(complement_column_to_mask(63, 6), 0);
        // column 15 = 001111 keeps elements 1 and 2
        assert_eq!(complement_column_to_mask(15, 6), 0b000011);
    }
}
