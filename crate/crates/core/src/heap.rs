//! Finite heaps, stacks, and the bounded universe used by every semantic check.
//!
//! A heap is a finite partial map from positive locations to integer values.
//! Enumeration of heaps and environments is bounded by a [`Universe`]; runtime
//! heaps produced by the interpreter are not clipped to the universe.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::HeapError;

pub type Loc = i64;
pub type Val = i64;

/// Finite partial map from positive locations to values. The `BTreeMap`
/// representation is canonical, so structural equality is map equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Heap(BTreeMap<Loc, Val>);

impl Heap {
    pub fn empty() -> Heap {
        Heap(BTreeMap::new())
    }

    pub fn singleton(loc: Loc, val: Val) -> Heap {
        assert!(loc >= 1, "heap locations are positive");
        let mut m = BTreeMap::new();
        m.insert(loc, val);
        Heap(m)
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Loc, Val)>) -> Result<Heap, HeapError> {
        let mut m = BTreeMap::new();
        for (loc, val) in pairs {
            if loc < 1 {
                return Err(HeapError::NonPositiveLocation(loc));
            }
            if m.insert(loc, val).is_some() {
                return Err(HeapError::DuplicateLocation(loc));
            }
        }
        Ok(Heap(m))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, loc: Loc) -> bool {
        self.0.contains_key(&loc)
    }

    pub fn get(&self, loc: Loc) -> Option<Val> {
        self.0.get(&loc).copied()
    }

    pub fn dom(&self) -> impl Iterator<Item = Loc> + '_ {
        self.0.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Loc, Val)> + '_ {
        self.0.iter().map(|(k, v)| (*k, *v))
    }

    /// `h[m -> v]`, defined only when `m` is already allocated.
    pub fn update(&self, loc: Loc, val: Val) -> Option<Heap> {
        if !self.contains(loc) {
            return None;
        }
        let mut m = self.0.clone();
        m.insert(loc, val);
        Some(Heap(m))
    }

    /// `h[m -> undef]`: removes the cell.
    pub fn remove(&self, loc: Loc) -> Option<Heap> {
        if !self.contains(loc) {
            return None;
        }
        let mut m = self.0.clone();
        m.remove(&loc);
        Some(Heap(m))
    }

    /// Extends with a fresh cell; the location must not be allocated yet.
    pub fn insert_fresh(&self, loc: Loc, val: Val) -> Option<Heap> {
        if self.contains(loc) || loc < 1 {
            return None;
        }
        let mut m = self.0.clone();
        m.insert(loc, val);
        Some(Heap(m))
    }

    /// Restriction of the heap to a subset of its domain.
    pub fn restrict(&self, keys: &BTreeSet<Loc>) -> Heap {
        Heap(
            self.0
                .iter()
                .filter(|(k, _)| keys.contains(k))
                .map(|(k, v)| (*k, *v))
                .collect(),
        )
    }

    /// The disjointness predicate `h # h2`.
    pub fn disjoint(&self, other: &Heap) -> bool {
        if self.len() > other.len() {
            return other.disjoint(self);
        }
        self.0.keys().all(|k| !other.0.contains_key(k))
    }

    /// The combined heap `h . h2`, defined only for disjoint heaps.
    pub fn combine(&self, other: &Heap) -> Result<Heap, HeapError> {
        if !self.disjoint(other) {
            let clash = self
                .0
                .keys()
                .find(|k| other.0.contains_key(k))
                .copied()
                .unwrap_or(0);
            return Err(HeapError::OverlappingCombine(clash));
        }
        let mut m = self.0.clone();
        for (k, v) in &other.0 {
            m.insert(*k, *v);
        }
        Ok(Heap(m))
    }

    /// All restrictions of the heap to subsets of its domain.
    pub fn subheaps(&self) -> Vec<Heap> {
        let keys: Vec<Loc> = self.0.keys().copied().collect();
        let mut out = Vec::with_capacity(1 << keys.len());
        for mask in 0u64..(1u64 << keys.len()) {
            let subset: BTreeSet<Loc> = keys
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, k)| *k)
                .collect();
            out.push(self.restrict(&subset));
        }
        out
    }

    /// All ways of splitting the heap into two disjoint parts `(h1, h2)`
    /// with `h1 . h2 = h`.
    pub fn splits(&self) -> Vec<(Heap, Heap)> {
        let keys: Vec<Loc> = self.0.keys().copied().collect();
        let mut out = Vec::with_capacity(1 << keys.len());
        for mask in 0u64..(1u64 << keys.len()) {
            let left: BTreeSet<Loc> = keys
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, k)| *k)
                .collect();
            let right: BTreeSet<Loc> = keys.iter().filter(|k| !left.contains(k)).copied().collect();
            out.push((self.restrict(&left), self.restrict(&right)));
        }
        out
    }

    /// True when the heap lies inside the enumerable space of `u`.
    pub fn within(&self, u: &Universe) -> bool {
        self.0
            .iter()
            .all(|(k, v)| *k >= 1 && *k <= u.loc_max && *v >= u.val_min && *v <= u.val_max)
    }
}

impl fmt::Display for Heap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}->{v}")?;
        }
        write!(f, "]")
    }
}

/// Parses a heap literal: `[]` or `[1->5, 2->0]`.
pub fn parse_heap_literal(s: &str) -> Result<Heap, HeapError> {
    let t = s.trim();
    let inner = t
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| HeapError::BadLiteral(s.to_string()))?;
    let inner = inner.trim();
    if inner.is_empty() {
        return Ok(Heap::empty());
    }
    let mut pairs = Vec::new();
    for part in inner.split(',') {
        let (k, v) = part
            .split_once("->")
            .ok_or_else(|| HeapError::BadLiteral(s.to_string()))?;
        let k: Loc = k
            .trim()
            .parse()
            .map_err(|_| HeapError::BadLiteral(s.to_string()))?;
        let v: Val = v
            .trim()
            .parse()
            .map_err(|_| HeapError::BadLiteral(s.to_string()))?;
        pairs.push((k, v));
    }
    Heap::from_pairs(pairs)
}

/// Total map from a finite variable set to values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Env(BTreeMap<String, Val>);

impl Env {
    pub fn empty() -> Env {
        Env(BTreeMap::new())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, Val)>) -> Env {
        Env(pairs.into_iter().collect())
    }

    pub fn get(&self, var: &str) -> Option<Val> {
        self.0.get(var).copied()
    }

    /// `eta[i -> n]`.
    pub fn bind(&self, var: &str, val: Val) -> Env {
        let mut m = self.0.clone();
        m.insert(var.to_string(), val);
        Env(m)
    }

    pub fn dom(&self) -> impl Iterator<Item = &str> + '_ {
        self.0.keys().map(|s| s.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Val)> + '_ {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl fmt::Display for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Parses an environment literal: empty string, or `i=1, j=2`.
pub fn parse_env_literal(s: &str) -> Result<Env, HeapError> {
    let t = s.trim();
    if t.is_empty() {
        return Ok(Env::empty());
    }
    let mut pairs = Vec::new();
    for part in t.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| HeapError::BadLiteral(s.to_string()))?;
        let v: Val = v
            .trim()
            .parse()
            .map_err(|_| HeapError::BadLiteral(s.to_string()))?;
        pairs.push((k.trim().to_string(), v));
    }
    Ok(Env::from_pairs(pairs))
}

/// Bounds for enumeration: locations range over `1..=loc_max`, stack and
/// quantifier values over `val_min..=val_max`, and fixpoint iteration is
/// cut off after `fix_budget` rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Universe {
    pub loc_max: Loc,
    pub val_min: Val,
    pub val_max: Val,
    pub fix_budget: u32,
    /// Refuse enumerations larger than this many heaps.
    pub cap: u64,
}

impl Universe {
    pub fn new(loc_max: Loc, val_min: Val, val_max: Val, fix_budget: u32) -> Result<Universe, HeapError> {
        let u = Universe {
            loc_max,
            val_min,
            val_max,
            fix_budget,
            cap: DEFAULT_CAP,
        };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<(), HeapError> {
        if self.loc_max < 1 {
            return Err(HeapError::BadUniverse("loc_max must be at least 1".into()));
        }
        if !(self.val_min <= 0 && 0 <= self.val_max) {
            return Err(HeapError::BadUniverse(
                "value range must contain 0".into(),
            ));
        }
        if self.val_min > 1 || self.val_max < self.loc_max {
            return Err(HeapError::BadUniverse(
                "locations 1..loc_max must be expressible values".into(),
            ));
        }
        Ok(())
    }

    pub fn vals(&self) -> impl Iterator<Item = Val> + Clone {
        self.val_min..=self.val_max
    }

    pub fn locs(&self) -> impl Iterator<Item = Loc> + Clone {
        1..=self.loc_max
    }

    pub fn val_count(&self) -> u64 {
        (self.val_max - self.val_min + 1) as u64
    }

    /// Closed-form count of enumerable heaps: every location is either
    /// absent or carries one of the `k` values, so `(k+1)^loc_max`.
    pub fn heap_count(&self) -> u64 {
        (self.val_count() + 1).pow(self.loc_max as u32)
    }

    /// All heaps with domain inside `1..=loc_max` and range inside the value
    /// interval, in a fixed order.
    pub fn enumerate_heaps(&self) -> Result<Vec<Heap>, HeapError> {
        let total = self.heap_count();
        if total > self.cap {
            return Err(HeapError::CapExceeded { need: total, cap: self.cap });
        }
        let mut out = vec![Heap::empty()];
        for loc in self.locs() {
            let mut next = Vec::with_capacity(out.len() * (self.val_count() as usize + 1));
            for h in &out {
                next.push(h.clone());
                for v in self.vals() {
                    next.push(h.insert_fresh(loc, v).expect("fresh location"));
                }
            }
            out = next;
        }
        Ok(out)
    }

    /// All total maps from `vars` to the value interval.
    pub fn enumerate_envs(&self, vars: &BTreeSet<String>) -> Result<Vec<Env>, HeapError> {
        let total = self.val_count().checked_pow(vars.len() as u32).unwrap_or(u64::MAX);
        if total > self.cap {
            return Err(HeapError::CapExceeded { need: total, cap: self.cap });
        }
        let mut out = vec![Env::empty()];
        for var in vars {
            let mut next = Vec::with_capacity(out.len() * self.val_count() as usize);
            for env in &out {
                for v in self.vals() {
                    next.push(env.bind(var, v));
                }
            }
            out = next;
        }
        Ok(out)
    }

    /// All `(h, h0)` pairs of disjoint enumerable heaps whose combination is
    /// still enumerable.
    pub fn enumerate_disjoint_pairs(&self) -> Result<Vec<(Heap, Heap)>, HeapError> {
        let heaps = self.enumerate_heaps()?;
        let mut out = Vec::new();
        for h in &heaps {
            for h0 in &heaps {
                if h.disjoint(h0) {
                    out.push((h.clone(), h0.clone()));
                }
            }
        }
        Ok(out)
    }
}

const DEFAULT_CAP: u64 = 2_000_000;

impl Default for Universe {
    fn default() -> Universe {
        Universe {
            loc_max: 3,
            val_min: 0,
            val_max: 3,
            fix_budget: 16,
            cap: DEFAULT_CAP,
        }
    }
}

/// A finite set of result heaps plus a flag for the `wrong` outcome.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OutcomeSet {
    pub heaps: BTreeSet<Heap>,
    pub wrong: bool,
}

impl OutcomeSet {
    pub fn empty() -> OutcomeSet {
        OutcomeSet::default()
    }

    pub fn just(h: Heap) -> OutcomeSet {
        let mut s = OutcomeSet::default();
        s.heaps.insert(h);
        s
    }

    pub fn wrong() -> OutcomeSet {
        OutcomeSet { heaps: BTreeSet::new(), wrong: true }
    }

    pub fn union_with(&mut self, other: &OutcomeSet) {
        self.wrong |= other.wrong;
        self.heaps.extend(other.heaps.iter().cloned());
    }

    pub fn is_empty(&self) -> bool {
        self.heaps.is_empty() && !self.wrong
    }

    /// Pointwise inclusion, the order on outcome sets.
    pub fn subset_of(&self, other: &OutcomeSet) -> bool {
        (!self.wrong || other.wrong) && self.heaps.is_subset(&other.heaps)
    }
}

impl fmt::Display for OutcomeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for h in &self.heaps {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{h}")?;
            first = false;
        }
        if self.wrong {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "WRONG")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(pairs: &[(Loc, Val)]) -> Heap {
        Heap::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn disjointness() {
        assert!(Heap::empty().disjoint(&h(&[(1, 5)])));
        assert!(!h(&[(1, 5)]).disjoint(&h(&[(1, 5)])));
        assert!(h(&[(1, 1)]).disjoint(&h(&[(2, 0)])));
    }

    #[test]
    fn combine_union_and_unit() {
        assert_eq!(Heap::empty().combine(&h(&[(2, 0)])).unwrap(), h(&[(2, 0)]));
        assert_eq!(h(&[(1, 1)]).combine(&h(&[(2, 0)])).unwrap(), h(&[(1, 1), (2, 0)]));
        assert!(h(&[(1, 1)]).combine(&h(&[(1, 2)])).is_err());
    }

    #[test]
    fn heap_enumeration_counts() {
        // locMax=1, vals {0} -> { [], [1->0] }
        let u = Universe { loc_max: 1, val_min: 0, val_max: 0, fix_budget: 4, cap: 1 << 20 };
        let hs = u.enumerate_heaps().unwrap();
        assert_eq!(hs.len(), 2);
        assert!(hs.contains(&Heap::empty()));
        assert!(hs.contains(&h(&[(1, 0)])));

        // locMax=2, vals {0,1} -> 9 heaps = 1 + 2*2 + 4
        let u = Universe { loc_max: 2, val_min: 0, val_max: 1, fix_budget: 4, cap: 1 << 20 };
        assert_eq!(u.enumerate_heaps().unwrap().len(), 9);
        assert_eq!(u.heap_count(), 9);

        // locMax=3, vals {0,1,2} -> 64 heaps = 1 + 3*3 + 3*9 + 27
        let u = Universe { loc_max: 3, val_min: 0, val_max: 2, fix_budget: 4, cap: 1 << 20 };
        assert_eq!(u.enumerate_heaps().unwrap().len(), 64);
        assert_eq!(u.heap_count(), 64);
    }

    #[test]
    fn env_enumeration() {
        let u = Universe { loc_max: 2, val_min: 0, val_max: 1, fix_budget: 4, cap: 1 << 20 };
        assert_eq!(u.enumerate_envs(&BTreeSet::new()).unwrap(), vec![Env::empty()]);
        let one: BTreeSet<String> = ["i".to_string()].into();
        assert_eq!(u.enumerate_envs(&one).unwrap().len(), 2);
        let u = Universe { loc_max: 2, val_min: 0, val_max: 2, fix_budget: 4, cap: 1 << 20 };
        let two: BTreeSet<String> = ["i".to_string(), "j".to_string()].into();
        assert_eq!(u.enumerate_envs(&two).unwrap().len(), 9);
    }

    #[test]
    fn subheap_enumeration() {
        assert_eq!(Heap::empty().subheaps(), vec![Heap::empty()]);
        let s = h(&[(1, 0)]).subheaps();
        assert_eq!(s.len(), 2);
        assert_eq!(h(&[(1, 0), (2, 1)]).subheaps().len(), 4);
    }

    #[test]
    fn cap_refusal() {
        let u = Universe { loc_max: 3, val_min: 0, val_max: 3, fix_budget: 4, cap: 10 };
        assert!(matches!(u.enumerate_heaps(), Err(HeapError::CapExceeded { .. })));
    }

    #[test]
    fn heap_literals_round_trip() {
        for s in ["[]", "[1->5]", "[1->5, 2->0]", "[1->-3, 3->0]"] {
            let h = parse_heap_literal(s).unwrap();
            assert_eq!(h.to_string(), s);
        }
        assert!(parse_heap_literal("[0->1]").is_err());
        assert!(parse_heap_literal("[1->1, 1->2]").is_err());
    }

    #[test]
    fn universe_invariants() {
        assert!(Universe::new(0, 0, 3, 4).is_err());
        assert!(Universe::new(3, 1, 3, 4).is_err());
        assert!(Universe::new(3, 0, 2, 4).is_err()); // locations not expressible
        assert!(Universe::new(3, -1, 3, 4).is_ok());
    }
}
