//! Countable abelian groups of the form `ℤ^r ⊕ ⊕ ℤ/d_i ⊕ ⊕_{k∈ℕ} ℤ/q_{k mod m}`
//! and their finitely supported elements.
//!
//! Infinite order is written `0` throughout, so that `G[0] = G` and the
//! order of a free element is `0`.

mod snf;
mod subgroup;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, lcm};
use crate::{Error, Result};

pub use snf::smith_normal_form;
pub use subgroup::{n_torsion, proper_divisors, scale_group, CyclicSub, FreePart, ProperDivisors, SubgroupSpec};

/// A generator (coordinate) of the group.
///
/// The derived order is the canonical generator order used by enumeration:
/// free generators, then the finite part, then the tail.
///
/// Serialized as its display form `z3`, `f0`, `e12`, which also makes it
/// usable as a JSON map key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Coord {
    Free(usize),
    Finite(usize),
    Tail(u64),
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coord::Free(i) => write!(f, "z{i}"),
            Coord::Finite(i) => write!(f, "f{i}"),
            Coord::Tail(k) => write!(f, "e{k}"),
        }
    }
}

impl core::str::FromStr for Coord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidElement(format!("not a coordinate: {s:?}"));
        let (head, idx) = s.split_at(s.char_indices().nth(1).map_or(s.len(), |(i, _)| i));
        let idx: u64 = idx.parse().map_err(|_| bad())?;
        let small = || usize::try_from(idx).map_err(|_| bad());
        match head {
            "z" => Ok(Coord::Free(small()?)),
            "f" => Ok(Coord::Finite(small()?)),
            "e" => Ok(Coord::Tail(idx)),
            _ => Err(bad()),
        }
    }
}

impl From<Coord> for String {
    fn from(c: Coord) -> String {
        alloc::string::ToString::to_string(&c)
    }
}

impl TryFrom<String> for Coord {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    #[serde(default)]
    free_rank: usize,
    #[serde(default)]
    finite_orders: Vec<u64>,
    #[serde(default)]
    tail_pattern: Vec<u64>,
}

impl TryFrom<RawGroup> for GroupDescriptor {
    type Error = Error;

    fn try_from(raw: RawGroup) -> Result<Self> {
        GroupDescriptor::new(raw.free_rank, raw.finite_orders, raw.tail_pattern)
    }
}

/// `ℤ^free_rank ⊕ ⊕_i ℤ/finite_orders[i] ⊕ ⊕_{k∈ℕ} ℤ/tail_pattern[k mod m]`.
///
/// The finite part is kept as an invariant-factor chain `d_1 | d_2 | …`, so
/// two descriptors are equal exactly when they describe isomorphic finite
/// parts with the same free rank and tail pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawGroup")]
pub struct GroupDescriptor {
    free_rank: usize,
    finite_orders: Vec<u64>,
    tail_pattern: Vec<u64>,
}

impl GroupDescriptor {
    pub fn new(free_rank: usize, finite_orders: Vec<u64>, tail_pattern: Vec<u64>) -> Result<Self> {
        if let Some(&q) = finite_orders.iter().chain(&tail_pattern).find(|&&q| q < 2) {
            return Err(Error::InvalidGroup(format!("cyclic order {q} is below 2")));
        }
        Ok(GroupDescriptor {
            free_rank,
            finite_orders: invariant_factors(&finite_orders),
            tail_pattern,
        })
    }

    /// `ℤ^r`.
    pub fn free(rank: usize) -> Self {
        GroupDescriptor { free_rank: rank, finite_orders: Vec::new(), tail_pattern: Vec::new() }
    }

    /// `⊕_ω ℤ/q` with period-one tail.
    pub fn tail(q: u64) -> Result<Self> {
        GroupDescriptor::new(0, Vec::new(), alloc::vec![q])
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn finite_orders(&self) -> &[u64] {
        &self.finite_orders
    }

    pub fn tail_pattern(&self) -> &[u64] {
        &self.tail_pattern
    }

    /// Length of the tail pattern (0 when there is no tail).
    pub fn tail_period(&self) -> u64 {
        self.tail_pattern.len() as u64
    }

    pub fn has_tail(&self) -> bool {
        !self.tail_pattern.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0 && self.tail_pattern.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.free_rank == 0
    }

    /// Number of elements when finite.
    pub fn order(&self) -> Option<u64> {
        self.is_finite().then(|| self.finite_orders.iter().product())
    }

    /// lcm of all cyclic orders (1 when there are none).
    pub fn torsion_exponent(&self) -> u64 {
        self.finite_orders
            .iter()
            .chain(&self.tail_pattern)
            .fold(1, |acc, &q| lcm(acc, q))
    }

    /// Least `n ≥ 1` with `nG = 0`, or `0` when `G` is unbounded.
    pub fn exponent(&self) -> u64 {
        if self.free_rank > 0 {
            0
        } else {
            self.torsion_exponent()
        }
    }

    /// All distinct cyclic orders occurring in the group.
    pub(crate) fn cyclic_orders(&self) -> impl Iterator<Item = u64> + '_ {
        self.finite_orders.iter().chain(&self.tail_pattern).copied()
    }

    /// Order of the cyclic coordinate, `0` for a free one.
    pub fn coord_order(&self, c: Coord) -> Result<u64> {
        match c {
            Coord::Free(i) if i < self.free_rank => Ok(0),
            Coord::Finite(i) if i < self.finite_orders.len() => Ok(self.finite_orders[i]),
            Coord::Tail(k) if self.has_tail() => {
                Ok(self.tail_pattern[(k % self.tail_period()) as usize])
            }
            _ => Err(Error::InvalidElement(format!("coordinate {c} does not exist"))),
        }
    }

    /// Builds an element from `(coordinate, integer)` pairs, reducing residues.
    /// Repeated coordinates are summed.
    pub fn element(&self, coords: &[(Coord, i64)]) -> Result<Element> {
        let mut x = Element::zero();
        for &(c, v) in coords {
            let q = self.coord_order(c)?;
            let cur = x.get(c);
            x.set_reduced(c, cur.checked_add(v).expect("coordinate overflow"), q);
        }
        Ok(x)
    }

    /// Checks that every coordinate exists and every residue is reduced.
    pub fn validate(&self, x: &Element) -> Result<()> {
        for (c, v) in x.coords() {
            let q = self.coord_order(c)?;
            if v == 0 || (q > 0 && (v < 0 || v as u64 >= q)) {
                return Err(Error::InvalidElement(format!(
                    "value {v} at {c} is not a reduced nonzero residue mod {q}"
                )));
            }
        }
        Ok(())
    }

    pub fn add(&self, x: &Element, y: &Element) -> Element {
        self.combine(x, 1, y)
    }

    pub fn sub(&self, x: &Element, y: &Element) -> Element {
        self.combine(x, -1, y)
    }

    pub fn neg(&self, x: &Element) -> Element {
        self.scale(-1, x)
    }

    /// `x + k·y`.
    pub fn combine(&self, x: &Element, k: i64, y: &Element) -> Element {
        let mut out = x.clone();
        for (c, v) in y.coords() {
            let q = self.coord_order(c).expect("element not valid in group");
            let prod = v.checked_mul(k).expect("coordinate overflow");
            let sum = out.get(c).checked_add(prod).expect("coordinate overflow");
            out.set_reduced(c, sum, q);
        }
        out
    }

    /// `k·x`.
    pub fn scale(&self, k: i64, x: &Element) -> Element {
        self.combine(&Element::zero(), k, x)
    }

    /// Least `n ≥ 1` with `n·x = 0`, or `0` if `x` has infinite order.
    pub fn element_order(&self, x: &Element) -> Result<u64> {
        self.validate(x)?;
        Ok(self.order_unchecked(x))
    }

    pub(crate) fn order_unchecked(&self, x: &Element) -> u64 {
        if !x.free.is_empty() {
            return 0;
        }
        x.coords().fold(1, |acc, (c, v)| {
            let q = self.coord_order(c).expect("element not valid in group");
            lcm(acc, q / gcd(v as u64, q))
        })
    }

    /// Smallest tail index not below `from` that starts a tail period.
    pub fn align_up(&self, from: u64) -> u64 {
        let m = self.tail_period().max(1);
        from.div_ceil(m) * m
    }

    /// The generators in canonical order, truncated to the first `count`.
    pub fn generators(&self, count: usize) -> Vec<Coord> {
        let mut out = Vec::new();
        out.extend((0..self.free_rank).map(Coord::Free));
        out.extend((0..self.finite_orders.len()).map(Coord::Finite));
        out.truncate(count);
        if self.has_tail() {
            let mut k = 0u64;
            while out.len() < count {
                out.push(Coord::Tail(k));
                k += 1;
            }
        }
        out
    }

    fn generator_count(&self) -> Option<usize> {
        (!self.has_tail()).then(|| self.free_rank + self.finite_orders.len())
    }

    /// First `n` elements of the canonical enumeration of `G`.
    ///
    /// Level `h` holds the elements supported on the first `h` generators with
    /// free coefficients in `[-h, h]`; each level lists its new elements in
    /// `Element` order.
    pub fn enumerate(&self, n: usize) -> Vec<Element> {
        let mut out: Vec<Element> = Vec::new();
        if n == 0 {
            return out;
        }
        out.push(Element::zero());
        let mut h = 1usize;
        while out.len() < n {
            let gens = self.generators(h);
            if let Some(total) = self.generator_count() {
                if h > total && self.free_rank == 0 {
                    break;
                }
            }
            let fresh = self.level(&gens, h as i64);
            let prev_gens = h - 1;
            let mut new: Vec<Element> = fresh
                .into_iter()
                .filter(|x| {
                    x.coords().any(|(c, v)| {
                        let pos = gens.iter().position(|g| *g == c).unwrap_or(usize::MAX);
                        pos >= prev_gens || (matches!(c, Coord::Free(_)) && v.abs() == h as i64)
                    })
                })
                .collect();
            new.sort();
            for x in new {
                if out.len() == n {
                    break;
                }
                out.push(x);
            }
            h += 1;
        }
        out
    }

    fn level(&self, gens: &[Coord], h: i64) -> Vec<Element> {
        let mut acc = alloc::vec![Element::zero()];
        for &c in gens {
            let q = self.coord_order(c).expect("generator exists");
            let values: Vec<i64> = if q == 0 { (-h..=h).collect() } else { (0..q as i64).collect() };
            let mut next = Vec::with_capacity(acc.len() * values.len());
            for x in &acc {
                for &v in &values {
                    let mut y = x.clone();
                    y.set_reduced(c, v, q);
                    next.push(y);
                }
            }
            acc = next;
        }
        acc
    }
}

/// Computes the invariant-factor chain of `⊕ ℤ/d_i`, dropping trivial factors.
fn invariant_factors(orders: &[u64]) -> Vec<u64> {
    let n = orders.len();
    let mut m = alloc::vec![alloc::vec![0i64; n]; n];
    for (i, &d) in orders.iter().enumerate() {
        m[i][i] = i64::try_from(d).expect("cyclic order too large");
    }
    smith_normal_form(&m).into_iter().filter(|&t| t > 1).collect()
}

/// Sparse index that accepts both JSON string keys and integers; buffered
/// (internally tagged) deserialization hands keys over as strings.
#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Index(u64);

impl<'de> Deserialize<'de> for Index {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Index;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a non-negative index")
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> core::result::Result<Index, E> {
                Ok(Index(v))
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> core::result::Result<Index, E> {
                v.parse().map(Index).map_err(|_| E::custom(format!("bad index {v:?}")))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawElement {
    #[serde(default)]
    free: BTreeMap<Index, i64>,
    #[serde(default)]
    finite: BTreeMap<Index, u64>,
    #[serde(default)]
    tail: BTreeMap<Index, u64>,
}

impl From<RawElement> for Element {
    fn from(raw: RawElement) -> Self {
        Element {
            free: raw.free.into_iter().filter(|(_, v)| *v != 0).map(|(k, v)| (k.0 as usize, v)).collect(),
            finite: raw.finite.into_iter().filter(|(_, v)| *v != 0).map(|(k, v)| (k.0 as usize, v)).collect(),
            tail: raw.tail.into_iter().filter(|(_, v)| *v != 0).map(|(k, v)| (k.0, v)).collect(),
        }
    }
}

/// A finitely supported group element in canonical form.
///
/// Residues are reduced into `[0, q)` and zero entries are never stored, so
/// structural equality is equality in the group. Validity against a concrete
/// group is checked by [`GroupDescriptor::validate`].
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "RawElement")]
pub struct Element {
    free: BTreeMap<usize, i64>,
    finite: BTreeMap<usize, u64>,
    tail: BTreeMap<u64, u64>,
}

impl Element {
    pub fn zero() -> Self {
        Element::default()
    }

    pub fn is_zero(&self) -> bool {
        self.free.is_empty() && self.finite.is_empty() && self.tail.is_empty()
    }

    /// Value at a coordinate (residues as non-negative integers).
    pub fn get(&self, c: Coord) -> i64 {
        match c {
            Coord::Free(i) => self.free.get(&i).copied().unwrap_or(0),
            Coord::Finite(i) => self.finite.get(&i).map_or(0, |&v| v as i64),
            Coord::Tail(k) => self.tail.get(&k).map_or(0, |&v| v as i64),
        }
    }

    /// Nonzero coordinates in canonical generator order.
    pub fn coords(&self) -> impl Iterator<Item = (Coord, i64)> + '_ {
        self.free
            .iter()
            .map(|(&i, &v)| (Coord::Free(i), v))
            .chain(self.finite.iter().map(|(&i, &v)| (Coord::Finite(i), v as i64)))
            .chain(self.tail.iter().map(|(&k, &v)| (Coord::Tail(k), v as i64)))
    }

    pub fn support(&self) -> BTreeSet<Coord> {
        self.coords().map(|(c, _)| c).collect()
    }

    pub fn has_free_part(&self) -> bool {
        !self.free.is_empty()
    }

    /// True if only tail coordinates are nonzero.
    pub fn is_tail_only(&self) -> bool {
        self.free.is_empty() && self.finite.is_empty()
    }

    pub fn max_tail_index(&self) -> Option<u64> {
        self.tail.keys().next_back().copied()
    }

    pub fn min_tail_index(&self) -> Option<u64> {
        self.tail.keys().next().copied()
    }

    /// Moves every tail coordinate up by `offset`.
    pub fn shift_tail(&self, offset: u64) -> Element {
        Element {
            free: self.free.clone(),
            finite: self.finite.clone(),
            tail: self.tail.iter().map(|(&k, &v)| (k + offset, v)).collect(),
        }
    }

    /// The part of `self` supported on coordinates satisfying `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(Coord) -> bool) -> Element {
        Element {
            free: self.free.iter().filter(|(&i, _)| keep(Coord::Free(i))).map(|(&i, &v)| (i, v)).collect(),
            finite: self.finite.iter().filter(|(&i, _)| keep(Coord::Finite(i))).map(|(&i, &v)| (i, v)).collect(),
            tail: self.tail.iter().filter(|(&k, _)| keep(Coord::Tail(k))).map(|(&k, &v)| (k, v)).collect(),
        }
    }

    /// Writes `v` at `c`, reducing mod `q` (`q = 0`: free, no reduction).
    pub(crate) fn set_reduced(&mut self, c: Coord, v: i64, q: u64) {
        let v = if q == 0 { v } else { v.rem_euclid(q as i64) };
        match c {
            Coord::Free(i) => {
                if v == 0 {
                    self.free.remove(&i);
                } else {
                    self.free.insert(i, v);
                }
            }
            Coord::Finite(i) => {
                if v == 0 {
                    self.finite.remove(&i);
                } else {
                    self.finite.insert(i, v as u64);
                }
            }
            Coord::Tail(k) => {
                if v == 0 {
                    self.tail.remove(&k);
                } else {
                    self.tail.insert(k, v as u64);
                }
            }
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (n, (c, v)) in self.coords().enumerate() {
            if n > 0 {
                f.write_str(if v < 0 { "-" } else { "+" })?;
            } else if v < 0 {
                f.write_str("-")?;
            }
            match v.abs() {
                1 => write!(f, "{c}")?,
                a => write!(f, "{a}{c}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn z_z6() -> GroupDescriptor {
        GroupDescriptor::new(1, alloc::vec![6], alloc::vec![]).unwrap()
    }

    #[test]
    fn finite_part_is_normalized() {
        let g = GroupDescriptor::new(0, alloc::vec![2, 3], alloc::vec![]).unwrap();
        assert_eq!(g.finite_orders(), &[6]);
        let h = GroupDescriptor::new(0, alloc::vec![6], alloc::vec![]).unwrap();
        assert_eq!(g, h);
        let k = GroupDescriptor::new(0, alloc::vec![4, 6], alloc::vec![]).unwrap();
        assert_eq!(k.finite_orders(), &[2, 12]);
        assert!(GroupDescriptor::new(0, alloc::vec![1], alloc::vec![]).is_err());
        assert!(GroupDescriptor::new(0, alloc::vec![], alloc::vec![0]).is_err());
    }

    #[test]
    fn exponent_convention() {
        assert_eq!(z_z6().exponent(), 0);
        let g = GroupDescriptor::new(0, alloc::vec![4], alloc::vec![6]).unwrap();
        assert_eq!(g.exponent(), 12);
        assert_eq!(GroupDescriptor::free(0).exponent(), 1);
    }

    #[test]
    fn element_orders_match_examples() {
        let g = z_z6();
        let x = g.element(&[(Coord::Finite(0), 3)]).unwrap();
        assert_eq!(g.element_order(&x).unwrap(), 2);
        let y = g.element(&[(Coord::Free(0), 1)]).unwrap();
        assert_eq!(g.element_order(&y).unwrap(), 0);
        let z6 = GroupDescriptor::new(0, alloc::vec![6], alloc::vec![]).unwrap();
        let four = z6.element(&[(Coord::Finite(0), 4)]).unwrap();
        assert_eq!(z6.element_order(&four).unwrap(), 3);
    }

    #[test]
    fn invalid_elements_are_rejected() {
        let g = z_z6();
        let bad: Element = serde_json::from_str(r#"{"finite": {"0": 7}}"#).unwrap();
        assert!(g.element_order(&bad).is_err());
        let missing: Element = serde_json::from_str(r#"{"tail": {"3": 1}}"#).unwrap();
        assert!(g.validate(&missing).is_err());
        assert!(g.element(&[(Coord::Free(1), 1)]).is_err());
    }

    #[test]
    fn arithmetic_reduces() {
        let g = GroupDescriptor::tail(4).unwrap();
        let e0 = g.element(&[(Coord::Tail(0), 1)]).unwrap();
        let three = g.scale(3, &e0);
        assert_eq!(three.get(Coord::Tail(0)), 3);
        assert!(g.add(&three, &e0).is_zero());
        assert_eq!(g.neg(&e0), three);
        assert_eq!(g.sub(&e0, &e0), Element::zero());
    }

    #[test]
    fn json_shape_and_round_trip() {
        let g = z_z6();
        let x = g.element(&[(Coord::Free(0), -2), (Coord::Finite(0), 5)]).unwrap();
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"free":{"0":-2},"finite":{"0":5},"tail":{}}"#);
        let back: Element = serde_json::from_str(&s).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
        let gs = serde_json::to_string(&g).unwrap();
        assert_eq!(gs, r#"{"free_rank":1,"finite_orders":[6],"tail_pattern":[]}"#);
        let g2: GroupDescriptor = serde_json::from_str(&gs).unwrap();
        assert_eq!(g2, g);
        assert!(serde_json::from_str::<GroupDescriptor>(r#"{"free_rank":1,"bogus":2}"#).is_err());
    }

    #[test]
    fn zero_entries_are_dropped_on_load() {
        let x: Element = serde_json::from_str(r#"{"free":{"0":0},"finite":{},"tail":{"2":0}}"#).unwrap();
        assert!(x.is_zero());
    }

    #[test]
    fn display() {
        let g = GroupDescriptor::tail(4).unwrap();
        let x = g.element(&[(Coord::Tail(0), 1), (Coord::Tail(3), 2)]).unwrap();
        assert_eq!(x.to_string(), "e0+2e3");
        assert_eq!(Element::zero().to_string(), "0");
    }

    #[test]
    fn enumeration_of_integers() {
        let g = GroupDescriptor::free(1);
        let xs = g.enumerate(5);
        let vals: Vec<i64> = xs.iter().map(|x| x.get(Coord::Free(0))).collect();
        assert_eq!(vals, [0, -1, 1, -2, 2]);
    }

    #[test]
    fn enumeration_is_injective_and_exhausts_finite_groups() {
        let g = GroupDescriptor::new(0, alloc::vec![2, 2], alloc::vec![]).unwrap();
        let xs = g.enumerate(100);
        assert_eq!(xs.len(), 4);
        let set: BTreeSet<_> = xs.iter().cloned().collect();
        assert_eq!(set.len(), 4);

        let t = GroupDescriptor::tail(2).unwrap();
        let ys = t.enumerate(64);
        let set: BTreeSet<_> = ys.iter().cloned().collect();
        assert_eq!(set.len(), 64);
    }
}
