//! Zariski-closed sets and the closure and density procedures.
//!
//! Closed sets are kept in a normal form `F ∪ ⋃ (h + G[n])`: a finite set
//! plus finitely many cosets of torsion subgroups. Moduli are canonical (two
//! moduli giving the same `G[n]` are stored as the same number), no coset
//! sits inside another and no point of `F` lies in a coset.

mod closure;
mod oracle;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{divides, ext_gcd, gcd};
use crate::group::{Coord, Element, GroupDescriptor};

pub use closure::{is_zariski_dense, zariski_closure, DensityReport, DensityWitness};
pub use oracle::{closure_oracle_prefix, OracleConfig};

/// `rep + G[modulus]`.
/// `rep + G[modulus]`, ordered by `(modulus, rep)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coset {
    pub rep: Element,
    #[serde(rename = "mod")]
    pub modulus: u64,
}

impl Ord for Coset {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        (self.modulus, &self.rep).cmp(&(other.modulus, &other.rep))
    }
}

impl PartialOrd for Coset {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosedSet {
    pub finite: Vec<Element>,
    pub cosets: Vec<Coset>,
}

/// `x ∈ g + G[n]`, i.e. `n·(x − g) = 0`.
pub fn elementary_member(x: &Element, g: &Element, n: u64, grp: &GroupDescriptor) -> bool {
    in_torsion(grp, n, &grp.sub(x, g))
}

fn in_torsion(g: &GroupDescriptor, n: u64, x: &Element) -> bool {
    n == 0 || g.scale(n as i64, x).is_zero()
}

/// Congruence modulus of `G[n]` in coordinate `c`: the subgroup consists of
/// the multiples of the returned value (`0` means only zero).
fn coord_step(g: &GroupDescriptor, c: Coord, n: u64) -> u64 {
    match c {
        Coord::Free(_) => u64::from(n == 0),
        _ => {
            let q = g.coord_order(c).expect("element not valid in group");
            q / gcd(n, q)
        }
    }
}

/// The least modulus `m` with `G[m] = G[n]`.
pub fn canonical_modulus(g: &GroupDescriptor, n: u64) -> u64 {
    let e = g.torsion_exponent();
    match n {
        0 if g.free_rank() > 0 => 0,
        0 => e,
        _ => gcd(n, e),
    }
}

/// `G[n] ⊆ G[m]`.
pub fn torsion_le(g: &GroupDescriptor, n: u64, m: u64) -> bool {
    if g.free_rank() > 0 && n == 0 && m != 0 {
        return false;
    }
    g.cyclic_orders().all(|q| divides(gcd(n, q), gcd(m, q)))
}

/// Whether `G[n]` is a finite group.
pub fn torsion_is_finite(g: &GroupDescriptor, n: u64) -> bool {
    (g.free_rank() == 0 || n != 0) && g.tail_pattern().iter().all(|&q| gcd(n, q) == 1)
}

/// `[G[n] : G[gcd(n, m)]] < ∞`.
fn finite_index(g: &GroupDescriptor, n: u64, m: u64) -> bool {
    let k = gcd(n, m);
    if g.free_rank() > 0 && n == 0 && k != 0 {
        return false;
    }
    g.tail_pattern().iter().all(|&q| gcd(n, q) == gcd(k, q))
}

impl Coset {
    /// Canonical modulus and representative reduced modulo `G[n]`.
    pub fn new(g: &GroupDescriptor, rep: &Element, n: u64) -> Coset {
        let modulus = canonical_modulus(g, n);
        let mut r = Element::zero();
        for (c, v) in rep.coords() {
            let step = coord_step(g, c, modulus);
            let q = g.coord_order(c).expect("element not valid in group");
            r.set_reduced(c, if step == 0 { v } else { v.rem_euclid(step as i64) }, q);
        }
        Coset { modulus, rep: r }
    }

    /// The subgroup is trivial, so the coset is the single point `rep`.
    pub fn is_point(&self) -> bool {
        self.modulus == 1
    }

    pub fn contains(&self, g: &GroupDescriptor, x: &Element) -> bool {
        elementary_member(x, &self.rep, self.modulus, g)
    }

    pub fn is_subset(&self, g: &GroupDescriptor, other: &Coset) -> bool {
        torsion_le(g, self.modulus, other.modulus) && other.contains(g, &self.rep)
    }

    /// `self ∩ other`: empty or a coset of `G[gcd(n, m)]`, solved by CRT on
    /// each coordinate of `supp(rep₁) ∪ supp(rep₂)`.
    pub fn intersect(&self, g: &GroupDescriptor, other: &Coset) -> Option<Coset> {
        let support: BTreeSet<Coord> = self.rep.support().union(&other.rep.support()).copied().collect();
        let mut rep = Element::zero();
        for c in support {
            let q = g.coord_order(c).expect("element not valid in group");
            let (r, _) = crt(
                self.rep.get(c),
                coord_step(g, c, self.modulus),
                other.rep.get(c),
                coord_step(g, c, other.modulus),
            )?;
            rep.set_reduced(c, r, q);
        }
        Some(Coset::new(g, &rep, gcd(self.modulus, other.modulus)))
    }

    /// Elements of a finite coset.
    fn elements(&self, g: &GroupDescriptor) -> Vec<Element> {
        debug_assert!(torsion_is_finite(g, self.modulus));
        let steps = g
            .finite_orders()
            .iter()
            .enumerate()
            .map(|(i, &q)| (Coord::Finite(i), q / gcd(self.modulus, q), gcd(self.modulus, q)))
            .collect();
        grid(g, &self.rep, steps)
    }
}

/// `x ≡ r1 (mod a)`, `x ≡ r2 (mod b)`, where modulus `0` pins the value.
fn crt(r1: i64, a: u64, r2: i64, b: u64) -> Option<(i64, u64)> {
    let (r1, r2) = (r1 as i128, r2 as i128);
    let (a, b) = (a as i128, b as i128);
    let fits = |r: i128, m: i128| if m == 0 { r == 0 } else { r.rem_euclid(m) == 0 };
    if a == 0 {
        return fits(r1 - r2, b).then_some((r1 as i64, 0));
    }
    if b == 0 {
        return fits(r2 - r1, a).then_some((r2 as i64, 0));
    }
    let (d, s, _) = ext_gcd(a, b);
    if (r2 - r1) % d != 0 {
        return None;
    }
    let l = a / d * b;
    let x = (r1 + a * ((r2 - r1) / d * s).rem_euclid(b / d)).rem_euclid(l);
    Some((x as i64, l as u64))
}

/// `base + Σ t_i·step_i·e_{c_i}` over `0 ≤ t_i < count_i`.
fn grid(g: &GroupDescriptor, base: &Element, steps: Vec<(Coord, u64, u64)>) -> Vec<Element> {
    let mut out = alloc::vec![base.clone()];
    for (c, step, count) in steps {
        if count <= 1 {
            continue;
        }
        let unit = g.element(&[(c, step as i64)]).expect("coordinate exists");
        out = out
            .iter()
            .flat_map(|x| (0..count as i64).map(|t| g.combine(x, t, &unit)).collect::<Vec<_>>())
            .collect();
    }
    out
}

impl ClosedSet {
    pub fn empty() -> Self {
        ClosedSet::default()
    }

    pub fn whole(g: &GroupDescriptor) -> Self {
        ClosedSet::new(g, Vec::new(), alloc::vec![(Element::zero(), 0)])
    }

    pub fn finite_set(g: &GroupDescriptor, points: Vec<Element>) -> Self {
        ClosedSet::new(g, points, Vec::new())
    }

    /// Normal form of `points ∪ ⋃ (rep + G[n])`.
    pub fn new(g: &GroupDescriptor, points: Vec<Element>, cosets: Vec<(Element, u64)>) -> Self {
        ClosedSet::from_parts(g, points, cosets.iter().map(|(r, n)| Coset::new(g, r, *n)).collect())
    }

    fn from_parts(g: &GroupDescriptor, mut points: Vec<Element>, cosets: Vec<Coset>) -> Self {
        let mut pending: BTreeSet<Coset> = BTreeSet::new();
        for c in cosets {
            if c.is_point() {
                points.push(c.rep);
            } else {
                pending.insert(c);
            }
        }
        let pending: Vec<Coset> = pending.into_iter().collect();
        let cosets: Vec<Coset> = pending
            .iter()
            .enumerate()
            .filter(|(i, c)| {
                !pending.iter().enumerate().any(|(j, d)| {
                    j != *i && c.is_subset(g, d) && (j < *i || !d.is_subset(g, c))
                })
            })
            .map(|(_, c)| c.clone())
            .collect();
        let finite: BTreeSet<Element> =
            points.into_iter().filter(|x| !cosets.iter().any(|c| c.contains(g, x))).collect();
        ClosedSet { finite: finite.into_iter().collect(), cosets }
    }

    /// Re-establishes the normal form, e.g. after deserialization.
    pub fn normalized(&self, g: &GroupDescriptor) -> Self {
        ClosedSet::from_parts(g, self.finite.clone(), self.cosets.iter().map(|c| Coset::new(g, &c.rep, c.modulus)).collect())
    }

    pub fn validate(&self, g: &GroupDescriptor) -> crate::Result<()> {
        for x in self.finite.iter().chain(self.cosets.iter().map(|c| &c.rep)) {
            g.validate(x)?;
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.finite.is_empty() && self.cosets.is_empty()
    }

    pub fn contains(&self, g: &GroupDescriptor, x: &Element) -> bool {
        self.finite.contains(x) || self.cosets.iter().any(|c| c.contains(g, x))
    }

    pub fn union(&self, g: &GroupDescriptor, other: &ClosedSet) -> ClosedSet {
        ClosedSet::from_parts(
            g,
            self.finite.iter().chain(&other.finite).cloned().collect(),
            self.cosets.iter().chain(&other.cosets).cloned().collect(),
        )
    }

    pub fn intersect(&self, g: &GroupDescriptor, other: &ClosedSet) -> ClosedSet {
        let points = self
            .finite
            .iter()
            .filter(|x| other.contains(g, x))
            .chain(other.finite.iter().filter(|x| self.contains(g, x)))
            .cloned()
            .collect();
        let cosets = self
            .cosets
            .iter()
            .flat_map(|a| other.cosets.iter().filter_map(move |b| a.intersect(g, b)))
            .collect();
        ClosedSet::from_parts(g, points, cosets)
    }

    /// Whether `coset ⊆ self`.
    ///
    /// Finite cosets are checked pointwise. For an infinite coset `h + H`,
    /// only covering cosets `k + K` with `[H : H ∩ K] < ∞` can matter (a
    /// group is never a finite union of cosets of infinite-index subgroups),
    /// so `h + H` is covered iff each coset of `L = ⋂ (H ∩ K)` in `h + H` is
    /// inside one of them; there are finitely many, all differing on the
    /// finite invariant factors only.
    fn covers(&self, g: &GroupDescriptor, coset: &Coset) -> bool {
        if torsion_is_finite(g, coset.modulus) {
            return coset.elements(g).iter().all(|x| self.contains(g, x));
        }
        let n = coset.modulus;
        let useful: Vec<&Coset> = self.cosets.iter().filter(|c| finite_index(g, n, c.modulus)).collect();
        if useful.is_empty() {
            return false;
        }
        let k = useful.iter().fold(n, |acc, c| gcd(acc, c.modulus));
        let steps = g
            .finite_orders()
            .iter()
            .enumerate()
            .map(|(i, &q)| (Coord::Finite(i), q / gcd(n, q), gcd(n, q) / gcd(k, q)))
            .collect();
        grid(g, &coset.rep, steps)
            .iter()
            .all(|r| useful.iter().any(|c| c.contains(g, r)))
    }

    pub fn is_subset(&self, g: &GroupDescriptor, other: &ClosedSet) -> bool {
        self.finite.iter().all(|x| other.contains(g, x)) && self.cosets.iter().all(|c| other.covers(g, c))
    }

    pub fn set_eq(&self, g: &GroupDescriptor, other: &ClosedSet) -> bool {
        self.is_subset(g, other) && other.is_subset(g, self)
    }

    /// Whether the set is all of `G`.
    pub fn is_whole(&self, g: &GroupDescriptor) -> bool {
        ClosedSet::whole(g).is_subset(g, self)
    }
}

pub fn closed_union(a: &ClosedSet, b: &ClosedSet, g: &GroupDescriptor) -> ClosedSet {
    a.union(g, b)
}

pub fn closed_intersect(a: &ClosedSet, b: &ClosedSet, g: &GroupDescriptor) -> ClosedSet {
    a.intersect(g, b)
}

fn term(rep: &Element, n: u64) -> String {
    if rep.is_zero() {
        alloc::format!("G[{n}]")
    } else {
        alloc::format!("{rep}+G[{n}]")
    }
}

/// `{x, y} ∪ h+G[n] ∪ …`, `∅` for the empty set.
impl fmt::Display for ClosedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if !self.finite.is_empty() {
            let pts: Vec<String> = self.finite.iter().map(|x| alloc::format!("{x}")).collect();
            parts.push(alloc::format!("{{{}}}", pts.join(", ")));
        }
        parts.extend(self.cosets.iter().map(|c| term(&c.rep, c.modulus)));
        if parts.is_empty() {
            f.write_str("∅")
        } else {
            f.write_str(&parts.join(" ∪ "))
        }
    }
}
