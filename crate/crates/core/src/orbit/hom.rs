//! Partial homomorphisms `G → 𝕋^d` whose restriction to given sets hits
//! prescribed boxes, and injectivity on a finite window.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::refine::{find_orbit_point_in, SetStream};
use super::{ArcBox, GeneratorAssignment, Requirement, Witness, WitnessElement};
use crate::arith::{circle_dist, ext_gcd, frac, gcd, lcm, nearest_int};
use crate::equidist::{FormalReal, TorusPoint};
use crate::group::{Coord, Element, GroupDescriptor};
use crate::setexpr::{classify, SetExpr, TorsionClass};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub set: SetExpr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomConfig {
    /// Forced elements that may miss their box, per requirement.
    pub backtrack_budget: usize,
    /// Elements walked per requirement before giving up.
    pub max_walk: usize,
}

impl Default for HomConfig {
    fn default() -> Self {
        HomConfig { backtrack_budget: 32, max_walk: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomResult {
    pub assignment: GeneratorAssignment,
    /// Level of each family member.
    pub levels: Vec<u64>,
    /// One witness per requirement, in requirement order.
    pub witnesses: Vec<Witness>,
}

impl fmt::Display for GeneratorAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images.iter().map(|(c, p)| format!("{c} -> {p}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Checks a witness produced by [`construct_dense_homomorphism`]: the
/// element's image under `pi` is the recorded point, and the recorded
/// margins are `r_i − ‖point_i − y_i‖` (positive, or an exact hit for a
/// degenerate coordinate).
pub fn verify_hom_witness(w: &Witness, arc: &ArcBox, pi: &GeneratorAssignment) -> bool {
    let WitnessElement::Group(x) = &w.element else { return false };
    if pi.image(x).as_ref() != Some(&w.point) || w.margins.len() != arc.dim() {
        return false;
    }
    (0..arc.dim()).all(|i| {
        let d = circle_dist(&(&w.point.coords()[i] - &arc.center[i]));
        let m = &arc.radius[i] - &d;
        m == w.margins[i] && if arc.radius[i].is_zero() { d.is_zero() } else { m.is_positive() }
    })
}

fn partial_error(what: String, pi: &GeneratorAssignment) -> Error {
    Error::BudgetExceeded(format!("{what}; partial assignment {pi}"))
}

/// Builds `π` on finitely many generators so that for every requirement
/// some element of its set lands in the box, inside `𝕋[n]^d` where `n` is
/// the set's almost-torsion level.
///
/// Torsion levels: walk the set's enumeration (a cursor per set) and solve
/// for the images of generators an element introduces: the reachable
/// targets form `known + 𝕋[o]^d`, `o` the lcm of the new coordinates'
/// orders, and the nearest such point to the box center is hit exactly.
/// Elements with no new generators are forced; a forced miss counts
/// against the backtrack budget.
///
/// Level 0: the first affine leaf supplies a pivot free generator;
/// requirements on that set are handled together by the nested refinement
/// with `s` the pivot coefficient and offset the image of the rest, whose
/// unassigned generators are sent to `0`. On `G = ℤ` this is exactly
/// [`find_orbit_point`](super::find_orbit_point).
pub fn construct_dense_homomorphism(
    g: &GroupDescriptor,
    family: &[FamilyMember],
    d: usize,
    reqs: &[Requirement],
    cfg: &HomConfig,
) -> Result<HomResult> {
    if d == 0 {
        return Err(Error::InvalidRequirement("dimension must be positive".into()));
    }
    let mut sets = Vec::with_capacity(family.len());
    let mut levels = Vec::with_capacity(family.len());
    for (j, m) in family.iter().enumerate() {
        let x = m.set.normalize(g)?;
        match classify(&x, g)? {
            TorsionClass::AlmostTorsion { n } => levels.push(n),
            other => {
                return Err(Error::InvalidSet(format!("family member {j} is not almost torsion: {other:?}")))
            }
        }
        sets.push(x);
    }
    for r in reqs {
        let level = *levels
            .get(r.set)
            .ok_or_else(|| Error::InvalidRequirement(format!("requirement {} names unknown set {}", r.id, r.set)))?;
        if r.level != level {
            return Err(Error::InvalidRequirement(format!(
                "requirement {} has level {} but set {} is almost {level}-torsion",
                r.id, r.level, r.set
            )));
        }
        if r.arc.dim() != d {
            return Err(Error::InvalidRequirement(format!("requirement {} has the wrong dimension", r.id)));
        }
        r.arc.validate(level)?;
    }

    let mut pi = GeneratorAssignment::new(d);
    let mut iters: Vec<_> = sets.iter().map(|x| x.enumerate(g)).collect();
    let mut done_zero: BTreeSet<usize> = BTreeSet::new();
    let mut witnesses: BTreeMap<usize, Witness> = BTreeMap::new();
    for (pos, r) in reqs.iter().enumerate() {
        if levels[r.set] == 0 {
            if done_zero.insert(r.set) {
                let batch: Vec<(usize, Requirement)> =
                    reqs.iter().enumerate().filter(|(_, q)| q.set == r.set).map(|(i, q)| (i, q.clone())).collect();
                level_zero(g, &sets[r.set], d, &batch, &mut pi, &mut witnesses)?;
            }
            continue;
        }
        let w = torsion_requirement(g, &mut iters[r.set], r, levels[r.set], &mut pi, cfg)?;
        witnesses.insert(pos, w);
    }
    Ok(HomResult { assignment: pi, levels, witnesses: witnesses.into_values().collect() })
}

fn level_zero(
    g: &GroupDescriptor,
    x: &SetExpr,
    d: usize,
    batch: &[(usize, Requirement)],
    pi: &mut GeneratorAssignment,
    out: &mut BTreeMap<usize, Witness>,
) -> Result<()> {
    let pivot = x
        .leaves()
        .iter()
        .find_map(|l| match l {
            SetExpr::Affine { b, .. } => b.support().into_iter().find(|c| matches!(c, Coord::Free(_)) && pi.get(*c).is_none()),
            _ => None,
        })
        .ok_or_else(|| Error::InvalidSet("no unassigned free generator available as a pivot".into()))?;
    let reqs: Vec<Requirement> = batch.iter().map(|(_, r)| r.clone()).collect();
    let result = {
        let mut stream = SetStream::new(g, x, pivot, pi);
        find_orbit_point_in(&mut stream, &reqs, d)?
    };
    for w in &result.witnesses {
        if let WitnessElement::Group(el) = &w.element {
            for c in el.support() {
                if c != pivot && pi.get(c).is_none() {
                    pi.assign(g, c, TorusPoint::zero(d))?;
                }
            }
        }
    }
    pi.assign(g, pivot, result.x)?;
    for ((pos, _), w) in batch.iter().zip(result.witnesses) {
        out.insert(*pos, w);
    }
    Ok(())
}

fn torsion_requirement(
    g: &GroupDescriptor,
    iter: &mut impl Iterator<Item = Element>,
    r: &Requirement,
    level: u64,
    pi: &mut GeneratorAssignment,
    cfg: &HomConfig,
) -> Result<Witness> {
    let mut misses = 0usize;
    for _ in 0..cfg.max_walk {
        let x = iter.next().ok_or_else(|| Error::InsufficientStream {
            requirement: r.id,
            needed: "another set element".into(),
        })?;
        let known = pi.image_partial(&x);
        let fresh: Vec<(Coord, u64, u64)> = x
            .coords()
            .filter(|(c, _)| pi.get(*c).is_none())
            .map(|(c, v)| (c, v as u64, g.coord_order(c).expect("valid element")))
            .collect();
        if fresh.is_empty() {
            if r.arc.contains(&known) {
                return Ok(hom_witness(r, x, known));
            }
            misses += 1;
            if misses > cfg.backtrack_budget {
                return Err(partial_error(
                    format!("requirement {}: {misses} forced elements missed the box", r.id),
                    pi,
                ));
            }
            continue;
        }
        let o = fresh.iter().fold(1, |acc, &(_, v, q)| lcm(acc, q / gcd(v, q)));
        debug_assert!(level % o == 0);
        let Some(target) = nearest_target(&r.arc, &known, o) else { continue };
        let images = solve_fresh(&fresh, &known, &target);
        for (c, p) in images {
            pi.assign(g, c, p)?;
        }
        let img = pi.image(&x).expect("all generators of x are assigned");
        if img != target {
            return Err(Error::InvalidInput(format!("lattice solve missed for {x}")));
        }
        return Ok(hom_witness(r, x, img));
    }
    Err(partial_error(format!("requirement {}: walked {} elements without a hit", r.id, cfg.max_walk), pi))
}

/// Per coordinate, the point of `known_i + (1/o)ℤ` in the arc closest to its
/// center (smallest value on ties).
fn nearest_target(arc: &ArcBox, known: &TorusPoint, o: u64) -> Option<TorusPoint> {
    let mut out = Vec::with_capacity(arc.dim());
    for i in 0..arc.dim() {
        let best = (0..o)
            .map(|m| frac(&(&known.coords()[i] + BigRational::new(BigInt::from(m), BigInt::from(o)))))
            .filter(|t| arc.coord_contains(i, t))
            .min_by(|a, b| {
                let da = circle_dist(&(a - &arc.center[i]));
                let db = circle_dist(&(b - &arc.center[i]));
                (da, a).cmp(&(db, b))
            })?;
        out.push(best);
    }
    Some(TorusPoint::new(out))
}

/// Images `α_c/q_c` with `Σ v_c α_c/q_c ≡ target − known` in every
/// coordinate, via Bezout over `ℤ/L`, `L = lcm q_c`.
fn solve_fresh(fresh: &[(Coord, u64, u64)], known: &TorusPoint, target: &TorusPoint) -> Vec<(Coord, TorusPoint)> {
    let l = fresh.iter().fold(1, |acc, &(_, _, q)| lcm(acc, q)) as i128;
    let kappa: Vec<i128> = fresh.iter().map(|&(_, v, q)| (v as i128 * (l / q as i128)) % l).collect();
    // Σ κ_c u_c ≡ gg (mod L)
    let mut gg = l;
    let mut u: Vec<i128> = alloc::vec![0; fresh.len()];
    for (c, &k) in kappa.iter().enumerate() {
        let (h, s, t) = ext_gcd(gg, k);
        for x in u.iter_mut() {
            *x *= s;
        }
        u[c] += t;
        gg = h;
        for x in u.iter_mut() {
            *x %= l;
        }
    }
    let mut coords: Vec<Vec<BigRational>> = alloc::vec![Vec::with_capacity(target.dim()); fresh.len()];
    for i in 0..target.dim() {
        let w = frac(&(&target.coords()[i] - &known.coords()[i])) * BigRational::from_integer(BigInt::from(l));
        let w: i128 = i128::try_from(w.to_integer()).expect("small modulus");
        debug_assert!(w % gg == 0);
        let scale = w / gg;
        for (j, &(_, _, q)) in fresh.iter().enumerate() {
            let alpha = (u[j] % q as i128 * (scale % q as i128)).rem_euclid(q as i128);
            coords[j].push(BigRational::new(BigInt::from(alpha), BigInt::from(q)));
        }
    }
    fresh.iter().zip(coords).map(|(&(c, _, _), v)| (c, TorusPoint::new(v))).collect()
}

fn hom_witness(r: &Requirement, x: Element, img: TorusPoint) -> Witness {
    let dim = img.dim();
    let mut shifts = Vec::with_capacity(dim);
    let mut margins = Vec::with_capacity(dim);
    for i in 0..dim {
        let diff = &img.coords()[i] - &r.arc.center[i];
        let n = nearest_int(&diff);
        margins.push(&r.arc.radius[i] - (diff - BigRational::from_integer(n.clone())).abs());
        shifts.push(n);
    }
    Witness {
        requirement: r.id,
        element: WitnessElement::Group(x),
        s: BigInt::from(1),
        offset: Vec::new(),
        shifts,
        point: img,
        margins,
    }
}

/// `π` extended by extra coordinates so that it is injective on a window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectiveAssignment {
    /// Dimension of the original assignment; coordinates beyond it are extra.
    pub base_dim: usize,
    /// Owner generator of each extra coordinate.
    pub extra: Vec<Coord>,
    pub images: BTreeMap<Coord, Vec<FormalReal>>,
    /// Number of window elements checked.
    pub window: usize,
}

impl InjectiveAssignment {
    /// Image of `x` with rational parts reduced mod 1.
    pub fn image(&self, x: &Element) -> Option<Vec<FormalReal>> {
        let dim = self.base_dim + self.extra.len();
        let mut acc = alloc::vec![FormalReal::default(); dim];
        for (c, v) in x.coords() {
            let img = self.images.get(&c)?;
            let k = BigRational::from_integer(BigInt::from(v));
            for (a, b) in acc.iter_mut().zip(img) {
                *a = a.add(&b.scale(&k));
            }
        }
        for a in acc.iter_mut() {
            a.c0 = frac(&a.c0);
        }
        Some(acc)
    }
}

type ImageKey = Vec<(BigRational, Vec<(u32, BigRational)>)>;

fn key(img: &[FormalReal]) -> ImageKey {
    img.iter().map(|f| (f.c0.clone(), f.beta.iter().map(|(&j, c)| (j, c.clone())).collect())).collect()
}

/// Gives every unassigned generator met by the first `window` elements of
/// `G` a coordinate of its own (a fresh symbol `β_j` for a free generator,
/// `1/q` for one of order `q`), then checks the images of those elements
/// are pairwise distinct mod 1. Assigned generators keep their images and
/// get `0` in the extra coordinates, so a collision among them is reported.
pub fn ensure_injective_window(
    g: &GroupDescriptor,
    pi: &GeneratorAssignment,
    window: usize,
) -> Result<InjectiveAssignment> {
    let elements = g.enumerate(window);
    let unassigned: BTreeSet<Coord> =
        elements.iter().flat_map(|x| x.support()).filter(|c| pi.get(*c).is_none()).collect();
    let extra: Vec<Coord> = unassigned.into_iter().collect();
    let dim = pi.dim + extra.len();
    let mut images: BTreeMap<Coord, Vec<FormalReal>> = BTreeMap::new();
    for (c, p) in &pi.images {
        let mut v: Vec<FormalReal> = p.coords().iter().map(|x| FormalReal::rational(x.clone())).collect();
        v.resize(dim, FormalReal::default());
        images.insert(*c, v);
    }
    let mut symbol = 0u32;
    for (j, &c) in extra.iter().enumerate() {
        let mut v = alloc::vec![FormalReal::default(); dim];
        v[pi.dim + j] = match g.coord_order(c)? {
            0 => {
                symbol += 1;
                FormalReal::symbol(symbol)
            }
            q => FormalReal::rational(BigRational::new(BigInt::from(1), BigInt::from(q))),
        };
        images.insert(c, v);
    }
    let out = InjectiveAssignment { base_dim: pi.dim, extra, images, window: elements.len() };
    let mut seen: BTreeMap<ImageKey, Element> = BTreeMap::new();
    for x in elements {
        let img = out.image(&x).expect("every generator in the window has an image");
        if let Some(prev) = seen.insert(key(&img), x.clone()) {
            return Err(Error::InjectivityConflict { left: Box::new(prev), right: Box::new(x) });
        }
    }
    Ok(out)
}
