//! The nested dyadic refinement shared by orbit points and the
//! infinite-order branch of the homomorphism builder.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{GeneratorAssignment, Requirement, Witness, WitnessElement};
use crate::arith::{frac, rational_str, rational_vec};
use crate::equidist::TorusPoint;
use crate::group::{Coord, Element, GroupDescriptor};
use crate::setexpr::{SetExpr, SetIter};
use crate::{Error, Result};

/// Elements a linear scan may skip before giving up.
pub const SCAN_LIMIT: u64 = 10_000_000;

/// One usable stream element: the integer `s` multiplying the unknown point,
/// plus a fixed offset added to `s·x` (zero for plain integer streams).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamItem {
    pub s: BigInt,
    pub offset: Vec<BigRational>,
    pub element: WitnessElement,
}

/// A stream consumed in order.
pub trait ScalarStream {
    /// The next element with `|s| ≥ bound`, discarding everything before
    /// it; `None` once the stream is exhausted.
    fn next_at_least(&mut self, bound: &BigInt) -> Result<Option<StreamItem>>;
}

/// A plain sequence of integers.
pub struct IntegerStream<I> {
    inner: I,
}

impl<I: Iterator<Item = BigInt>> IntegerStream<I> {
    pub fn new(inner: I) -> Self {
        IntegerStream { inner }
    }
}

impl<I: Iterator<Item = BigInt>> ScalarStream for IntegerStream<I> {
    fn next_at_least(&mut self, bound: &BigInt) -> Result<Option<StreamItem>> {
        for (scanned, s) in (&mut self.inner).enumerate() {
            if s.abs() >= *bound {
                return Ok(Some(StreamItem { element: WitnessElement::Integer(s.clone()), s, offset: Vec::new() }));
            }
            if scanned as u64 >= SCAN_LIMIT {
                return Err(Error::BudgetExceeded(format!("scanned {SCAN_LIMIT} stream elements below {bound}")));
            }
        }
        Ok(None)
    }
}

enum Walk<'a> {
    /// `a + k·b`, next index `k`.
    Affine { a: &'a Element, b: &'a Element, k: BigInt },
    Scan(SetIter<'a>),
}

/// The canonical enumeration of a normalized set, read through a pivot
/// generator: an element `x` gives `s = x_pivot` and offset `π(x − s·e_pivot)`
/// under a fixed assignment (unassigned generators count as `0`).
///
/// A set that is a single affine leaf is searched in closed form, which is
/// what makes huge bounds reachable; anything else is scanned.
pub struct SetStream<'a> {
    g: &'a GroupDescriptor,
    pivot: Coord,
    fixed: &'a GeneratorAssignment,
    walk: Walk<'a>,
    integer_labels: bool,
}

impl<'a> SetStream<'a> {
    /// `x` must be normalized.
    pub fn new(g: &'a GroupDescriptor, x: &'a SetExpr, pivot: Coord, fixed: &'a GeneratorAssignment) -> Self {
        let leaves = x.leaves();
        let walk = match leaves.as_slice() {
            [SetExpr::Affine { a, b }] => Walk::Affine { a, b, k: BigInt::zero() },
            _ => Walk::Scan(x.enumerate(g)),
        };
        SetStream { g, pivot, fixed, walk, integer_labels: false }
    }

    /// Label witnesses with the integer `s` rather than the group element.
    pub fn with_integer_labels(mut self) -> Self {
        self.integer_labels = true;
        self
    }

    fn item(&self, x: Element, s: BigInt) -> StreamItem {
        let rest = x.restrict(|c| c != self.pivot);
        let offset = if self.fixed.dim == 0 || rest.is_zero() {
            Vec::new()
        } else {
            self.fixed.image_partial(&rest).coords().to_vec()
        };
        let element = if self.integer_labels { WitnessElement::Integer(s.clone()) } else { WitnessElement::Group(x) };
        StreamItem { s, offset, element }
    }
}

/// First `k ≥ from` with `|a + k·b| ≥ bound`, for `b ≠ 0`.
fn first_index(a: &BigInt, b: &BigInt, from: &BigInt, bound: &BigInt) -> BigInt {
    let (a, b) = if b.is_negative() { (-a, -b) } else { (a.clone(), b.clone()) };
    // a + k·b ≤ −bound  ⟺  k ≤ floor((−bound − a)/b)
    let low = (-bound - &a).div_floor(&b);
    if *from <= low {
        return from.clone();
    }
    // a + k·b ≥ bound  ⟺  k ≥ ceil((bound − a)/b)
    let high = (bound - &a).div_ceil(&b);
    high.max(from.clone())
}

impl ScalarStream for SetStream<'_> {
    fn next_at_least(&mut self, bound: &BigInt) -> Result<Option<StreamItem>> {
        let pivot = self.pivot;
        match &mut self.walk {
            Walk::Affine { a, b, k } => {
                let (a, b) = (*a, *b);
                let ap = BigInt::from(a.get(pivot));
                let bp = BigInt::from(b.get(pivot));
                let idx = if bp.is_zero() {
                    if ap.abs() >= *bound {
                        k.clone()
                    } else {
                        return Ok(None);
                    }
                } else {
                    first_index(&ap, &bp, k, bound)
                };
                *k = &idx + 1;
                let too_big = || Error::BudgetExceeded(format!("element index {idx} leaves 64-bit coordinates"));
                let ki = idx.to_i64().ok_or_else(too_big)?;
                for c in a.support().union(&b.support()) {
                    let v = BigInt::from(a.get(*c)) + BigInt::from(b.get(*c)) * &idx;
                    if v.to_i64().is_none() {
                        return Err(too_big());
                    }
                }
                let x = self.g.combine(a, ki, b);
                let s = &ap + &bp * &idx;
                Ok(Some(self.item(x, s)))
            }
            Walk::Scan(iter) => {
                let mut scanned = 0u64;
                while let Some(x) = iter.next() {
                    let s = BigInt::from(x.get(pivot));
                    if s.abs() >= *bound {
                        return Ok(Some(self.item(x, s)));
                    }
                    scanned += 1;
                    if scanned >= SCAN_LIMIT {
                        return Err(Error::BudgetExceeded(format!(
                            "scanned {SCAN_LIMIT} set elements below {bound}"
                        )));
                    }
                }
                Ok(None)
            }
        }
    }
}

/// The arc product `I` after a refinement step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub requirement: usize,
    #[serde(with = "crate::arith::bigint_str")]
    pub s: BigInt,
    /// Left endpoints of the arcs (not reduced mod 1).
    #[serde(with = "rational_vec")]
    pub start: Vec<BigRational>,
    /// Common arc length, a power of two.
    #[serde(with = "rational_str")]
    pub length: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitResult {
    pub x: TorusPoint,
    pub witnesses: Vec<Witness>,
    pub trace: Vec<TraceStep>,
}

struct Pending {
    requirement: usize,
    item: StreamItem,
    shifts: Vec<BigInt>,
}

/// Runs the refinement over `reqs` in order (all must be level 0 and of
/// dimension `dim`).
///
/// Invariant: `I = ∏ [a_i, a_i + L)` with `L = 2^-p` and every `a_i` a
/// multiple of `L` once `p ≥ 1`. For a requirement with center `y`, radii
/// `r_i ≥ ε`: take the first `s` with `|s| ≥ 2/L`, the largest `L' = 2^-q`
/// with `|s|·L' ≤ ε/2`, and in each coordinate the smallest `x* ≥ a_i` with
/// `s·x* ≡ y_i − offset_i`; it lies in `[a_i, a_i + L/2]`. The new arc is
/// the `L'`-aligned cell containing `x*`, inside the old one because
/// `L' ≤ L/8`, and on it `|s·x + offset − y − n| < |s|·L' ≤ ε/2`.
pub fn find_orbit_point_in(stream: &mut dyn ScalarStream, reqs: &[Requirement], dim: usize) -> Result<OrbitResult> {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut start: Vec<BigRational> = alloc::vec![-half.clone(); dim];
    let mut length = BigRational::one();
    let mut p: u64 = 0;
    let mut pending = Vec::new();
    let mut trace = Vec::new();
    for r in reqs {
        if r.arc.dim() != dim {
            return Err(Error::InvalidRequirement(format!("requirement {} has the wrong dimension", r.id)));
        }
        if r.level != 0 {
            return Err(Error::InvalidRequirement(format!("requirement {} is not a level-0 requirement", r.id)));
        }
        r.arc.validate(0)?;
        let bound = BigInt::one() << (p + 1) as usize;
        let item = stream.next_at_least(&bound)?.ok_or_else(|| Error::InsufficientStream {
            requirement: r.id,
            needed: format!("|s| >= {bound}"),
        })?;
        let abs_s = BigRational::from_integer(item.s.abs());
        let half_eps = r.arc.min_radius() * &half;
        let mut q = p + 1;
        while &abs_s * crate::arith::dyadic_unit(q as u32) > half_eps {
            q += 1;
        }
        let new_len = crate::arith::dyadic_unit(q as u32);
        let neg = item.s.is_negative();
        let mut shifts = Vec::with_capacity(dim);
        for i in 0..dim {
            let off = item.offset.get(i).cloned().unwrap_or_else(BigRational::zero);
            let y = &r.arc.center[i] - off;
            let y = if neg { -y } else { y };
            let n = (&start[i] * &abs_s - &y).ceil();
            let target = (&y + &n) / &abs_s;
            start[i] = (&target / &new_len).floor() * &new_len;
            let n = n.to_integer();
            shifts.push(if neg { -n } else { n });
        }
        length = new_len;
        p = q;
        trace.push(TraceStep { requirement: r.id, s: item.s.clone(), start: start.clone(), length: length.clone() });
        pending.push(Pending { requirement: r.id, item, shifts });
    }
    let center: Vec<BigRational> = start.iter().map(|a| a + &length * &half).collect();
    let x = TorusPoint::new(center.clone());
    let witnesses = pending
        .into_iter()
        .zip(reqs)
        .map(|(w, r)| witness(w, r, &center, &x))
        .collect();
    Ok(OrbitResult { x, witnesses, trace })
}

/// Builds the witness for the reduced point `x`, moving the integer part of
/// the unreduced center into the shifts.
fn witness(w: Pending, r: &Requirement, center: &[BigRational], x: &TorusPoint) -> Witness {
    let s = BigRational::from_integer(w.item.s.clone());
    let dim = center.len();
    let mut shifts = Vec::with_capacity(dim);
    let mut margins = Vec::with_capacity(dim);
    let mut point = Vec::with_capacity(dim);
    for i in 0..dim {
        let wrap = center[i].floor().to_integer();
        let n = &w.shifts[i] - &w.item.s * wrap;
        let off = w.item.offset.get(i).cloned().unwrap_or_else(BigRational::zero);
        let value = &s * &x.coords()[i] + &off;
        let dev = (&value - &r.arc.center[i] - BigRational::from_integer(n.clone())).abs();
        margins.push(&r.arc.radius[i] - dev);
        point.push(frac(&value));
        shifts.push(n);
    }
    let offset = if w.item.offset.iter().all(Zero::is_zero) { Vec::new() } else { w.item.offset };
    Witness {
        requirement: w.requirement,
        element: w.item.element,
        s: w.item.s,
        offset,
        shifts,
        point: TorusPoint::new(point),
        margins,
    }
}

/// Orbit point for a subset `S ⊆ ℤ` given symbolically: finds `x ∈ 𝕋^dim`
/// such that each requirement box contains `s·x` for some `s ∈ S`.
pub fn find_orbit_point(s: &SetExpr, reqs: &[Requirement], dim: usize) -> Result<OrbitResult> {
    let z = GroupDescriptor::free(1);
    let s = s.normalize(&z)?;
    let fixed = GeneratorAssignment::new(dim);
    let mut stream = SetStream::new(&z, &s, Coord::Free(0), &fixed).with_integer_labels();
    find_orbit_point_in(&mut stream, reqs, dim)
}

/// Boxes a finite list of integers as a stream.
pub fn integer_stream(values: Vec<BigInt>) -> IntegerStream<Box<dyn Iterator<Item = BigInt>>> {
    IntegerStream::new(Box::new(values.into_iter()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::orbit::{verify_witness, ArcBox};
    use alloc::vec;

    fn req(id: usize, center: Vec<BigRational>, r: BigRational) -> Requirement {
        Requirement { id, set: 0, level: 0, arc: ArcBox::cube(center, r).unwrap() }
    }

    fn naturals() -> SetExpr {
        let z = GroupDescriptor::free(1);
        SetExpr::affine(z.element(&[(Coord::Free(0), 1)]).unwrap(), z.element(&[(Coord::Free(0), 1)]).unwrap())
    }

    #[test]
    fn empty_requirements_give_zero() {
        let r = find_orbit_point(&naturals(), &[], 3).unwrap();
        assert_eq!(r.x, TorusPoint::zero(3));
        assert!(r.witnesses.is_empty());
    }

    #[test]
    fn single_box() {
        let reqs = vec![req(0, vec![rat(1, 2)], rat(1, 4))];
        let r = find_orbit_point(&naturals(), &reqs, 1).unwrap();
        let w = &r.witnesses[0];
        assert!(verify_witness(w, &reqs[0].arc, &r.x));
        assert!(w.margins.iter().all(|m| m.is_positive()));
    }

    #[test]
    fn powers_of_two_corners() {
        let reqs = vec![
            req(0, vec![rat(1, 4), rat(3, 4)], rat(1, 16)),
            req(1, vec![rat(3, 4), rat(1, 4)], rat(1, 16)),
        ];
        let mut stream = integer_stream((0..200).map(|j| BigInt::one() << j).collect());
        let r = find_orbit_point_in(&mut stream, &reqs, 2).unwrap();
        for (w, q) in r.witnesses.iter().zip(&reqs) {
            assert!(verify_witness(w, &q.arc, &r.x));
        }
    }

    #[test]
    fn negative_stream_elements() {
        let z = GroupDescriptor::free(1);
        let neg = SetExpr::affine(Element::zero(), z.element(&[(Coord::Free(0), -3)]).unwrap());
        let reqs = vec![req(0, vec![rat(1, 3)], rat(1, 10)), req(1, vec![rat(5, 7)], rat(1, 10))];
        let r = find_orbit_point(&neg, &reqs, 1).unwrap();
        assert!(r.witnesses.iter().all(|w| w.s.is_negative()));
        for (w, q) in r.witnesses.iter().zip(&reqs) {
            assert!(verify_witness(w, &q.arc, &r.x));
        }
    }

    #[test]
    fn exhausted_stream() {
        let reqs = vec![req(7, vec![rat(1, 2)], rat(1, 64)), req(8, vec![rat(1, 2)], rat(1, 64))];
        let mut stream = integer_stream(vec![BigInt::from(5)]);
        let e = find_orbit_point_in(&mut stream, &reqs, 1).unwrap_err();
        assert!(matches!(e, Error::InsufficientStream { requirement: 8, .. }));
        let finite = SetExpr::finite(vec![]);
        assert!(find_orbit_point(&finite, &reqs, 1).is_err());
    }

    #[test]
    fn analytic_jump_matches_scan() {
        let z = GroupDescriptor::free(1);
        let a = z.element(&[(Coord::Free(0), -40)]).unwrap();
        let b = z.element(&[(Coord::Free(0), 3)]).unwrap();
        let x = SetExpr::affine(a, b).normalize(&z).unwrap();
        let fixed = GeneratorAssignment::new(0);
        let mut fast = SetStream::new(&z, &x, Coord::Free(0), &fixed);
        let twice = SetExpr::union(vec![x.clone(), x.clone()]).normalize(&z).unwrap();
        let mut slow = SetStream::new(&z, &twice, Coord::Free(0), &fixed);
        assert!(matches!(slow.walk, Walk::Scan(_)));
        for bound in [1, 5, 5, 30, 41, 100, 2, 1000] {
            let b = BigInt::from(bound);
            assert_eq!(fast.next_at_least(&b).unwrap(), slow.next_at_least(&b).unwrap(), "bound {bound}");
        }
    }

    #[test]
    fn first_index_cases() {
        let f = |a: i64, b: i64, from: i64, bound: i64| {
            first_index(&BigInt::from(a), &BigInt::from(b), &BigInt::from(from), &BigInt::from(bound))
        };
        assert_eq!(f(0, 1, 0, 5), BigInt::from(5));
        assert_eq!(f(-10, 1, 0, 5), BigInt::from(0));
        assert_eq!(f(-10, 1, 6, 5), BigInt::from(15));
        assert_eq!(f(10, -1, 0, 5), BigInt::from(0));
        assert_eq!(f(10, -1, 6, 5), BigInt::from(15));
    }
}
