//! Orbit constructions on finite-dimensional tori.
//!
//! [`find_orbit_point`] runs a nested dyadic refinement: for each
//! requirement it draws an integer `s` large enough that `s·I` wraps the
//! current arc product `I` around every coordinate, then shrinks `I` so that
//! `s·I` lands strictly inside the target box. Everything is exact rational
//! arithmetic. [`construct_dense_homomorphism`] uses the same core for
//! infinite-order sets and exact lattice solving for torsion levels.

mod flow;
mod hom;
mod refine;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{circle_dist, rational_str, rational_vec};
use crate::equidist::TorusPoint;
use crate::group::{Coord, Element, GroupDescriptor};
use crate::{Error, Result};

pub use flow::{flow_simulate, BoxHits, FlowAlpha, FlowReport};
pub use hom::{
    construct_dense_homomorphism, ensure_injective_window, verify_hom_witness, FamilyMember, HomConfig, HomResult,
    InjectiveAssignment,
};
pub use refine::{
    find_orbit_point, find_orbit_point_in, integer_stream, IntegerStream, OrbitResult, ScalarStream, SetStream, StreamItem,
    TraceStep, SCAN_LIMIT,
};

/// Product of arcs `{x : ‖x_i − center_i‖ < radius_i}`; a zero radius is the
/// single point `center_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcBox {
    #[serde(with = "rational_vec")]
    pub center: Vec<BigRational>,
    #[serde(with = "rational_vec")]
    pub radius: Vec<BigRational>,
}

impl ArcBox {
    pub fn new(center: Vec<BigRational>, radius: Vec<BigRational>) -> Result<Self> {
        let b = ArcBox { center, radius };
        b.check_shape()?;
        Ok(b)
    }

    /// Same radius in every coordinate.
    pub fn cube(center: Vec<BigRational>, radius: BigRational) -> Result<Self> {
        let radius = alloc::vec![radius; center.len()];
        ArcBox::new(center, radius)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    fn check_shape(&self) -> Result<()> {
        if self.center.len() != self.radius.len() || self.center.is_empty() {
            return Err(Error::InvalidRequirement("box needs matching, nonempty center and radius".into()));
        }
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        if self.radius.iter().any(|r| r.is_negative() || *r > half) {
            return Err(Error::InvalidRequirement("radii must lie in [0, 1/2]".into()));
        }
        Ok(())
    }

    pub fn is_degenerate(&self) -> bool {
        self.radius.iter().any(Zero::is_zero)
    }

    pub fn min_radius(&self) -> BigRational {
        self.radius.iter().min().cloned().expect("nonempty box")
    }

    /// Exact membership with wraparound.
    pub fn contains(&self, p: &TorusPoint) -> bool {
        p.dim() == self.dim()
            && p.coords().iter().enumerate().all(|(i, x)| self.coord_contains(i, x))
    }

    fn coord_contains(&self, i: usize, x: &BigRational) -> bool {
        let d = circle_dist(&(x - &self.center[i]));
        if self.radius[i].is_zero() {
            d.is_zero()
        } else {
            d < self.radius[i]
        }
    }

    /// Numeric membership for floating-point orbits.
    pub fn contains_f64(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter().enumerate().all(|(i, &x)| {
                let c = crate::arith::to_f64(&self.center[i]);
                let r = crate::arith::to_f64(&self.radius[i]);
                let t = x - c;
                let f = t - libm::floor(t);
                let d = if f <= 0.5 { f } else { 1.0 - f };
                if r == 0.0 {
                    d == 0.0
                } else {
                    d < r
                }
            })
    }

    /// Points of `𝕋[n]` inside coordinate `i`'s arc (`n ≥ 1`).
    fn torsion_points(&self, i: usize, n: u64) -> Vec<BigRational> {
        (0..n)
            .map(|j| BigRational::new(BigInt::from(j), BigInt::from(n)))
            .filter(|x| self.coord_contains(i, x))
            .collect()
    }

    /// Checks the box against a requirement level: level 1 is rejected,
    /// level 0 needs open arcs, level `n ≥ 2` needs `box ∩ 𝕋[n]^d ≠ ∅`.
    pub fn validate(&self, level: u64) -> Result<()> {
        self.check_shape()?;
        match level {
            1 => Err(Error::InvalidRequirement("level 1 is trivial: no set is almost 1-torsion".into())),
            0 if self.is_degenerate() => {
                Err(Error::InvalidRequirement("level-0 requirements need positive radii".into()))
            }
            0 => Ok(()),
            n => match (0..self.dim()).find(|&i| self.torsion_points(i, n).is_empty()) {
                Some(i) => Err(Error::InvalidRequirement(format!(
                    "box misses T[{n}] in coordinate {i} (center {}, radius {})",
                    self.center[i], self.radius[i]
                ))),
                None => Ok(()),
            },
        }
    }
}

/// "Some element of set `set` must land in `arc` inside `𝕋[level]^d`."
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Requirement {
    pub id: usize,
    #[serde(default)]
    pub set: usize,
    pub level: u64,
    #[serde(rename = "box")]
    pub arc: ArcBox,
}

/// The integer or group element that realizes a requirement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessElement {
    Integer(#[serde(with = "crate::arith::bigint_str")] BigInt),
    Group(Element),
}

/// Certificate that `s·x + offset − y − n` lies within the box radius,
/// where `offset` is the image of the non-pivot part of a group element
/// (zero for integer streams).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub requirement: usize,
    pub element: WitnessElement,
    #[serde(with = "crate::arith::bigint_str")]
    pub s: BigInt,
    #[serde(with = "rational_vec")]
    pub offset: Vec<BigRational>,
    #[serde(with = "crate::arith::bigint_vec")]
    pub shifts: Vec<BigInt>,
    /// The achieved image `s·x + offset` reduced mod 1.
    pub point: TorusPoint,
    /// `radius_i − |s·x_i + offset_i − y_i − n_i|`.
    #[serde(with = "rational_vec")]
    pub margins: Vec<BigRational>,
}

/// Re-checks a witness against its box and the point `x`: recomputes every
/// margin from scratch. Open arcs need positive margins, degenerate
/// coordinates an exact hit.
pub fn verify_witness(w: &Witness, arc: &ArcBox, x: &TorusPoint) -> bool {
    if x.dim() != arc.dim() || w.shifts.len() != arc.dim() || w.margins.len() != arc.dim() {
        return false;
    }
    let s = BigRational::from_integer(w.s.clone());
    (0..arc.dim()).all(|i| {
        let off = w.offset.get(i).cloned().unwrap_or_else(BigRational::zero);
        let n = BigRational::from_integer(w.shifts[i].clone());
        let dev = (&s * &x.coords()[i] + off - &arc.center[i] - n).abs();
        let margin = &arc.radius[i] - &dev;
        margin == w.margins[i]
            && if arc.radius[i].is_zero() { dev.is_zero() } else { margin.is_positive() }
    })
}

/// Images of finitely many generators in `𝕋^d`; the rest are unassigned.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GeneratorAssignment {
    pub dim: usize,
    pub images: BTreeMap<Coord, TorusPoint>,
}

impl GeneratorAssignment {
    pub fn new(dim: usize) -> Self {
        GeneratorAssignment { dim, images: BTreeMap::new() }
    }

    /// Assigns `π(c) = p`, checking torsion compatibility.
    pub fn assign(&mut self, g: &GroupDescriptor, c: Coord, p: TorusPoint) -> Result<()> {
        if p.dim() != self.dim {
            return Err(Error::InvalidInput("image has the wrong dimension".into()));
        }
        let q = g.coord_order(c)?;
        if q != 0 && !p.in_torsion(q) {
            return Err(Error::InvalidInput(format!("image of {c} must have order dividing {q}")));
        }
        self.images.insert(c, p);
        Ok(())
    }

    pub fn get(&self, c: Coord) -> Option<&TorusPoint> {
        self.images.get(&c)
    }

    /// `π(x)`, or `None` if some generator in `supp(x)` is unassigned.
    pub fn image(&self, x: &Element) -> Option<TorusPoint> {
        let mut acc = TorusPoint::zero(self.dim);
        for (c, v) in x.coords() {
            acc = acc.add(&self.images.get(&c)?.scale(&BigInt::from(v)));
        }
        Some(acc)
    }

    /// `π(x)` with unassigned generators sent to `0`.
    pub fn image_partial(&self, x: &Element) -> TorusPoint {
        let mut acc = TorusPoint::zero(self.dim);
        for (c, v) in x.coords() {
            if let Some(p) = self.images.get(&c) {
                acc = acc.add(&p.scale(&BigInt::from(v)));
            }
        }
        acc
    }
}

/// A finite net of requirements expressing density in `𝕋[n]^d`.
///
/// `n = 0`: cubes of radius `eps` centered on the grid of pitch `eps`
/// (`⌈1/eps⌉^d` of them). `n ≥ 2`: one box per point of `𝕋[n]^d`, of radius
/// `eps`, or degenerate when `eps` is `None`. Requirements are numbered in
/// lexicographic order of their centers and refer to set `0`.
pub fn requirement_net(n: u64, d: usize, eps: Option<&BigRational>) -> Result<Vec<Requirement>> {
    if n == 1 {
        return Err(Error::InvalidRequirement("level 1 is trivial: no set is almost 1-torsion".into()));
    }
    if d == 0 {
        return Err(Error::InvalidRequirement("dimension must be positive".into()));
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if let Some(e) = eps {
        if !e.is_positive() || *e > half {
            return Err(Error::InvalidRequirement("eps must lie in (0, 1/2]".into()));
        }
    }
    let (axis, radius): (Vec<BigRational>, BigRational) = if n == 0 {
        let e = eps.ok_or_else(|| Error::InvalidRequirement("level 0 needs eps".into()))?;
        let count = (BigRational::one() / e).ceil().to_integer();
        let count: u64 = count.try_into().map_err(|_| Error::InvalidRequirement("eps too small".into()))?;
        ((0..count).map(|j| e * BigRational::from_integer(BigInt::from(j))).collect(), e.clone())
    } else {
        (
            (0..n).map(|j| BigRational::new(BigInt::from(j), BigInt::from(n))).collect(),
            eps.cloned().unwrap_or_else(BigRational::zero),
        )
    };
    let total = (axis.len() as u128).checked_pow(d as u32).filter(|&t| t <= 1 << 24);
    if total.is_none() {
        return Err(Error::InvalidRequirement("net too large".into()));
    }
    let mut centers: Vec<Vec<BigRational>> = alloc::vec![Vec::new()];
    for _ in 0..d {
        centers = centers
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |a| {
                    let mut q = p.clone();
                    q.push(a.clone());
                    q
                })
            })
            .collect();
    }
    centers
        .into_iter()
        .enumerate()
        .map(|(id, c)| Ok(Requirement { id, set: 0, level: n, arc: ArcBox::cube(c, radius.clone())? }))
        .collect()
}

/// Serde helper used by reports that carry a single rational.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rational(#[serde(with = "rational_str")] pub BigRational);
