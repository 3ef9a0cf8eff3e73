//! Normalized Weyl sums `|(1/N) Σ exp(2πi k·x_j)|` and the table test.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{CharacterIndex, TorusPoint};
use crate::arith::{frac, to_f64};
use crate::{Error, Result};

const EPS: f64 = f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylSum {
    pub magnitude: f64,
    /// Argument of the normalized sum, in `(-π, π]`.
    pub phase: f64,
    /// Absolute bound on the floating-point error of `magnitude`.
    pub bound: f64,
}

/// Neumaier's compensated sum.
#[derive(Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Sums unit vectors at the given phases (fractions of a turn), each known
/// to within `phase_err` turns.
fn sum_phases(phases: impl Iterator<Item = (f64, f64)>) -> Result<WeylSum> {
    let (mut re, mut im) = (Compensated::default(), Compensated::default());
    let mut n = 0usize;
    let mut worst = 0.0f64;
    for (theta, err) in phases {
        let angle = 2.0 * PI * theta;
        re.add(libm::cos(angle));
        im.add(libm::sin(angle));
        worst = worst.max(err);
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let nf = n as f64;
    let (re, im) = (re.value() / nf, im.value() / nf);
    // Per term: phase error (2π·err plus the rounding of 2πθ) and libm's
    // sub-ulp cos/sin; the compensated sums add 2ε relative plus N·ε²; the
    // division and hypot add a few more ulps.
    let term = 2.0 * PI * (worst + EPS) + 4.0 * EPS;
    let bound = term + 4.0 * EPS + nf * EPS * EPS + 4.0 * EPS;
    Ok(WeylSum { magnitude: libm::hypot(re, im), phase: libm::atan2(im, re), bound })
}

fn check_dims(dim: usize, k: &CharacterIndex) -> Result<()> {
    if k.0.len() != dim {
        return Err(Error::InvalidInput(alloc::format!(
            "character has dimension {} but points have dimension {dim}",
            k.0.len()
        )));
    }
    Ok(())
}

/// Weyl sum over exact points: each phase `k·x_j mod 1` is computed exactly
/// and rounded once.
pub fn weyl_sum(points: &[TorusPoint], k: &CharacterIndex) -> Result<WeylSum> {
    let first = points.first().ok_or(Error::EmptyInput)?;
    check_dims(first.dim(), k)?;
    if points.iter().any(|p| p.dim() != first.dim()) {
        return Err(Error::InvalidInput("points of mixed dimension".into()));
    }
    let ks: Vec<BigRational> = k.0.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect();
    sum_phases(points.iter().map(|p| {
        let dot = p.coords().iter().zip(&ks).fold(BigRational::zero(), |acc, (x, k)| acc + x * k);
        (to_f64(&frac(&dot)), EPS)
    }))
}

/// Weyl sum over floating-point samples (coordinates taken as given).
pub fn weyl_sum_numeric(points: &[Vec<f64>], k: &CharacterIndex) -> Result<WeylSum> {
    let first = points.first().ok_or(Error::EmptyInput)?;
    check_dims(first.len(), k)?;
    if points.iter().any(|p| p.len() != first.len()) {
        return Err(Error::InvalidInput("points of mixed dimension".into()));
    }
    let d = first.len() as f64;
    sum_phases(points.iter().map(|p| {
        let mut dot = 0.0;
        let mut size = 0.0;
        for (x, &kv) in p.iter().zip(&k.0) {
            dot += kv as f64 * x;
            size += libm::fabs(kv as f64 * x);
        }
        let theta = dot - libm::floor(dot);
        (theta, (d + 1.0) * EPS * (size + 1.0))
    }))
}

/// One line of the uniform-distribution table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UdRow {
    pub k: CharacterIndex,
    pub magnitude: f64,
    pub bound: f64,
    /// `magnitude ≤ 1/m`.
    pub pass: bool,
}

fn table(
    dim: usize,
    k_max: i64,
    m: u64,
    mut sum: impl FnMut(&CharacterIndex) -> Result<WeylSum>,
) -> Result<Vec<UdRow>> {
    if m == 0 || k_max < 1 {
        return Err(Error::InvalidInput("need k_max >= 1 and m >= 1".into()));
    }
    let limit = 1.0 / m as f64;
    CharacterIndex::all_up_to(dim, k_max)
        .into_iter()
        .map(|k| {
            let w = sum(&k)?;
            Ok(UdRow { pass: w.magnitude <= limit, magnitude: w.magnitude, bound: w.bound, k })
        })
        .collect()
}

/// Checks `|(1/N) Σ χ_k(x_j)| ≤ 1/m` for every non-trivial `k` with
/// `|k|∞ ≤ k_max`.
pub fn ud_test(points: &[TorusPoint], k_max: i64, m: u64) -> Result<Vec<UdRow>> {
    let dim = points.first().ok_or(Error::EmptyInput)?.dim();
    table(dim, k_max, m, |k| weyl_sum(points, k))
}

pub fn ud_test_numeric(points: &[Vec<f64>], k_max: i64, m: u64) -> Result<Vec<UdRow>> {
    let dim = points.first().ok_or(Error::EmptyInput)?.len();
    table(dim, k_max, m, |k| weyl_sum_numeric(points, k))
}
