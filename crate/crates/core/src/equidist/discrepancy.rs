//! Star discrepancy in one dimension, a probed box discrepancy in higher
//! dimensions, and greedy low-discrepancy reordering.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::TorusPoint;
use crate::arith::rational_vec;
use crate::{Error, Result};

/// Number of probe boxes used by [`box_discrepancy_probe`].
pub const PROBE_BOXES: usize = 4096;

fn sorted_unit(points: &[f64]) -> Result<Vec<f64>> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(x) = points.iter().find(|x| !(0.0..1.0).contains(*x)) {
        return Err(Error::InvalidInput(alloc::format!("{x} is not in [0, 1)")));
    }
    let mut xs = points.to_vec();
    xs.sort_by(f64::total_cmp);
    Ok(xs)
}

/// `D*_N = 1/(2N) + max_i |x_(i) − (2i−1)/(2N)|`, the supremum over `t` of
/// `|#{x_j < t}/N − t|`. Input order does not matter.
pub fn star_discrepancy_1d(points: &[f64]) -> Result<f64> {
    let xs = sorted_unit(points)?;
    let n = xs.len() as f64;
    let worst = xs
        .iter()
        .enumerate()
        .map(|(i, x)| libm::fabs(x - (2 * i + 1) as f64 / (2.0 * n)))
        .fold(0.0, f64::max);
    Ok(0.5 / n + worst)
}

pub fn star_discrepancy_1d_exact(points: &[BigRational]) -> Result<BigRational> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let zero = BigRational::zero();
    let one = BigRational::from_integer(BigInt::from(1));
    if let Some(x) = points.iter().find(|x| **x < zero || **x >= one) {
        return Err(Error::InvalidInput(alloc::format!("{x} is not in [0, 1)")));
    }
    let mut xs = points.to_vec();
    xs.sort();
    let two_n = BigInt::from(2 * xs.len());
    let worst = xs
        .iter()
        .enumerate()
        .map(|(i, x)| (x - BigRational::new(BigInt::from(2 * i + 1), two_n.clone())).abs())
        .max()
        .expect("nonempty");
    Ok(BigRational::new(BigInt::from(1), two_n) + worst)
}

fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while out.len() < count {
        if out.iter().all(|q| p % q != 0) {
            out.push(p);
        }
        p += 1;
    }
    out
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// `max_t |#{x : x < t coordinatewise}/N − vol[0, t)|` over
/// [`PROBE_BOXES`] corners `t` taken from the Halton sequence (indices
/// `1..=PROBE_BOXES`). A lower bound on the star discrepancy.
pub fn box_discrepancy_probe(points: &[Vec<f64>]) -> Result<f64> {
    let dim = points.first().ok_or(Error::EmptyInput)?.len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::InvalidInput("points of mixed dimension".into()));
    }
    let bases = primes(dim);
    let n = points.len() as f64;
    let mut worst = 0.0f64;
    for i in 1..=PROBE_BOXES as u64 {
        let t: Vec<f64> = bases.iter().map(|&b| radical_inverse(i, b)).collect();
        let inside = points.iter().filter(|p| p.iter().zip(&t).all(|(x, t)| x < t)).count();
        let vol: f64 = t.iter().product();
        worst = worst.max(libm::fabs(inside as f64 / n - vol));
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub n: usize,
    pub per_coordinate: Vec<f64>,
    pub coordinate_mean: f64,
    pub box_probe: f64,
}

pub fn discrepancy_report(points: &[Vec<f64>]) -> Result<DiscrepancyReport> {
    let dim = points.first().ok_or(Error::EmptyInput)?.len();
    let per_coordinate = (0..dim)
        .map(|i| {
            let col: Vec<f64> = points.iter().map(|p| p.get(i).copied().unwrap_or(f64::NAN)).collect();
            star_discrepancy_1d(&col)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(DiscrepancyReport {
        n: points.len(),
        coordinate_mean: per_coordinate.iter().sum::<f64>() / dim.max(1) as f64,
        per_coordinate,
        box_probe: box_discrepancy_probe(points)?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reordering {
    /// `order[i]` is the input index placed at position `i`.
    pub order: Vec<usize>,
    /// Coordinate-averaged star discrepancy of each prefix.
    #[serde(with = "rational_vec")]
    pub prefix_discrepancy: Vec<BigRational>,
}

fn mean_discrepancy(prefix: &[&TorusPoint]) -> BigRational {
    let dim = prefix[0].dim();
    let total = (0..dim).fold(BigRational::zero(), |acc, i| {
        let col: Vec<BigRational> = prefix.iter().map(|p| p.coords()[i].clone()).collect();
        acc + star_discrepancy_1d_exact(&col).expect("points are reduced")
    });
    total / BigRational::from_integer(BigInt::from(dim.max(1)))
}

/// Greedy reordering: repeatedly append the remaining point that gives the
/// new prefix the smallest exact (coordinate-averaged) star discrepancy,
/// preferring earlier input on ties.
pub fn reorder_uniform(points: &[TorusPoint]) -> Result<Reordering> {
    let dim = points.first().ok_or(Error::EmptyInput)?.dim();
    if points.iter().any(|p| p.dim() != dim) {
        return Err(Error::InvalidInput("points of mixed dimension".into()));
    }
    for (i, p) in points.iter().enumerate() {
        if let Some(j) = points[..i].iter().position(|q| q == p) {
            return Err(Error::DuplicatePoint { first: j, second: i });
        }
    }
    let mut left: Vec<usize> = (0..points.len()).collect();
    let mut order = Vec::new();
    let mut prefix_discrepancy = Vec::new();
    let mut prefix: Vec<&TorusPoint> = Vec::new();
    while !left.is_empty() {
        let mut best: Option<(BigRational, usize)> = None;
        for (slot, &i) in left.iter().enumerate() {
            prefix.push(&points[i]);
            let d = mean_discrepancy(&prefix);
            prefix.pop();
            if best.as_ref().is_none_or(|(b, _)| d < *b) {
                best = Some((d, slot));
            }
        }
        let (d, slot) = best.expect("nonempty");
        let i = left.remove(slot);
        prefix.push(&points[i]);
        order.push(i);
        prefix_discrepancy.push(d);
    }
    Ok(Reordering { order, prefix_discrepancy })
}
