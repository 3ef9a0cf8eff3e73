//! Simulating `S`-orbits `{x0 + s·α : s ∈ S}` of a rotation.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::ArcBox;
use crate::equidist::{discrepancy_report, DiscrepancyReport, TorusPoint};
use crate::group::{Coord, GroupDescriptor};
use crate::setexpr::SetExpr;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum FlowAlpha {
    Exact(TorusPoint),
    Numeric(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxHits {
    pub hits: usize,
    /// Position in the prefix of the first visit.
    pub first_hit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowReport {
    pub visited: usize,
    /// Number of distinct points (exact rotations only).
    pub distinct: Option<usize>,
    pub boxes: Vec<BoxHits>,
    pub discrepancy: DiscrepancyReport,
    /// The visited points in floating point.
    pub points: Vec<Vec<f64>>,
}

/// Visits `x0 + s·α` for the first `n` elements `s` of `S ⊆ ℤ`.
pub fn flow_simulate(s: &SetExpr, alpha: &FlowAlpha, x0: &TorusPoint, boxes: &[ArcBox], n: usize) -> Result<FlowReport> {
    if n == 0 {
        return Err(Error::InvalidInput("prefix length must be positive".into()));
    }
    let dim = x0.dim();
    let alpha_dim = match alpha {
        FlowAlpha::Exact(a) => a.dim(),
        FlowAlpha::Numeric(a) => a.len(),
    };
    if alpha_dim != dim || boxes.iter().any(|b| b.dim() != dim) {
        return Err(Error::InvalidInput("alpha, x0 and boxes must share a dimension".into()));
    }
    let z = GroupDescriptor::free(1);
    let s = s.normalize(&z)?;
    let mut boxes_out = alloc::vec![BoxHits { hits: 0, first_hit: None }; boxes.len()];
    let mut points = Vec::new();
    let mut distinct = BTreeSet::new();
    for (i, x) in s.enumerate(&z).take(n).enumerate() {
        let k = x.get(Coord::Free(0));
        let (inside, p): (Vec<bool>, Vec<f64>) = match alpha {
            FlowAlpha::Exact(a) => {
                let p = x0.add(&a.scale(&BigInt::from(k)));
                let inside = boxes.iter().map(|b| b.contains(&p)).collect();
                let f = p.to_f64();
                distinct.insert(p);
                (inside, f)
            }
            FlowAlpha::Numeric(a) => {
                let x0f = x0.to_f64();
                let p: Vec<f64> = a
                    .iter()
                    .zip(&x0f)
                    .map(|(ai, xi)| {
                        let v = xi + k as f64 * ai;
                        let r = v - libm::floor(v);
                        if r >= 1.0 { 0.0 } else { r }
                    })
                    .collect();
                (boxes.iter().map(|b| b.contains_f64(&p)).collect(), p)
            }
        };
        for (h, hit) in boxes_out.iter_mut().zip(inside) {
            if hit {
                h.hits += 1;
                h.first_hit.get_or_insert(i);
            }
        }
        points.push(p);
    }
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(FlowReport {
        visited: points.len(),
        distinct: matches!(alpha, FlowAlpha::Exact(_)).then_some(distinct.len()),
        boxes: boxes_out,
        discrepancy: discrepancy_report(&points)?,
        points,
    })
}
