//! Decision procedure for almost-`n`-torsion sets.
//!
//! A countably infinite `S ⊆ G[n]` is almost `n`-torsion when every fiber
//! `{x ∈ S : d·x = g}` is finite for every proper divisor `d` of `n`. On the
//! normalized leaves this reduces to two facts:
//!
//! * an infinite affine leaf `a + k·b` (so `b` has infinite order) has
//!   fibers of size at most one for every `d ≥ 1`, since `k ↦ d·k·b` is
//!   injective;
//! * a block stream `x_k = c + u_k` with blocks of order `o = ord(u)` has
//!   `d·x_k = d·c + d·u_k`, and because the `u_k` have disjoint supports this
//!   is injective in `k` when `d·u ≠ 0` and constant (`= d·c`) when `o | d`.
//!
//! For a finite union, let `N` be the lcm of all element orders (`0`
//! absorbing). The union lies in `G[n]` iff `N | n`, its fiber at `(d, g)` is
//! infinite iff some block leaf has `o | d` and `g = d·c`, and the only `n`
//! that can work is `N` itself. Hence:
//!
//! * `N = 0`: almost 0-torsion iff there are no block leaves;
//! * `N ≥ 1`: almost `N`-torsion iff every block leaf has `o = N`.
//!
//! Otherwise the lexicographically smallest infinite fiber `(d, g)` is
//! returned as witness.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::SetExpr;
use crate::arith::lcm;
use crate::group::{proper_divisors, Element, GroupDescriptor};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum TorsionClass {
    AlmostTorsion { n: u64 },
    /// The fiber `{x : d·x = g}` is infinite.
    NotAlmostTorsion { d: u64, g: Element },
    FiniteSet,
}

/// Least `n` with the leaf contained in `G[n]` (`0` if none).
pub fn leaf_level(g: &GroupDescriptor, leaf: &SetExpr) -> u64 {
    match leaf {
        SetExpr::Finite { elements } => elements.iter().fold(1, |acc, x| lcm(acc, g.order_unchecked(x))),
        SetExpr::Affine { .. } => 0,
        SetExpr::BlockStream { c, template, .. } => lcm(g.order_unchecked(c), g.order_unchecked(template)),
        _ => unreachable!("normalized leaves only"),
    }
}

pub fn classify(x: &SetExpr, g: &GroupDescriptor) -> Result<TorsionClass> {
    let x = x.normalize(g)?;
    if !x.is_infinite() {
        return Ok(TorsionClass::FiniteSet);
    }
    let leaves = x.leaves();
    let level = leaves.iter().fold(1, |acc, l| lcm(acc, leaf_level(g, l)));
    let blocks: Vec<(&Element, &Element)> = leaves
        .iter()
        .filter_map(|l| match l {
            SetExpr::BlockStream { c, template, .. } => Some((c, template)),
            _ => None,
        })
        .collect();
    // Proper divisors of 0 are unbounded; any infinite fiber already shows up
    // below the largest block order.
    let bound = blocks.iter().map(|(_, u)| g.order_unchecked(u)).max().unwrap_or(0);
    for d in proper_divisors(level).up_to(if level == 0 { bound } else { u64::MAX }) {
        let k = d as i64;
        let witness = blocks
            .iter()
            .filter(|(_, u)| g.scale(k, u).is_zero())
            .map(|(c, _)| g.scale(k, c))
            .min();
        if let Some(value) = witness {
            return Ok(TorsionClass::NotAlmostTorsion { d, g: value });
        }
    }
    Ok(TorsionClass::AlmostTorsion { n: level })
}

/// A decomposition `X ⊇ shift + set` with `set` almost `level`-torsion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extraction {
    pub shift: Element,
    pub set: SetExpr,
    pub level: u64,
}

/// Finds `g` and an infinite almost-torsion `S` with `g + S ⊆ X`, taking the
/// first infinite leaf. Affine leaves give `g = 0`; a block stream
/// `c + u_k` gives `g = c` and the pure blocks `{u_k}`.
pub fn extract_almost_torsion(x: &SetExpr, g: &GroupDescriptor) -> Result<Option<Extraction>> {
    let x = x.normalize(g)?;
    for leaf in x.leaves() {
        match leaf {
            SetExpr::Affine { .. } => {
                return Ok(Some(Extraction { shift: Element::zero(), set: leaf.clone(), level: 0 }));
            }
            SetExpr::BlockStream { c, template, start, step } => {
                return Ok(Some(Extraction {
                    shift: c.clone(),
                    set: SetExpr::block_stream(Element::zero(), template.clone(), *start, *step),
                    level: g.order_unchecked(template),
                }));
            }
            _ => {}
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberCount {
    pub d: u64,
    pub g: Element,
    pub count: usize,
}

/// Finite evidence for the almost-torsion predicate on a prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixReport {
    pub prefix_len: usize,
    /// lcm of the element orders seen (`0` once an element of infinite order appears).
    pub candidate: u64,
    /// Whether the candidate was already reached on the first half of the prefix.
    pub stable: bool,
    pub divisors: Vec<u64>,
    pub threshold: usize,
    pub fibers: Vec<FiberCount>,
    pub max_fiber: usize,
    pub flagged: Vec<FiberCount>,
    pub consistent: bool,
    pub note: String,
}

/// Fiber statistics over the first `n` elements of an enumeration.
///
/// `d_bound` caps the divisors examined when the candidate level is `0`.
/// Fibers larger than `threshold` (default `⌈√n⌉`) are flagged.
pub fn classify_prefix(
    elements: impl IntoIterator<Item = Element>,
    g: &GroupDescriptor,
    n: usize,
    d_bound: u64,
    threshold: Option<usize>,
) -> PrefixReport {
    let prefix: Vec<Element> = elements.into_iter().take(n).collect();
    let orders: Vec<u64> = prefix.iter().map(|x| g.order_unchecked(x)).collect();
    let candidate = orders.iter().fold(1, |acc, &o| lcm(acc, o));
    let half = orders[..prefix.len().div_ceil(2)].iter().fold(1, |acc, &o| lcm(acc, o));
    let divisors = if candidate == 0 {
        proper_divisors(0).up_to(d_bound)
    } else {
        proper_divisors(candidate).up_to(u64::MAX)
    };
    let threshold = threshold.unwrap_or_else(|| ceil_sqrt(prefix.len()));
    let mut fibers = Vec::new();
    for &d in &divisors {
        let mut counts: BTreeMap<Element, usize> = BTreeMap::new();
        for x in &prefix {
            *counts.entry(g.scale(d as i64, x)).or_default() += 1;
        }
        fibers.extend(counts.into_iter().map(|(value, count)| FiberCount { d, g: value, count }));
    }
    let max_fiber = fibers.iter().map(|f| f.count).max().unwrap_or(0);
    let flagged: Vec<FiberCount> = fibers.iter().filter(|f| f.count > threshold).cloned().collect();
    PrefixReport {
        prefix_len: prefix.len(),
        candidate,
        stable: half == candidate,
        divisors,
        threshold,
        max_fiber,
        consistent: flagged.is_empty(),
        flagged,
        fibers,
        note: "heuristic: fiber finiteness cannot be decided from a finite prefix; \
               flags mark fibers above the threshold"
            .into(),
    }
}

/// [`classify_prefix`] over the canonical enumeration of `x`.
pub fn classify_prefix_set(
    x: &SetExpr,
    g: &GroupDescriptor,
    n: usize,
    d_bound: u64,
    threshold: Option<usize>,
) -> Result<PrefixReport> {
    let x = x.normalize(g)?;
    Ok(classify_prefix(x.enumerate(g), g, n, d_bound, threshold))
}

fn ceil_sqrt(n: usize) -> usize {
    let mut r = 0;
    while r * r < n {
        r += 1;
    }
    r
}
