use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Coord, Element, GroupDescriptor};
use crate::arith::gcd;

/// The free block of a subgroup built from `G[n]` or `mG`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreePart {
    Zero,
    Full,
    /// `mℤ` in every free coordinate.
    Multiples(u64),
}

/// The subgroup of order `order` inside `ℤ/modulus`, i.e. the multiples of
/// `modulus / order`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicSub {
    pub modulus: u64,
    pub order: u64,
}

impl CyclicSub {
    pub fn contains(&self, residue: u64) -> bool {
        residue % (self.modulus / self.order) == 0
    }
}

/// A subgroup of `G` described coordinate by coordinate.
///
/// `tail[j]` applies to every tail coordinate `k` with `k mod m = j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupSpec {
    pub free: FreePart,
    pub finite: Vec<CyclicSub>,
    pub tail: Vec<CyclicSub>,
}

impl SubgroupSpec {
    pub fn contains(&self, g: &GroupDescriptor, x: &Element) -> bool {
        x.coords().all(|(c, v)| match c {
            Coord::Free(_) => match self.free {
                FreePart::Zero => false,
                FreePart::Full => true,
                FreePart::Multiples(m) => v % m as i64 == 0,
            },
            Coord::Finite(i) => self.finite[i].contains(v as u64),
            Coord::Tail(k) => self.tail[(k % g.tail_period()) as usize].contains(v as u64),
        })
    }

    pub fn is_zero(&self, g: &GroupDescriptor) -> bool {
        (g.free_rank() == 0 || self.free == FreePart::Zero)
            && self.finite.iter().chain(&self.tail).all(|s| s.order == 1)
    }

    pub fn is_whole(&self, g: &GroupDescriptor) -> bool {
        (g.free_rank() == 0 || self.free == FreePart::Full)
            && self.finite.iter().chain(&self.tail).all(|s| s.order == s.modulus)
    }

    /// Finite iff no free directions survive and the tail part is zero.
    pub fn is_finite(&self, g: &GroupDescriptor) -> bool {
        (g.free_rank() == 0 || self.free == FreePart::Zero) && self.tail.iter().all(|s| s.order == 1)
    }

    fn build(g: &GroupDescriptor, free: FreePart, order: impl Fn(u64) -> u64) -> Self {
        let sub = |&q: &u64| CyclicSub { modulus: q, order: order(q) };
        SubgroupSpec {
            free,
            finite: g.finite_orders().iter().map(sub).collect(),
            tail: g.tail_pattern().iter().map(sub).collect(),
        }
    }
}

/// `G[n] = {x : n·x = 0}`, with `G[0] = G`.
pub fn n_torsion(g: &GroupDescriptor, n: u64) -> SubgroupSpec {
    let free = if n == 0 { FreePart::Full } else { FreePart::Zero };
    SubgroupSpec::build(g, free, |q| gcd(n, q))
}

/// `mG = {m·x : x ∈ G}` for `m ≥ 1`.
pub fn scale_group(g: &GroupDescriptor, m: u64) -> SubgroupSpec {
    assert!(m >= 1, "scale_group needs m >= 1");
    let free = if m == 1 { FreePart::Full } else { FreePart::Multiples(m) };
    SubgroupSpec::build(g, free, |q| q / gcd(m, q))
}

/// Proper divisors `d ∉ {0, n}` of `n`.
///
/// Every positive integer properly divides `0`, so `n = 0` yields the
/// symbolic [`ProperDivisors::All`]; callers bound it with an exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProperDivisors {
    All,
    Finite(Vec<u64>),
}

impl ProperDivisors {
    /// Materializes the list, capping the infinite case at `bound`.
    pub fn up_to(&self, bound: u64) -> Vec<u64> {
        match self {
            ProperDivisors::All => (1..=bound).collect(),
            ProperDivisors::Finite(ds) => ds.iter().copied().filter(|&d| d <= bound).collect(),
        }
    }

    pub fn contains(&self, d: u64) -> bool {
        match self {
            ProperDivisors::All => d >= 1,
            ProperDivisors::Finite(ds) => ds.contains(&d),
        }
    }
}

pub fn proper_divisors(n: u64) -> ProperDivisors {
    if n == 0 {
        return ProperDivisors::All;
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small.retain(|&d| d != n);
    ProperDivisors::Finite(small)
}
