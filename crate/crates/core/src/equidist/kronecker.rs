//! Exact test for `{k·(x₁,…,x_d)}` being dense in `𝕋^d`: by Kronecker this
//! holds iff `1, x₁, …, x_d` are linearly independent over `ℚ`.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::FormalReal;
use crate::arith::bigint_vec;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KroneckerReport {
    pub dense: bool,
    /// Rank over `ℚ` of `{1, x₁, …, x_d}`.
    pub rank: usize,
    /// `(m₀, m₁, …, m_d)`, primitive, with `m₀ + Σ m_i x_i = 0`.
    #[serde(with = "option_bigints", default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<Vec<BigInt>>,
}

mod option_bigints {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(transparent)]
    struct Wrap(#[serde(with = "bigint_vec")] Vec<BigInt>);

    pub fn serialize<S: Serializer>(x: &Option<Vec<BigInt>>, s: S) -> Result<S::Ok, S::Error> {
        x.as_ref().map(|v| Wrap(v.clone())).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<BigInt>>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

/// Column `j` of the coefficient matrix holds `1` (for `j = 0`) or `x_j`,
/// rows are indexed by the constant term and the symbols. A kernel vector is
/// read off the reduced row echelon form with the first free column set to 1.
pub fn kronecker_independence(xs: &[FormalReal]) -> KroneckerReport {
    let symbols: BTreeSet<u32> = xs.iter().flat_map(|x| x.beta.keys().copied()).collect();
    let cols: Vec<FormalReal> =
        core::iter::once(FormalReal::rational(BigRational::one())).chain(xs.iter().cloned()).collect();
    let mut m: Vec<Vec<BigRational>> = core::iter::once(cols.iter().map(|c| c.c0.clone()).collect())
        .chain(symbols.iter().map(|j| {
            cols.iter().map(|c| c.beta.get(j).cloned().unwrap_or_else(BigRational::zero)).collect()
        }))
        .collect();

    let ncols = cols.len();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for v in m[row].iter_mut() {
            *v *= &inv;
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pivot_row = m[row].clone();
                for (v, pv) in m[r].iter_mut().zip(&pivot_row) {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    let rank = pivots.len();
    let Some(free) = (0..ncols).find(|c| !pivots.contains(c)) else {
        return KroneckerReport { dense: true, rank, relation: None };
    };
    let mut v = alloc::vec![BigRational::zero(); ncols];
    v[free] = BigRational::one();
    for (r, &pc) in pivots.iter().enumerate() {
        v[pc] = -m[r][free].clone();
    }
    KroneckerReport { dense: false, rank, relation: Some(primitive(&v)) }
}

/// Clears denominators and content; the first nonzero `m_i` with `i ≥ 1` is
/// made positive.
fn primitive(v: &[BigRational]) -> Vec<BigInt> {
    let den = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(den.clone())).to_integer()).collect();
    let content = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let mut ints: Vec<BigInt> = ints.into_iter().map(|x| x / &content).collect();
    if ints[1..].iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        for x in ints.iter_mut() {
            *x = -x.clone();
        }
    }
    ints
}
