//! Equidistribution on finite-dimensional tori.
//!
//! Independence questions are answered exactly over formal symbols
//! ([`kronecker_independence`]); Weyl sums and discrepancies are floating
//! point with compensated summation and an explicit error bound.

mod discrepancy;
mod kronecker;
mod weyl;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{format_rational, frac, parse_rational, to_f64};
use crate::{Error, Result};

pub use discrepancy::{
    box_discrepancy_probe, discrepancy_report, reorder_uniform, star_discrepancy_1d,
    star_discrepancy_1d_exact, DiscrepancyReport, Reordering, PROBE_BOXES,
};
pub use kronecker::{kronecker_independence, KroneckerReport};
pub use weyl::{ud_test, ud_test_numeric, weyl_sum, weyl_sum_numeric, UdRow, WeylSum};

/// A point of `𝕋^d = (ℝ/ℤ)^d` with exact rational coordinates in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TorusPoint {
    #[serde(with = "crate::arith::rational_vec")]
    coords: Vec<BigRational>,
}

impl TorusPoint {
    /// Reduces every coordinate mod 1.
    pub fn new(coords: Vec<BigRational>) -> Self {
        TorusPoint { coords: coords.iter().map(frac).collect() }
    }

    pub fn zero(dim: usize) -> Self {
        TorusPoint { coords: alloc::vec![BigRational::zero(); dim] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    /// Re-reduces coordinates (deserialized input may be unreduced).
    pub fn reduced(self) -> Self {
        TorusPoint::new(self.coords)
    }

    /// Membership in `𝕋[n]^d`: every denominator divides `n` (`n ≥ 1`).
    pub fn in_torsion(&self, n: u64) -> bool {
        n >= 1 && self.coords.iter().all(|x| (BigInt::from(n) % x.denom()).is_zero())
    }

    pub fn add(&self, other: &TorusPoint) -> TorusPoint {
        TorusPoint::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, k: &BigInt) -> TorusPoint {
        let k = BigRational::from_integer(k.clone());
        TorusPoint::new(self.coords.iter().map(|a| a * &k).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(to_f64).collect()
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// A non-trivial character `x ↦ exp(2πi k·x)` of `𝕋^d`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CharacterIndex(pub Vec<i64>);

impl CharacterIndex {
    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    /// All non-trivial `k ∈ ℤ^d` with `|k|∞ ≤ k_max`, lexicographically.
    pub fn all_up_to(dim: usize, k_max: i64) -> Vec<CharacterIndex> {
        let mut out: Vec<Vec<i64>> = alloc::vec![Vec::new()];
        for _ in 0..dim {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (-k_max..=k_max).map(move |k| {
                        let mut q = p.clone();
                        q.push(k);
                        q
                    })
                })
                .collect();
        }
        out.into_iter().map(CharacterIndex).filter(|k| !k.is_trivial()).collect()
    }
}

/// `c₀ + Σ c_j β_j`: a real number over rational coefficients and formal
/// symbols `β_1, β_2, …` that are assumed linearly independent over `ℚ`
/// together with `1`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawFormal", into = "RawFormal")]
pub struct FormalReal {
    pub c0: BigRational,
    /// Symbol index (from 1) to nonzero coefficient.
    pub beta: BTreeMap<u32, BigRational>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFormal {
    #[serde(default = "zero_str")]
    c0: String,
    #[serde(default)]
    beta: BTreeMap<u32, String>,
}

fn zero_str() -> String {
    "0".into()
}

impl TryFrom<RawFormal> for FormalReal {
    type Error = Error;
    fn try_from(raw: RawFormal) -> Result<Self> {
        let mut beta = BTreeMap::new();
        for (j, c) in raw.beta {
            if j == 0 {
                return Err(Error::InvalidInput("symbols are numbered from 1".into()));
            }
            let c = parse_rational(&c)?;
            if !c.is_zero() {
                beta.insert(j, c);
            }
        }
        Ok(FormalReal { c0: parse_rational(&raw.c0)?, beta })
    }
}

impl From<FormalReal> for RawFormal {
    fn from(x: FormalReal) -> Self {
        RawFormal {
            c0: format_rational(&x.c0),
            beta: x.beta.iter().map(|(&j, c)| (j, format_rational(c))).collect(),
        }
    }
}

/// Default numeric values: `√2, √3, √5`, continuing with square roots of
/// the following primes.
pub fn default_symbol_value(j: u32) -> f64 {
    let mut p = 1u64;
    for _ in 0..j {
        p += 1;
        while !(2..p).take_while(|d| d * d <= p).all(|d| p % d != 0) {
            p += 1;
        }
    }
    libm::sqrt(p as f64)
}

impl FormalReal {
    pub fn rational(c0: BigRational) -> Self {
        FormalReal { c0, beta: BTreeMap::new() }
    }

    /// `β_j`.
    pub fn symbol(j: u32) -> Self {
        assert!(j >= 1, "symbols are numbered from 1");
        let mut beta = BTreeMap::new();
        beta.insert(j, BigRational::one());
        FormalReal { c0: BigRational::zero(), beta }
    }

    pub fn is_rational(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn add(&self, other: &FormalReal) -> FormalReal {
        let mut beta = self.beta.clone();
        for (&j, c) in &other.beta {
            let v = beta.remove(&j).unwrap_or_else(BigRational::zero) + c;
            if !v.is_zero() {
                beta.insert(j, v);
            }
        }
        FormalReal { c0: &self.c0 + &other.c0, beta }
    }

    pub fn scale(&self, k: &BigRational) -> FormalReal {
        if k.is_zero() {
            return FormalReal::default();
        }
        FormalReal { c0: &self.c0 * k, beta: self.beta.iter().map(|(&j, c)| (j, c * k)).collect() }
    }

    /// Numeric value; symbols missing from `assign` (indexed from `β_1`)
    /// take [`default_symbol_value`].
    pub fn eval(&self, assign: &[f64]) -> f64 {
        self.beta.iter().fold(to_f64(&self.c0), |acc, (&j, c)| {
            let v = assign.get(j as usize - 1).copied().unwrap_or_else(|| default_symbol_value(j));
            acc + to_f64(c) * v
        })
    }
}

/// `1/2 + 3*b1 - b2/4`-style linear forms; `β` may replace `b`.
impl FromStr for FormalReal {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("not a linear form: {s:?}"));
        let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().replace('β', "b");
        if cleaned.is_empty() {
            return Err(bad());
        }
        let mut terms: Vec<String> = Vec::new();
        for (i, ch) in cleaned.char_indices() {
            if ((ch == '+' || ch == '-') && i > 0) || terms.is_empty() {
                terms.push(String::new());
            }
            terms.last_mut().expect("pushed above").push(ch);
        }
        let mut out = FormalReal::default();
        for t in terms {
            let (sign, body) = match t.strip_prefix('-') {
                Some(rest) => (-BigRational::one(), rest),
                None => (BigRational::one(), t.strip_prefix('+').unwrap_or(&t)),
            };
            let term = match body.find('b') {
                None => FormalReal::rational(parse_rational(body)?),
                Some(pos) => {
                    let (coef, sym) = body.split_at(pos);
                    let (sym, div) = match sym.split_once('/') {
                        Some((s, d)) => (s, Some(d)),
                        None => (sym, None),
                    };
                    let j: u32 = sym[1..].parse().map_err(|_| bad())?;
                    if j == 0 {
                        return Err(bad());
                    }
                    let mut k = match coef.strip_suffix('*') {
                        Some(c) => parse_rational(c)?,
                        None if coef.is_empty() => BigRational::one(),
                        None => return Err(bad()),
                    };
                    if let Some(d) = div {
                        let d = parse_rational(d)?;
                        if d.is_zero() {
                            return Err(bad());
                        }
                        k /= d;
                    }
                    FormalReal::symbol(j).scale(&k)
                }
            };
            out = out.add(&term.scale(&sign));
        }
        Ok(out)
    }
}

impl fmt::Display for FormalReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        if !self.c0.is_zero() || self.beta.is_empty() {
            out.push_str(&format_rational(&self.c0));
        }
        for (j, c) in &self.beta {
            let sign = if c.is_negative() { "-" } else { "+" };
            if !out.is_empty() || c.is_negative() {
                out.push_str(sign);
            }
            let a = c.abs();
            if !a.is_one() {
                out.push_str(&format_rational(&a));
                out.push('*');
            }
            out.push_str(&format!("b{j}"));
        }
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn torus_points_reduce() {
        let p = TorusPoint::new(vec![rat(5, 4), rat(-1, 3)]);
        assert_eq!(p.coords(), &[rat(1, 4), rat(2, 3)]);
        assert!(p.in_torsion(12));
        assert!(!p.in_torsion(4));
        assert!(!p.in_torsion(0));
        assert_eq!(p.to_string(), "(1/4, 2/3)");
        let js = serde_json::to_string(&p).unwrap();
        assert_eq!(js, r#"["1/4","2/3"]"#);
    }

    #[test]
    fn characters() {
        assert_eq!(CharacterIndex::all_up_to(1, 2).len(), 4);
        assert_eq!(CharacterIndex::all_up_to(2, 1).len(), 8);
        assert!(CharacterIndex(vec![0, 0]).is_trivial());
    }

    #[test]
    fn formal_reals_parse_and_print() {
        let x: FormalReal = "1/2 + 3*b1 - b2/4".parse().unwrap();
        assert_eq!(x.c0, rat(1, 2));
        assert_eq!(x.beta[&1], rat(3, 1));
        assert_eq!(x.beta[&2], rat(-1, 4));
        assert_eq!(x.to_string(), "1/2+3*b1-1/4*b2");
        assert_eq!(x.to_string().parse::<FormalReal>().unwrap(), x);
        let y: FormalReal = "β1+1/2".parse().unwrap();
        assert_eq!(y.to_string(), "1/2+b1");
        let z: FormalReal = "-b3".parse().unwrap();
        assert_eq!(z.to_string(), "-b3");
        assert!("b0".parse::<FormalReal>().is_err());
        assert!("".parse::<FormalReal>().is_err());
        let js = serde_json::to_string(&x).unwrap();
        assert_eq!(js, r#"{"c0":"1/2","beta":{"1":"3","2":"-1/4"}}"#);
        assert_eq!(serde_json::from_str::<FormalReal>(&js).unwrap(), x);
    }

    #[test]
    fn default_values() {
        assert_eq!(default_symbol_value(1), libm::sqrt(2.0));
        assert_eq!(default_symbol_value(2), libm::sqrt(3.0));
        assert_eq!(default_symbol_value(3), libm::sqrt(5.0));
        assert_eq!(default_symbol_value(4), libm::sqrt(7.0));
        let x: FormalReal = "1/2+b1".parse().unwrap();
        assert!((x.eval(&[]) - (0.5 + libm::sqrt(2.0))).abs() < 1e-15);
    }
}
