#![allow(dead_code)]

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use zariski_core::group::{Coord, Element, GroupDescriptor};
use zariski_core::equidist::FormalReal;
use zariski_core::SetExpr;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn divisors_ge2(n: u64) -> Vec<u64> {
    (2..=n).filter(|d| n % d == 0).collect()
}

fn lcm(a: u64, b: u64) -> u64 {
    num_integer::lcm(a, b)
}

/// A group with a tail and exponent dividing some `e ≤ 12`.
pub fn bounded_group(rng: &mut impl Rng) -> GroupDescriptor {
    let e = rng.gen_range(2..=12u64);
    let divs = divisors_ge2(e);
    let tail: Vec<u64> = (0..rng.gen_range(1..=2)).map(|_| *divs.choose(rng).unwrap()).collect();
    let finite: Vec<u64> = (0..rng.gen_range(0..=2)).map(|_| *divs.choose(rng).unwrap()).collect();
    GroupDescriptor::new(0, finite, tail).unwrap()
}

pub fn exponent(g: &GroupDescriptor) -> u64 {
    g.finite_orders().iter().chain(g.tail_pattern()).fold(1, |a, &q| lcm(a, q))
}

/// Random element on the finite part and tail indices `< tail_bound`.
pub fn element(g: &GroupDescriptor, rng: &mut impl Rng, tail_bound: u64) -> Element {
    let mut cs = Vec::new();
    for i in 0..g.free_rank() {
        cs.push((Coord::Free(i), rng.gen_range(-3..=3)));
    }
    for (i, &q) in g.finite_orders().iter().enumerate() {
        cs.push((Coord::Finite(i), rng.gen_range(0..q as i64)));
    }
    if g.has_tail() {
        for k in 0..tail_bound {
            if rng.gen_bool(0.4) {
                let q = g.coord_order(Coord::Tail(k)).unwrap();
                cs.push((Coord::Tail(k), rng.gen_range(0..q as i64)));
            }
        }
    }
    g.element(&cs).unwrap()
}

/// Random non-zero template on tail coordinates `[0, step)`.
pub fn template(g: &GroupDescriptor, rng: &mut impl Rng, step: u64) -> Element {
    loop {
        let mut cs = Vec::new();
        for k in 0..step {
            if rng.gen_bool(0.6) {
                let q = g.coord_order(Coord::Tail(k)).unwrap();
                cs.push((Coord::Tail(k), rng.gen_range(0..q as i64)));
            }
        }
        let u = g.element(&cs).unwrap();
        if !u.is_zero() {
            return u;
        }
    }
}

pub fn block_stream(g: &GroupDescriptor, rng: &mut impl Rng) -> SetExpr {
    let m = g.tail_period();
    let step = m * rng.gen_range(1..=2);
    let start = m * rng.gen_range(1..=3);
    let c = element(g, rng, start);
    SetExpr::block_stream(c, template(g, rng, step), start, step)
}

fn leaf(g: &GroupDescriptor, rng: &mut impl Rng) -> SetExpr {
    match rng.gen_range(0..4) {
        0 => SetExpr::finite((0..rng.gen_range(1..=4)).map(|_| element(g, rng, 6)).collect()),
        1 => SetExpr::affine(element(g, rng, 4), element(g, rng, 4)),
        2 => SetExpr::translate(element(g, rng, 3), block_stream(g, rng)),
        _ => block_stream(g, rng),
    }
}

/// Random union of one to three leaves.
pub fn set_expr(g: &GroupDescriptor, rng: &mut impl Rng) -> SetExpr {
    let parts: Vec<SetExpr> = (0..rng.gen_range(1..=3)).map(|_| leaf(g, rng)).collect();
    if parts.len() == 1 {
        parts.into_iter().next().unwrap()
    } else {
        SetExpr::union(parts)
    }
}

pub fn int(g: &GroupDescriptor, k: i64) -> Element {
    g.element(&[(Coord::Free(0), k)]).unwrap()
}

/// Random infinite subset of `ℤ`: an arithmetic progression, possibly
/// unioned with finite noise and translated.
pub fn infinite_int_set(rng: &mut impl Rng) -> SetExpr {
    let z = GroupDescriptor::free(1);
    let mut b = rng.gen_range(1..=9);
    if rng.gen_bool(0.5) {
        b = -b;
    }
    let ap = SetExpr::affine(int(&z, rng.gen_range(-50..=50)), int(&z, b));
    let noise = SetExpr::finite((0..rng.gen_range(0..4)).map(|_| int(&z, rng.gen_range(-100..=100))).collect());
    let s = SetExpr::union(vec![ap, noise]);
    if rng.gen_bool(0.3) {
        SetExpr::translate(int(&z, rng.gen_range(-20..=20)), s)
    } else {
        s
    }
}

pub fn finite_int_set(rng: &mut impl Rng) -> Vec<Element> {
    let z = GroupDescriptor::free(1);
    let mut xs: Vec<i64> = (0..rng.gen_range(0..=10)).map(|_| rng.gen_range(-1000..=1000)).collect();
    xs.sort();
    xs.dedup();
    xs.into_iter().map(|k| int(&z, k)).collect()
}

pub fn nth_primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut k = 2u64;
    while out.len() < n {
        if (2..).take_while(|d| d * d <= k).all(|d| k % d != 0) {
            out.push(k);
        }
        k += 1;
    }
    out
}

/// sup_t |#{x < t}/N − t|, probing both one-sided limits at every sample.
pub fn brute_star(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mut worst: f64 = 0.0;
    for &t in xs {
        let below = xs.iter().filter(|&&x| x < t).count() as f64;
        let upto = xs.iter().filter(|&&x| x <= t).count() as f64;
        worst = worst.max((below / n - t).abs()).max((upto / n - t).abs());
    }
    worst
}

/// Rank of an integer matrix by fraction-free (Bareiss) elimination.
pub fn bareiss_rank(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                m[i][j] = (&m[r][c] * &m[i][j] - &m[i][c] * &m[r][j]) / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// Integer matrix with rows (constant, β_1, …) and columns (1, x_1, …),
/// each column scaled by its common denominator.
pub fn coefficient_matrix(xs: &[FormalReal]) -> Vec<Vec<BigInt>> {
    let symbols: BTreeSet<u32> = xs.iter().flat_map(|x| x.beta.keys().copied()).collect();
    let cols: Vec<FormalReal> = std::iter::once(FormalReal::rational(BigRational::one())).chain(xs.iter().cloned()).collect();
    let entry = |c: &FormalReal, row: Option<u32>| match row {
        None => c.c0.clone(),
        Some(j) => c.beta.get(&j).cloned().unwrap_or_else(BigRational::zero),
    };
    let rows: Vec<Option<u32>> = std::iter::once(None).chain(symbols.iter().map(|&j| Some(j))).collect();
    let scaled: Vec<Vec<BigInt>> = cols
        .iter()
        .map(|c| {
            let den = rows.iter().fold(BigInt::one(), |acc, &r| num_integer::lcm(acc, entry(c, r).denom().clone()));
            rows.iter().map(|&r| (entry(c, r) * BigRational::from_integer(den.clone())).to_integer()).collect()
        })
        .collect();
    (0..rows.len()).map(|i| scaled.iter().map(|col| col[i].clone()).collect()).collect()
}

/// `c₀ + Σ c_j β_j` over `β_1, β_2, β_3` with small random coefficients.
pub fn random_form(rng: &mut impl Rng) -> FormalReal {
    let mut x = FormalReal::rational(rat(rng.gen_range(-6..=6), rng.gen_range(1..=6)));
    for j in 1..=3u32 {
        if rng.gen_bool(0.5) {
            x = x.add(&FormalReal::symbol(j).scale(&rat(rng.gen_range(-4..=4), rng.gen_range(1..=3))));
        }
    }
    x
}
