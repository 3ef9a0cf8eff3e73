//! Brute-force closure guess from a finite prefix, used to cross-check
//! [`zariski_closure`](super::zariski_closure) in bounded groups.
//!
//! Candidates are the cosets `x + G[n]` with `x` in the prefix, `n | exp(G)`,
//! `2 ≤ n ≤ modulus_bound`, that contain at least two prefix points. A
//! family of at most `coset_bound` candidates is admissible when it leaves
//! at most `⌊√N⌋` prefix points uncovered; those stay as finite points. The
//! winner minimizes the multiset of coset sizes (compared largest first, a
//! coset's size being its growth `∏ gcd(n, q_j)` over the tail pattern, then
//! its finite part `∏ gcd(n, d_i)`), then the remainder, then the canonical
//! order. A prefix shorter than `N` means the set is finite and is returned
//! as is.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::{ClosedSet, Coset};
use crate::arith::{divides, gcd};
use crate::group::{Element, GroupDescriptor};
use crate::setexpr::SetExpr;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    pub prefix: usize,
    pub modulus_bound: u64,
    pub coset_bound: usize,
    /// Maximum number of families examined.
    pub budget: u64,
}

impl OracleConfig {
    pub fn new(prefix: usize, modulus_bound: u64, coset_bound: usize) -> Self {
        OracleConfig { prefix, modulus_bound, coset_bound, budget: 1_000_000 }
    }
}

type Score = (u64, u64);

struct Candidate {
    coset: Coset,
    score: Score,
    covers: Vec<u64>,
}

pub fn closure_oracle_prefix(x: &SetExpr, g: &GroupDescriptor, cfg: &OracleConfig) -> Result<ClosedSet> {
    if !g.is_bounded() {
        return Err(Error::InvalidInput("the prefix oracle needs a bounded group".into()));
    }
    let x = x.normalize(g)?;
    let prefix = x.enumerate_prefix(g, cfg.prefix);
    if prefix.len() < cfg.prefix {
        return Ok(ClosedSet::finite_set(g, prefix));
    }
    let n_pts = prefix.len();
    let words = n_pts.div_ceil(64);
    let allowed = isqrt(n_pts);
    let e = g.exponent();

    // Identical coverage: only the smallest (score, coset) can win.
    let mut by_cover: BTreeMap<Vec<u64>, Candidate> = BTreeMap::new();
    for p in &prefix {
        for n in (2..=cfg.modulus_bound).filter(|&n| divides(n, e)) {
            let coset = Coset::new(g, p, n);
            let mut covers = alloc::vec![0u64; words];
            let mut hits = 0;
            for (i, y) in prefix.iter().enumerate() {
                if coset.contains(g, y) {
                    covers[i / 64] |= 1 << (i % 64);
                    hits += 1;
                }
            }
            if hits < 2 {
                continue;
            }
            let score = score(g, coset.modulus);
            let better = by_cover.get(&covers).is_none_or(|c| (score, &coset) < (c.score, &c.coset));
            if better {
                by_cover.insert(covers.clone(), Candidate { coset, score, covers });
            }
        }
    }
    let mut cands: Vec<Candidate> = by_cover.into_values().collect();
    cands.sort_by(|a, b| (a.score, &a.coset).cmp(&(b.score, &b.coset)));

    let mut best: Option<(Vec<Score>, usize, Vec<usize>)> = None;
    let mut examined = 0u64;
    let mut family: Vec<usize> = Vec::new();
    search(&cands, cfg, words, n_pts, allowed, 0, &mut family, &mut examined, &mut best)?;
    let (_, _, chosen) = best.ok_or_else(|| {
        Error::BudgetExceeded(format!(
            "no family of at most {} cosets leaves at most {allowed} of {n_pts} points uncovered",
            cfg.coset_bound
        ))
    })?;
    let cosets: Vec<Coset> = chosen.iter().map(|&i| cands[i].coset.clone()).collect();
    let rest: Vec<Element> =
        prefix.into_iter().filter(|p| !cosets.iter().any(|c| c.contains(g, p))).collect();
    Ok(ClosedSet::from_parts(g, rest, cosets))
}

#[allow(clippy::too_many_arguments)]
fn search(
    cands: &[Candidate],
    cfg: &OracleConfig,
    words: usize,
    n_pts: usize,
    allowed: usize,
    from: usize,
    family: &mut Vec<usize>,
    examined: &mut u64,
    best: &mut Option<(Vec<Score>, usize, Vec<usize>)>,
) -> Result<()> {
    *examined += 1;
    if *examined > cfg.budget {
        return Err(Error::BudgetExceeded(format!("prefix oracle examined more than {} families", cfg.budget)));
    }
    let mut union = alloc::vec![0u64; words];
    for &i in family.iter() {
        for (w, c) in union.iter_mut().zip(&cands[i].covers) {
            *w |= c;
        }
    }
    let covered: usize = union.iter().map(|w| w.count_ones() as usize).sum();
    let remainder = n_pts - covered;
    if remainder <= allowed {
        let mut key: Vec<Score> = family.iter().map(|&i| cands[i].score).collect();
        key.sort_unstable_by(|a, b| b.cmp(a));
        let candidate = (key, remainder, family.clone());
        let wins = match best {
            None => true,
            Some(b) => (&candidate.0, candidate.1) < (&b.0, b.1),
        };
        if wins {
            *best = Some(candidate);
        }
    }
    if family.len() == cfg.coset_bound {
        return Ok(());
    }
    for i in from..cands.len() {
        family.push(i);
        search(cands, cfg, words, n_pts, allowed, i + 1, family, examined, best)?;
        family.pop();
    }
    Ok(())
}

fn score(g: &GroupDescriptor, n: u64) -> Score {
    let tail = g.tail_pattern().iter().map(|&q| gcd(n, q)).product();
    let fin = g.finite_orders().iter().map(|&q| gcd(n, q)).product();
    (tail, fin)
}

fn isqrt(n: usize) -> usize {
    let mut r = 0;
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}
