//! Zariski closure of symbolic sets and the density test.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{ClosedSet, Coset};
use crate::arith::lcm;
use crate::group::{Coord, Element, GroupDescriptor};
use crate::setexpr::SetExpr;
use crate::Result;

/// Exact closure: finite leaves are closed, an infinite leaf decomposes as
/// `h + S` with `S` almost `n`-torsion, and the closure of such a translate
/// is `h + G[n]`.
pub fn zariski_closure(x: &SetExpr, g: &GroupDescriptor) -> Result<ClosedSet> {
    let x = x.normalize(g)?;
    let mut points = Vec::new();
    let mut cosets = Vec::new();
    for leaf in x.leaves() {
        match leaf {
            SetExpr::Finite { elements } => points.extend(elements.iter().cloned()),
            SetExpr::Affine { .. } => cosets.push(Coset::new(g, &Element::zero(), 0)),
            SetExpr::BlockStream { c, template, .. } => {
                cosets.push(Coset::new(g, c, g.order_unchecked(template)))
            }
            _ => unreachable!("normalized leaves only"),
        }
    }
    Ok(ClosedSet::from_parts(g, points, cosets))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum DensityWitness {
    /// Unbounded `G`: `{a + k·b}` with `b` of infinite order keeps `nX` infinite.
    InfiniteOrderLeaf { a: Element, b: Element },
    /// Unbounded `G`: `n·X` is finite.
    FiniteMultiple { n: u64 },
    /// Finite `G`: every element lies in `X`.
    CoversGroup,
    /// Finite `G`: an element missing from `X`.
    Missing { g: Element },
    /// Bounded infinite `G`: for each translate `t` (indexed like
    /// `translates`), the leaf whose blocks make `t + X` almost `m`-torsion.
    Translates { m: u64, translates: Vec<Element>, leaves: Vec<usize> },
    /// Bounded infinite `G`: `t + X` contains no almost `m`-torsion set.
    FailingTranslate { m: u64, t: Element },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityReport {
    pub dense: bool,
    pub witness: DensityWitness,
    pub closure: ClosedSet,
}

/// Decides whether `X` is Zariski-dense in `G`.
///
/// * `G` unbounded: dense iff `n·X` is infinite for every `n ≥ 1`. Multiples
///   of an affine leaf stay infinite; a block stream dies at the order of
///   its template, so without affine leaves `n = lcm` of those orders works.
/// * `G` finite: the topology is discrete, so dense means `X = G`.
/// * `G` bounded and infinite: let `m` be least with `mG` finite. `X` is
///   dense iff every translate `t + X` contains an almost `m`-torsion set.
///   Far enough out, `t + c + u_k` has its blocks off `supp(t)`, and it is
///   almost `m`-torsion iff `ord(u) = m` and `m·(t + c) = 0`. As `m` kills
///   every tail coordinate, only the finite invariant factors of `t` matter,
///   and the quantifier over `t` becomes a loop over that finite group.
pub fn is_zariski_dense(x: &SetExpr, g: &GroupDescriptor) -> Result<DensityReport> {
    let x = x.normalize(g)?;
    let closure = zariski_closure(&x, g)?;
    let leaves = x.leaves();
    let (dense, witness) = if !g.is_bounded() {
        let affine = leaves.iter().find_map(|l| match l {
            SetExpr::Affine { a, b } => Some((a.clone(), b.clone())),
            _ => None,
        });
        match affine {
            Some((a, b)) => (true, DensityWitness::InfiniteOrderLeaf { a, b }),
            None => {
                let n = leaves.iter().fold(1, |acc, l| match l {
                    SetExpr::BlockStream { template, .. } => lcm(acc, g.order_unchecked(template)),
                    _ => acc,
                });
                (false, DensityWitness::FiniteMultiple { n })
            }
        }
    } else if g.is_finite() {
        match finite_part_elements(g).into_iter().find(|t| !x.contains(g, t)) {
            Some(t) => (false, DensityWitness::Missing { g: t }),
            None => (true, DensityWitness::CoversGroup),
        }
    } else {
        let m = g.tail_pattern().iter().fold(1, |acc, &q| lcm(acc, q));
        let mut translates = Vec::new();
        let mut chosen = Vec::new();
        let mut failing = None;
        for t in finite_part_elements(g) {
            let hit = leaves.iter().position(|l| match l {
                SetExpr::BlockStream { c, template, .. } => {
                    g.order_unchecked(template) == m && g.scale(m as i64, &g.add(&t, c)).is_zero()
                }
                _ => false,
            });
            match hit {
                Some(i) => {
                    translates.push(t);
                    chosen.push(i);
                }
                None => {
                    failing = Some(t);
                    break;
                }
            }
        }
        match failing {
            Some(t) => (false, DensityWitness::FailingTranslate { m, t }),
            None => (true, DensityWitness::Translates { m, translates, leaves: chosen }),
        }
    };
    Ok(DensityReport { dense, witness, closure })
}

/// All elements of `⊕ ℤ/d_i`, in odometer order.
fn finite_part_elements(g: &GroupDescriptor) -> Vec<Element> {
    let mut out = alloc::vec![Element::zero()];
    for (i, &d) in g.finite_orders().iter().enumerate() {
        let unit = g.element(&[(Coord::Finite(i), 1)]).expect("coordinate exists");
        out = out
            .iter()
            .flat_map(|x| (0..d as i64).map(|v| g.combine(x, v, &unit)).collect::<Vec<_>>())
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn tail(g: &GroupDescriptor, k: u64, v: i64) -> Element {
        g.element(&[(Coord::Tail(k), v)]).unwrap()
    }

    #[test]
    fn closure_examples() {
        let z = GroupDescriptor::free(1);
        let one = z.element(&[(Coord::Free(0), 1)]).unwrap();
        let two = z.scale(2, &one);
        let f = SetExpr::finite(vec![one.clone(), two.clone()]);
        assert_eq!(zariski_closure(&f, &z).unwrap(), ClosedSet::finite_set(&z, vec![one, two.clone()]));
        let a = SetExpr::affine(Element::zero(), two);
        assert_eq!(zariski_closure(&a, &z).unwrap(), ClosedSet::whole(&z));

        let g = GroupDescriptor::tail(4).unwrap();
        let b = SetExpr::block_stream(Element::zero(), tail(&g, 0, 2), 0, 1);
        assert_eq!(zariski_closure(&b, &g).unwrap().to_string(), "G[2]");
        let e0 = tail(&g, 0, 1);
        let b = SetExpr::block_stream(e0, tail(&g, 0, 2), 1, 1);
        assert_eq!(zariski_closure(&b, &g).unwrap().to_string(), "e0+G[2]");
    }

    #[test]
    fn density_examples() {
        let z = GroupDescriptor::free(1);
        let two = z.element(&[(Coord::Free(0), 2)]).unwrap();
        let r = is_zariski_dense(&SetExpr::affine(Element::zero(), two), &z).unwrap();
        assert!(r.dense);

        let g2 = GroupDescriptor::tail(2).unwrap();
        let basis = SetExpr::block_stream(Element::zero(), tail(&g2, 0, 1), 0, 1);
        let r = is_zariski_dense(&basis, &g2).unwrap();
        assert!(r.dense);
        assert!(matches!(r.witness, DensityWitness::Translates { m: 2, .. }));

        let g4 = GroupDescriptor::tail(4).unwrap();
        let halves = SetExpr::block_stream(Element::zero(), tail(&g4, 0, 2), 0, 1);
        let r = is_zariski_dense(&halves, &g4).unwrap();
        assert!(!r.dense);
        assert_eq!(r.witness, DensityWitness::FailingTranslate { m: 4, t: Element::zero() });
        assert_eq!(r.closure.to_string(), "G[2]");
    }

    #[test]
    fn unbounded_without_affine_leaves() {
        let g = GroupDescriptor::new(1, vec![], vec![3]).unwrap();
        let z1 = g.element(&[(Coord::Free(0), 1)]).unwrap();
        let x = SetExpr::block_stream(z1, tail(&g, 0, 1), 0, 1);
        let r = is_zariski_dense(&x, &g).unwrap();
        assert_eq!((r.dense, r.witness), (false, DensityWitness::FiniteMultiple { n: 3 }));
        let r = is_zariski_dense(&SetExpr::finite(vec![]), &g).unwrap();
        assert_eq!(r.witness, DensityWitness::FiniteMultiple { n: 1 });
    }

    #[test]
    fn finite_part_matters_in_bounded_groups() {
        // ℤ/3 ⊕ ⊕ℤ/2: m = 2 and 2·f0 ≠ 0, so the offset must cancel f0's order.
        let g = GroupDescriptor::new(0, vec![3], vec![2]).unwrap();
        let basis = SetExpr::block_stream(Element::zero(), tail(&g, 0, 1), 0, 1);
        let r = is_zariski_dense(&basis, &g).unwrap();
        assert!(!r.dense);
        assert!(!r.closure.is_whole(&g));
        let f0 = g.element(&[(Coord::Finite(0), 1)]).unwrap();
        let parts: Vec<SetExpr> =
            (0..3).map(|v| SetExpr::block_stream(g.scale(v, &f0), tail(&g, 0, 1), 0, 1)).collect();
        let r = is_zariski_dense(&SetExpr::union(parts), &g).unwrap();
        assert!(r.dense);
        assert!(r.closure.is_whole(&g));
    }

    #[test]
    fn finite_groups() {
        let g = GroupDescriptor::new(0, vec![2, 2], vec![]).unwrap();
        let all = SetExpr::finite(g.enumerate(4));
        assert!(is_zariski_dense(&all, &g).unwrap().dense);
        let some = SetExpr::finite(g.enumerate(3));
        let r = is_zariski_dense(&some, &g).unwrap();
        assert!(!r.dense);
        assert!(matches!(r.witness, DensityWitness::Missing { .. }));
    }
}
