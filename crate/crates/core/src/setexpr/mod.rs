//! Symbolic countable subsets of a group.
//!
//! A [`SetExpr`] is built from finite lists, affine progressions
//! `{a + k·b : k ∈ ℕ}`, block streams `{c + shift_k(u) : k ∈ ℕ}` whose blocks
//! live on pairwise disjoint tail coordinates, translates and finite unions.
//! [`SetExpr::normalize`] pushes translates into the leaves, folds leaves
//! that denote finite sets into [`SetExpr::Finite`] and flattens unions; all
//! other operations here expect (or produce) that form.

mod classify;

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::group::{Element, GroupDescriptor};
use crate::{Error, Result};

pub use classify::{
    classify, classify_prefix, classify_prefix_set, extract_almost_torsion, leaf_level, Extraction,
    FiberCount, PrefixReport, TorsionClass,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetExpr {
    Finite {
        elements: Vec<Element>,
    },
    /// `{a + k·b : k ∈ ℕ}`.
    Affine { a: Element, b: Element },
    /// `{c + shift_k(template) : k ∈ ℕ}`, block `k` sitting at tail offset
    /// `start + k·step`. The template lives on tail coordinates `[0, step)`.
    BlockStream {
        c: Element,
        template: Element,
        start: u64,
        step: u64,
    },
    Translate {
        g: Element,
        inner: Box<SetExpr>,
    },
    Union {
        parts: Vec<SetExpr>,
    },
}

impl SetExpr {
    pub fn finite(elements: Vec<Element>) -> Self {
        SetExpr::Finite { elements }
    }

    pub fn affine(a: Element, b: Element) -> Self {
        SetExpr::Affine { a, b }
    }

    pub fn block_stream(c: Element, template: Element, start: u64, step: u64) -> Self {
        SetExpr::BlockStream { c, template, start, step }
    }

    pub fn translate(g: Element, inner: SetExpr) -> Self {
        SetExpr::Translate { g, inner: Box::new(inner) }
    }

    pub fn union(parts: Vec<SetExpr>) -> Self {
        SetExpr::Union { parts }
    }

    /// Canonical form denoting the same subset of `g`.
    pub fn normalize(&self, g: &GroupDescriptor) -> Result<SetExpr> {
        let mut leaves = Vec::new();
        self.collect_leaves(g, &Element::zero(), &mut leaves)?;
        Ok(match leaves.len() {
            0 => SetExpr::finite(Vec::new()),
            1 => leaves.pop().unwrap(),
            _ => SetExpr::union(leaves),
        })
    }

    fn collect_leaves(&self, g: &GroupDescriptor, shift: &Element, out: &mut Vec<SetExpr>) -> Result<()> {
        match self {
            SetExpr::Finite { elements } => {
                let mut seen = BTreeSet::new();
                let mut xs = Vec::new();
                for x in elements {
                    g.validate(x)?;
                    let y = g.add(shift, x);
                    if seen.insert(y.clone()) {
                        xs.push(y);
                    }
                }
                if !xs.is_empty() {
                    out.push(SetExpr::finite(xs));
                }
            }
            SetExpr::Affine { a, b } => {
                g.validate(a)?;
                g.validate(b)?;
                let a = g.add(shift, a);
                match g.order_unchecked(b) {
                    0 => out.push(SetExpr::affine(a, b.clone())),
                    ord => {
                        let mut xs = Vec::with_capacity(ord as usize);
                        let mut x = a;
                        for _ in 0..ord {
                            let next = g.add(&x, b);
                            xs.push(x);
                            x = next;
                        }
                        out.push(SetExpr::finite(xs));
                    }
                }
            }
            SetExpr::BlockStream { c, template, start, step } => {
                check_block_stream(g, c, template, *start, *step)?;
                if template.is_zero() {
                    out.push(SetExpr::finite(alloc::vec![g.add(shift, c)]));
                    return Ok(());
                }
                let c = g.add(shift, c);
                // A translate may reach into the block region: peel the
                // overlapping blocks off as a finite part.
                let mut start = *start;
                if let Some(top) = c.max_tail_index() {
                    if top >= start {
                        let peel = (top + 1 - start).div_ceil(*step);
                        let xs = (0..peel)
                            .map(|k| g.add(&c, &template.shift_tail(start + k * step)))
                            .collect();
                        out.push(SetExpr::finite(xs));
                        start += peel * step;
                    }
                }
                out.push(SetExpr::block_stream(c, template.clone(), start, *step));
            }
            SetExpr::Translate { g: t, inner } => {
                g.validate(t)?;
                inner.collect_leaves(g, &g.add(shift, t), out)?;
            }
            SetExpr::Union { parts } => {
                for p in parts {
                    p.collect_leaves(g, shift, out)?;
                }
            }
        }
        Ok(())
    }

    /// Leaves of a normalized expression.
    pub fn leaves(&self) -> Vec<&SetExpr> {
        match self {
            SetExpr::Union { parts } => parts.iter().flat_map(|p| p.leaves()).collect(),
            SetExpr::Translate { inner, .. } => inner.leaves(),
            leaf => alloc::vec![leaf],
        }
    }

    /// True iff the denoted set is infinite. Expects normalized input.
    pub fn is_infinite(&self) -> bool {
        self.leaves()
            .iter()
            .any(|l| matches!(l, SetExpr::Affine { .. } | SetExpr::BlockStream { .. }))
    }

    /// Canonical enumeration: `k` ascending inside a leaf, union parts
    /// round-robin, repeats dropped at their later occurrences.
    pub fn enumerate<'a>(&'a self, g: &'a GroupDescriptor) -> SetIter<'a> {
        SetIter {
            g,
            parts: self.leaves().into_iter().map(LeafIter::new).collect(),
            turn: 0,
            seen: BTreeSet::new(),
        }
    }

    /// First `n` distinct elements of the canonical enumeration.
    pub fn enumerate_prefix(&self, g: &GroupDescriptor, n: usize) -> Vec<Element> {
        self.enumerate(g).take(n).collect()
    }

    /// `{n·x : x ∈ X}` for `n ≥ 1`, normalized.
    pub fn scale_set(&self, n: u64, g: &GroupDescriptor) -> Result<SetExpr> {
        if n == 0 {
            return Err(Error::InvalidInput("scale_set needs n >= 1".into()));
        }
        let k = i64::try_from(n).map_err(|_| Error::InvalidInput("scale factor too large".into()))?;
        self.normalize(g)?.scaled(k, g).normalize(g)
    }

    fn scaled(&self, k: i64, g: &GroupDescriptor) -> SetExpr {
        match self {
            SetExpr::Finite { elements } => {
                SetExpr::finite(elements.iter().map(|x| g.scale(k, x)).collect())
            }
            SetExpr::Affine { a, b } => SetExpr::affine(g.scale(k, a), g.scale(k, b)),
            SetExpr::BlockStream { c, template, start, step } => {
                let u = g.scale(k, template);
                let c = g.scale(k, c);
                if u.is_zero() {
                    SetExpr::finite(alloc::vec![c])
                } else {
                    SetExpr::block_stream(c, u, *start, *step)
                }
            }
            SetExpr::Translate { g: t, inner } => SetExpr::translate(g.scale(k, t), inner.scaled(k, g)),
            SetExpr::Union { parts } => SetExpr::union(parts.iter().map(|p| p.scaled(k, g)).collect()),
        }
    }

    /// Membership test on a normalized expression.
    pub fn contains(&self, g: &GroupDescriptor, x: &Element) -> bool {
        self.leaves().iter().any(|leaf| match leaf {
            SetExpr::Finite { elements } => elements.contains(x),
            SetExpr::Affine { a, b } => affine_index(g, a, b, x).is_some(),
            SetExpr::BlockStream { c, template, start, step } => {
                block_index(g, c, template, *start, *step, x).is_some()
            }
            _ => unreachable!("normalized leaves only"),
        })
    }
}

/// Element `k` of a block stream.
pub fn block_element(g: &GroupDescriptor, c: &Element, template: &Element, start: u64, step: u64, k: u64) -> Element {
    g.add(c, &template.shift_tail(start + k * step))
}

fn block_index(g: &GroupDescriptor, c: &Element, u: &Element, start: u64, step: u64, x: &Element) -> Option<u64> {
    let rest = g.sub(x, c);
    let lo = rest.min_tail_index()?;
    if lo < start || !rest.is_tail_only() {
        return None;
    }
    let k = (lo - start) / step;
    (block_element(g, c, u, start, step, k) == *x).then_some(k)
}

fn affine_index(g: &GroupDescriptor, a: &Element, b: &Element, x: &Element) -> Option<u64> {
    let d = g.sub(x, a);
    if d.is_zero() {
        return Some(0);
    }
    // b has a nonzero free coordinate; it pins k.
    let (c, bv) = b.coords().find(|(c, _)| matches!(c, crate::Coord::Free(_)))?;
    let dv = d.get(c);
    if dv % bv != 0 || dv / bv <= 0 {
        return None;
    }
    let k = dv / bv;
    (g.combine(a, k, b) == *x).then_some(k as u64)
}

fn check_block_stream(g: &GroupDescriptor, c: &Element, u: &Element, start: u64, step: u64) -> Result<()> {
    g.validate(c)?;
    g.validate(u)?;
    let bad = |msg: alloc::string::String| Err(Error::InvalidSet(msg));
    if !g.has_tail() {
        return bad("block stream needs a group with a tail".into());
    }
    let m = g.tail_period();
    if step == 0 || step % m != 0 || start % m != 0 {
        return bad(format!("start {start} and step {step} must be multiples of the tail period {m}"));
    }
    if !u.is_tail_only() || u.max_tail_index().is_some_and(|k| k >= step) {
        return bad(format!("template must live on tail coordinates [0, {step})"));
    }
    if c.max_tail_index().is_some_and(|k| k >= start) {
        return bad(format!("tail support of c reaches the block region starting at {start}"));
    }
    Ok(())
}

enum LeafIter<'a> {
    Finite(core::slice::Iter<'a, Element>),
    Affine { a: &'a Element, b: &'a Element, k: i64 },
    Block { c: &'a Element, u: &'a Element, start: u64, step: u64, k: u64 },
}

impl<'a> LeafIter<'a> {
    fn new(leaf: &'a SetExpr) -> Self {
        match leaf {
            SetExpr::Finite { elements } => LeafIter::Finite(elements.iter()),
            SetExpr::Affine { a, b } => LeafIter::Affine { a, b, k: 0 },
            SetExpr::BlockStream { c, template, start, step } => {
                LeafIter::Block { c, u: template, start: *start, step: *step, k: 0 }
            }
            _ => unreachable!("normalized leaves only"),
        }
    }

    fn next(&mut self, g: &GroupDescriptor) -> Option<Element> {
        match self {
            LeafIter::Finite(it) => it.next().cloned(),
            LeafIter::Affine { a, b, k } => {
                let x = g.combine(a, *k, b);
                *k += 1;
                Some(x)
            }
            LeafIter::Block { c, u, start, step, k } => {
                let x = block_element(g, c, u, *start, *step, *k);
                *k += 1;
                Some(x)
            }
        }
    }
}

/// Iterator over the canonical enumeration of a normalized [`SetExpr`].
pub struct SetIter<'a> {
    g: &'a GroupDescriptor,
    parts: Vec<LeafIter<'a>>,
    turn: usize,
    seen: BTreeSet<Element>,
}

impl Iterator for SetIter<'_> {
    type Item = Element;

    fn next(&mut self) -> Option<Element> {
        let single = self.parts.len() == 1;
        while !self.parts.is_empty() {
            let i = self.turn % self.parts.len();
            match self.parts[i].next(self.g) {
                None => {
                    self.parts.remove(i);
                    continue;
                }
                Some(x) => {
                    self.turn = i + 1;
                    // A single leaf never repeats itself.
                    if single {
                        return Some(x);
                    }
                    if self.seen.insert(x.clone()) {
                        return Some(x);
                    }
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Coord;
    use alloc::vec;

    fn z() -> GroupDescriptor {
        GroupDescriptor::free(1)
    }

    fn int(g: &GroupDescriptor, v: i64) -> Element {
        g.element(&[(Coord::Free(0), v)]).unwrap()
    }

    fn ints(xs: &[Element]) -> Vec<i64> {
        xs.iter().map(|x| x.get(Coord::Free(0))).collect()
    }

    #[test]
    fn translate_of_finite() {
        let g = z();
        let x = SetExpr::translate(int(&g, 3), SetExpr::finite(vec![int(&g, 4)]));
        assert_eq!(x.normalize(&g).unwrap(), SetExpr::finite(vec![int(&g, 7)]));
    }

    #[test]
    fn torsion_affine_folds() {
        let g = GroupDescriptor::new(0, vec![3], vec![]).unwrap();
        let a = g.element(&[(Coord::Finite(0), 1)]).unwrap();
        let b = g.element(&[(Coord::Finite(0), 1)]).unwrap();
        let n = SetExpr::affine(a.clone(), b.clone()).normalize(&g).unwrap();
        assert_eq!(n, SetExpr::finite(vec![a.clone(), g.add(&a, &b), g.combine(&a, 2, &b)]));
        assert!(!n.is_infinite());
    }

    #[test]
    fn empty_union_parts_vanish() {
        let g = z();
        let inner = SetExpr::affine(int(&g, 0), int(&g, 2));
        let x = SetExpr::union(vec![SetExpr::finite(vec![]), inner.clone()]);
        assert_eq!(x.normalize(&g).unwrap(), inner.normalize(&g).unwrap());
    }

    #[test]
    fn infinitude() {
        let g = z();
        assert!(SetExpr::affine(int(&g, 0), int(&g, 2)).normalize(&g).unwrap().is_infinite());
        assert!(!SetExpr::finite(vec![int(&g, 0), int(&g, 1)]).normalize(&g).unwrap().is_infinite());
        let t = GroupDescriptor::tail(2).unwrap();
        let e = t.element(&[(Coord::Tail(0), 1)]).unwrap();
        let bs = SetExpr::block_stream(Element::zero(), e, 0, 1);
        assert!(bs.normalize(&t).unwrap().is_infinite());
    }

    #[test]
    fn enumeration_examples() {
        let g = z();
        let a = SetExpr::affine(int(&g, 1), int(&g, 2)).normalize(&g).unwrap();
        assert_eq!(ints(&a.enumerate_prefix(&g, 3)), [1, 3, 5]);
        let u = SetExpr::union(vec![
            SetExpr::affine(int(&g, 0), int(&g, 2)),
            SetExpr::affine(int(&g, 1), int(&g, 2)),
        ])
        .normalize(&g)
        .unwrap();
        assert_eq!(ints(&u.enumerate_prefix(&g, 4)), [0, 1, 2, 3]);
        let f = SetExpr::finite(vec![int(&g, 5)]).normalize(&g).unwrap();
        assert_eq!(ints(&f.enumerate_prefix(&g, 3)), [5]);
        assert!(f.enumerate_prefix(&g, 0).is_empty());
    }

    #[test]
    fn enumeration_drops_repeats() {
        let g = z();
        let u = SetExpr::union(vec![
            SetExpr::affine(int(&g, 0), int(&g, 1)),
            SetExpr::affine(int(&g, 0), int(&g, 2)),
            SetExpr::finite(vec![int(&g, 3)]),
        ])
        .normalize(&g)
        .unwrap();
        let xs = ints(&u.enumerate_prefix(&g, 8));
        assert_eq!(xs, [0, 3, 1, 2, 4, 6, 8, 5]);
    }

    #[test]
    fn scaling_examples() {
        let g = z();
        let x = SetExpr::affine(int(&g, 1), int(&g, 3));
        assert_eq!(x.scale_set(2, &g).unwrap(), SetExpr::affine(int(&g, 2), int(&g, 6)));
        let f = SetExpr::finite(vec![int(&g, 1), int(&g, 2)]);
        assert_eq!(f.scale_set(3, &g).unwrap(), SetExpr::finite(vec![int(&g, 3), int(&g, 6)]));

        let t = GroupDescriptor::tail(4).unwrap();
        let e0 = t.element(&[(Coord::Tail(0), 1)]).unwrap();
        let two_e = t.element(&[(Coord::Tail(0), 2)]).unwrap();
        let bs = SetExpr::block_stream(e0.clone(), two_e, 1, 1);
        assert_eq!(bs.scale_set(2, &t).unwrap(), SetExpr::finite(vec![t.scale(2, &e0)]));
    }

    #[test]
    fn block_stream_validation() {
        let t = GroupDescriptor::tail(4).unwrap();
        let e0 = t.element(&[(Coord::Tail(0), 1)]).unwrap();
        let e1 = t.element(&[(Coord::Tail(1), 1)]).unwrap();
        // c overlaps the block region
        assert!(SetExpr::block_stream(e0.clone(), e0.clone(), 0, 1).normalize(&t).is_err());
        // template outside [0, step)
        assert!(SetExpr::block_stream(Element::zero(), e1, 0, 1).normalize(&t).is_err());
        // period misalignment
        let t2 = GroupDescriptor::new(0, vec![], vec![2, 3]).unwrap();
        let f0 = t2.element(&[(Coord::Tail(0), 1)]).unwrap();
        assert!(SetExpr::block_stream(Element::zero(), f0.clone(), 0, 3).normalize(&t2).is_err());
        assert!(SetExpr::block_stream(Element::zero(), f0.clone(), 1, 2).normalize(&t2).is_err());
        assert!(SetExpr::block_stream(Element::zero(), f0, 2, 2).normalize(&t2).is_ok());
        // no tail at all
        let z6 = GroupDescriptor::new(0, vec![6], vec![]).unwrap();
        assert!(SetExpr::block_stream(Element::zero(), Element::zero(), 0, 1).normalize(&z6).is_err());
    }

    #[test]
    fn translate_into_block_region_splits() {
        let t = GroupDescriptor::tail(2).unwrap();
        let e0 = t.element(&[(Coord::Tail(0), 1)]).unwrap();
        let e2 = t.element(&[(Coord::Tail(2), 1)]).unwrap();
        let x = SetExpr::block_stream(Element::zero(), e0, 0, 1);
        let shifted = SetExpr::translate(e2.clone(), x.clone());
        let n = shifted.normalize(&t).unwrap();
        assert_eq!(n.leaves().len(), 2);
        let expect: BTreeSet<Element> = x
            .normalize(&t)
            .unwrap()
            .enumerate_prefix(&t, 40)
            .iter()
            .map(|y| t.add(y, &e2))
            .collect();
        let got: BTreeSet<Element> = n.enumerate_prefix(&t, 40).into_iter().collect();
        assert_eq!(expect, got);
        assert!(n.contains(&t, &Element::zero()));
        assert!(!n.contains(&t, &e2));
    }

    #[test]
    fn membership() {
        let g = z();
        let a = SetExpr::affine(int(&g, 1), int(&g, 3)).normalize(&g).unwrap();
        assert!(a.contains(&g, &int(&g, 7)));
        assert!(!a.contains(&g, &int(&g, -2)));
        assert!(!a.contains(&g, &int(&g, 2)));
        let t = GroupDescriptor::tail(4).unwrap();
        let e0 = t.element(&[(Coord::Tail(0), 1)]).unwrap();
        let two = t.element(&[(Coord::Tail(0), 2)]).unwrap();
        let bs = SetExpr::block_stream(e0.clone(), two.clone(), 1, 1).normalize(&t).unwrap();
        let x5 = t.add(&e0, &two.shift_tail(5));
        assert!(bs.contains(&t, &x5));
        assert!(!bs.contains(&t, &two.shift_tail(5)));
    }

    #[test]
    fn json_round_trip() {
        let t = GroupDescriptor::tail(4).unwrap();
        let e0 = t.element(&[(Coord::Tail(0), 1)]).unwrap();
        let x = SetExpr::union(vec![
            SetExpr::block_stream(e0.clone(), t.scale(2, &e0), 1, 1),
            SetExpr::finite(vec![e0]),
        ]);
        let s = serde_json::to_string(&x).unwrap();
        assert!(s.contains(r#""kind":"block_stream""#));
        let back: SetExpr = serde_json::from_str(&s).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
        assert!(serde_json::from_str::<SetExpr>(r#"{"kind":"finite","elements":[],"x":1}"#).is_err());
    }
}
