mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zariski_core::group::{Element, GroupDescriptor};
use zariski_core::setexpr::{classify, classify_prefix_set};
use zariski_core::{SetExpr, TorsionClass};

/// `(E / gcd(E, n))·x` lies in `G[n]`.
fn torsion_element(g: &GroupDescriptor, rng: &mut impl Rng, n: u64) -> Element {
    let e = common::exponent(g);
    let x = common::element(g, rng, 3);
    g.scale((e / num_integer::gcd(e, n)) as i64, &x)
}

fn block_union(g: &GroupDescriptor, rng: &mut impl Rng) -> SetExpr {
    SetExpr::union((0..rng.gen_range(1..=3)).map(|_| common::block_stream(g, rng)).collect())
}

proptest! {
    #[test]
    fn never_level_one(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::bounded_group(&mut rng);
        let x = common::set_expr(&g, &mut rng);
        prop_assert_ne!(classify(&x, &g).unwrap(), TorsionClass::AlmostTorsion { n: 1 });
    }

    #[test]
    fn stable_under_renormalization(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::bounded_group(&mut rng);
        let x = common::set_expr(&g, &mut rng);
        let nx = x.normalize(&g).unwrap();
        prop_assert_eq!(nx.normalize(&g).unwrap(), nx.clone());
        prop_assert_eq!(classify(&x, &g).unwrap(), classify(&nx, &g).unwrap());
    }

    #[test]
    fn thinned_streams_keep_level(seed in any::<u64>(), j in 0u64..5, m in 1u64..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::bounded_group(&mut rng);
        let s = common::block_stream(&g, &mut rng);
        let SetExpr::BlockStream { c, template, start, step } = s.clone() else { unreachable!() };
        if let TorsionClass::AlmostTorsion { n } = classify(&s, &g).unwrap() {
            let thin = SetExpr::block_stream(c, template, start + j * step, step * m);
            prop_assert_eq!(classify(&thin, &g).unwrap(), TorsionClass::AlmostTorsion { n });
        }
    }

    #[test]
    fn torsion_translates_keep_class(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::bounded_group(&mut rng);
        let x = common::set_expr(&g, &mut rng);
        if let TorsionClass::AlmostTorsion { n } = classify(&x, &g).unwrap() {
            let t = torsion_element(&g, &mut rng, n);
            prop_assert!(g.scale(n as i64, &t).is_zero());
            prop_assert_eq!(classify(&SetExpr::translate(t, x), &g).unwrap(), TorsionClass::AlmostTorsion { n });
        }
    }

    #[test]
    fn free_level_zero_scales_infinite(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = common::bounded_group(&mut rng);
        let g = GroupDescriptor::new(rng.gen_range(1..=2), b.finite_orders().to_vec(), b.tail_pattern().to_vec()).unwrap();
        let x = common::set_expr(&g, &mut rng);
        if classify(&x, &g).unwrap() == (TorsionClass::AlmostTorsion { n: 0 }) {
            for n in 1..=12 {
                prop_assert!(x.scale_set(n, &g).unwrap().is_infinite());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prefix_consistency(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::bounded_group(&mut rng);
        let x = block_union(&g, &mut rng);
        match classify(&x, &g).unwrap() {
            TorsionClass::AlmostTorsion { n } => {
                for len in [16, 64, 256] {
                    let r = classify_prefix_set(&x, &g, len, 12, None).unwrap();
                    prop_assert_eq!(n % r.candidate, 0);
                    prop_assert!(r.flagged.iter().all(|f| n % f.d != 0), "{:?}", r.flagged);
                }
            }
            TorsionClass::NotAlmostTorsion { d, g: value } => {
                let nx = x.normalize(&g).unwrap();
                let counts: Vec<usize> = [16, 64, 256]
                    .iter()
                    .map(|&len| {
                        nx.enumerate_prefix(&g, len).iter().filter(|y| g.scale(d as i64, y) == value).count()
                    })
                    .collect();
                prop_assert!(counts[0] < counts[1] && counts[1] < counts[2], "{:?}", counts);
            }
            TorsionClass::FiniteSet => prop_assert!(false, "block streams are infinite"),
        }
    }
}

#[test]
fn generators_reach_every_class() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut at, mut nat, mut fin, mut thin_streams) = (0, 0, 0, 0);
    for _ in 0..400 {
        let g = common::bounded_group(&mut rng);
        match classify(&common::set_expr(&g, &mut rng), &g).unwrap() {
            TorsionClass::AlmostTorsion { .. } => at += 1,
            TorsionClass::NotAlmostTorsion { .. } => nat += 1,
            TorsionClass::FiniteSet => fin += 1,
        }
        if matches!(classify(&common::block_stream(&g, &mut rng), &g).unwrap(), TorsionClass::AlmostTorsion { .. }) {
            thin_streams += 1;
        }
    }
    assert!(at > 40 && nat > 40 && fin > 10 && thin_streams > 40, "{at} {nat} {fin} {thin_streams}");
}
