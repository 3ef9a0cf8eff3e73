mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zariski_core::group::{n_torsion, smith_normal_form, Coord, GroupDescriptor};

fn mixed_group(rng: &mut impl Rng) -> GroupDescriptor {
    let g = common::bounded_group(rng);
    GroupDescriptor::new(rng.gen_range(0..=2), g.finite_orders().to_vec(), g.tail_pattern().to_vec()).unwrap()
}

proptest! {
    #[test]
    fn order_divides_under_scaling(seed in any::<u64>(), k in 1i64..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = mixed_group(&mut rng);
        let x = common::element(&g, &mut rng, 4);
        let o = g.element_order(&x).unwrap();
        let ok = g.element_order(&g.scale(k, &x)).unwrap();
        if o != 0 {
            prop_assert_eq!(o % ok, 0);
        }
    }

    #[test]
    fn torsion_membership_matches_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::bounded_group(&mut rng);
        let e = common::exponent(&g);
        prop_assert!(e <= 12);
        let x = common::element(&g, &mut rng, 4);
        let o = g.element_order(&x).unwrap();
        // brute-force order: least k ≥ 1 with k·x = 0
        let brute = (1..=e as i64).find(|&k| g.scale(k, &x).is_zero()).unwrap() as u64;
        prop_assert_eq!(o, brute);
        for n in 1..=12u64 {
            prop_assert_eq!(n_torsion(&g, n).contains(&g, &x), n % o == 0, "n = {}", n);
        }
    }

    #[test]
    fn snf_chain_and_permutation_invariance(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = rng.gen_range(1..=4);
        let cols = rng.gen_range(1..=4);
        let m: Vec<Vec<i64>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(-12..=12)).collect()).collect();
        let d = smith_normal_form(&m);
        for w in d.windows(2) {
            prop_assert!(w[0] != 0 && w[1] % w[0] == 0 || w[1] == 0, "{:?}", d);
        }
        let mut p = m.clone();
        p.reverse();
        let p: Vec<Vec<i64>> = p.into_iter().map(|mut r| { r.rotate_left(1); r }).collect();
        prop_assert_eq!(smith_normal_form(&p), d);
    }

    #[test]
    fn extreme_torsion_levels(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = mixed_group(&mut rng);
        prop_assert!(n_torsion(&g, 1).is_zero(&g));
        prop_assert!(n_torsion(&g, 0).is_whole(&g));
        let x = common::element(&g, &mut rng, 4);
        prop_assert!(n_torsion(&g, 0).contains(&g, &x));
        prop_assert_eq!(n_torsion(&g, 1).contains(&g, &x), x.is_zero());
    }
}

#[test]
fn invariant_factor_normalization() {
    let a = GroupDescriptor::new(0, vec![2, 3], vec![]).unwrap();
    let b = GroupDescriptor::new(0, vec![6], vec![]).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.coord_order(Coord::Finite(0)).unwrap(), 6);
}

#[test]
fn snf_examples() {
    assert_eq!(smith_normal_form(&[vec![2, 0], vec![0, 3]]), vec![1, 6]);
    assert_eq!(smith_normal_form(&[vec![2, 4], vec![6, 8]]), vec![2, 4]);
}

#[test]
fn element_order_examples() {
    let g = GroupDescriptor::new(1, vec![6], vec![]).unwrap();
    assert_eq!(g.element_order(&g.element(&[(Coord::Finite(0), 3)]).unwrap()).unwrap(), 2);
    assert_eq!(g.element_order(&g.element(&[(Coord::Free(0), 1), (Coord::Finite(0), 3)]).unwrap()).unwrap(), 0);
    let h = GroupDescriptor::new(0, vec![6], vec![]).unwrap();
    assert_eq!(h.element_order(&h.element(&[(Coord::Finite(0), 4)]).unwrap()).unwrap(), 3);
}
