mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zariski_core::equidist::TorusPoint;
use zariski_core::group::{Coord, Element, GroupDescriptor};
use zariski_core::orbit::{
    construct_dense_homomorphism, find_orbit_point, find_orbit_point_in, integer_stream, requirement_net, ArcBox,
    FamilyMember, GeneratorAssignment, HomConfig, OrbitResult, Requirement, Witness,
};
use zariski_core::setexpr::classify;
use zariski_core::{SetExpr, TorsionClass};

fn random_reqs(rng: &mut impl Rng, count: usize, dim: usize, eps: &BigRational) -> Vec<Requirement> {
    (0..count)
        .map(|id| {
            let center = (0..dim).map(|_| common::rat(rng.gen_range(0..1000), 1000)).collect();
            Requirement { id, set: 0, level: 0, arc: ArcBox::cube(center, eps.clone()).unwrap() }
        })
        .collect()
}

/// `|s·x_i + offset_i − y_i − n_i|` recomputed from the raw fields.
fn deviation(w: &Witness, x: &[BigRational], arc: &ArcBox, i: usize) -> BigRational {
    let s = BigRational::from_integer(w.s.clone());
    let off = w.offset.get(i).cloned().unwrap_or_else(BigRational::zero);
    (&s * &x[i] + off - &arc.center[i] - BigRational::from_integer(w.shifts[i].clone())).abs()
}

fn check_witnesses(r: &OrbitResult, reqs: &[Requirement]) -> Result<(), String> {
    if r.witnesses.len() != reqs.len() {
        return Err(format!("{} witnesses for {} requirements", r.witnesses.len(), reqs.len()));
    }
    for (w, q) in r.witnesses.iter().zip(reqs) {
        for i in 0..q.arc.dim() {
            let dev = deviation(w, r.x.coords(), &q.arc, i);
            let margin = &q.arc.radius[i] - &dev;
            if !margin.is_positive() || margin != w.margins[i] {
                return Err(format!("requirement {} coordinate {i}: margin {margin}", q.id));
            }
        }
    }
    Ok(())
}

/// Every point of the arc product after step `j` meets requirements `0..=j`
/// with the recorded `s` and shifts; 16 sample points per step.
fn check_trace(r: &OrbitResult, reqs: &[Requirement]) -> Result<(), String> {
    for (j, step) in r.trace.iter().enumerate() {
        for t in 0..16i64 {
            let p: Vec<BigRational> = step
                .start
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let q = a + &step.length * common::rat((t * 7 + 3 * i as i64) % 16, 16) + &step.length / BigInt::from(33);
                    // the returned point and its shifts are taken mod 1
                    &q - q.floor()
                })
                .collect();
            for (w, q) in r.witnesses[..=j].iter().zip(reqs) {
                for i in 0..p.len() {
                    if deviation(w, &p, &q.arc, i) >= q.arc.radius[i] {
                        return Err(format!("step {j}, sample {t}: requirement {} missed", q.id));
                    }
                }
            }
        }
    }
    Ok(())
}

fn naturals() -> SetExpr {
    let z = GroupDescriptor::free(1);
    SetExpr::affine(common::int(&z, 1), common::int(&z, 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn witnesses_and_trace_sound(seed in any::<u64>(), count in 0usize..5, dim in 1usize..=3, p in 2u32..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eps = BigRational::new(BigInt::one(), BigInt::from(1u64 << p));
        let reqs = random_reqs(&mut rng, count, dim, &eps);
        let r = find_orbit_point(&naturals(), &reqs, dim).unwrap();
        prop_assert_eq!(r.trace.len(), count);
        check_witnesses(&r, &reqs).map_err(TestCaseError::fail)?;
        check_trace(&r, &reqs).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn sparse_streams_terminate(seed in any::<u64>(), count in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reqs = random_reqs(&mut rng, count, 2, &common::rat(1, 8));
        let powers: Vec<BigInt> = (0..400).map(|j| BigInt::one() << j).collect();
        let mut f = BigInt::one();
        let factorials: Vec<BigInt> = (1..150u32).map(|j| { f *= j; f.clone() }).collect();
        for values in [powers, factorials] {
            let r = find_orbit_point_in(&mut integer_stream(values), &reqs, 2).unwrap();
            check_witnesses(&r, &reqs).map_err(TestCaseError::fail)?;
            check_trace(&r, &reqs).map_err(TestCaseError::fail)?;
        }
    }

    #[test]
    fn integer_hom_path_matches(seed in any::<u64>(), count in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reqs = random_reqs(&mut rng, count, 2, &common::rat(1, 16));
        let x = find_orbit_point(&naturals(), &reqs, 2).unwrap().x;
        let z = GroupDescriptor::free(1);
        let fam = [FamilyMember { set: naturals() }];
        let h = construct_dense_homomorphism(&z, &fam, 2, &reqs, &HomConfig::default()).unwrap();
        let one = h.assignment.get(Coord::Free(0)).cloned().unwrap_or_else(|| TorusPoint::zero(2));
        prop_assert_eq!(one, x);
    }
}

/// `Σ v_c·π(c)` from the raw map, or `None` if a generator is unassigned.
fn image(pi: &GeneratorAssignment, x: &Element) -> Option<TorusPoint> {
    let mut acc = TorusPoint::zero(pi.dim);
    for (c, v) in x.coords() {
        acc = acc.add(&pi.images.get(&c)?.scale(&BigInt::from(v)));
    }
    Some(acc)
}

/// One or two block streams on disjoint tail blocks (even and odd periods).
fn torsion_family(g: &GroupDescriptor, rng: &mut impl Rng) -> Vec<FamilyMember> {
    let m = g.tail_period();
    let count = rng.gen_range(1..=2u64);
    (0..count)
        .map(|j| loop {
            let c = common::element(g, rng, 0);
            let s = SetExpr::block_stream(c, common::template(g, rng, m), j * m, count * m);
            if let Ok(TorsionClass::AlmostTorsion { n }) = classify(&s, g) {
                if n >= 2 {
                    break FamilyMember { set: s };
                }
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn torsion_homomorphisms(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::bounded_group(&mut rng);
        let fam = torsion_family(&g, &mut rng);
        let d = rng.gen_range(1..=2);
        let mut reqs = Vec::new();
        for (j, m) in fam.iter().enumerate() {
            let TorsionClass::AlmostTorsion { n } = classify(&m.set, &g).unwrap() else {
                unreachable!()
            };
            let net = requirement_net(n, d, None).unwrap();
            for q in net.into_iter().filter(|_| rng.gen_bool(0.5)) {
                reqs.push(Requirement { id: reqs.len(), set: j, ..q });
            }
        }
        let h = construct_dense_homomorphism(&g, &fam, d, &reqs, &HomConfig::default()).unwrap();
        let pi = &h.assignment;
        // every requirement hit, independently of the library's image map
        for (w, q) in h.witnesses.iter().zip(&reqs) {
            let zariski_core::orbit::WitnessElement::Group(x) = &w.element else { panic!("group witness expected") };
            prop_assert!(fam[q.set].set.normalize(&g).unwrap().contains(&g, x));
            let img = image(pi, x).unwrap();
            prop_assert_eq!(&img, &w.point);
            prop_assert!(q.arc.contains(&img));
        }
        // level correctness on enumerated elements of each S_j
        for (m, &n) in fam.iter().zip(&h.levels) {
            for x in m.set.normalize(&g).unwrap().enumerate_prefix(&g, 64) {
                if let Some(p) = image(pi, &x) {
                    prop_assert!(p.in_torsion(n), "{} -> {}", x, p);
                }
            }
        }
        // homomorphism property on the assigned window
        let window: Vec<Element> = g.enumerate(300).into_iter().filter(|x| image(pi, x).is_some()).collect();
        for _ in 0..40 {
            let x = &window[rng.gen_range(0..window.len())];
            let y = &window[rng.gen_range(0..window.len())];
            prop_assert_eq!(image(pi, &g.add(x, y)).unwrap(), image(pi, x).unwrap().add(&image(pi, y).unwrap()));
        }
        // torsion compatibility of generator images
        for (c, p) in &pi.images {
            prop_assert!(p.in_torsion(g.coord_order(*c).unwrap()));
        }
    }
}

#[test]
fn overlapping_families_hit_the_budget_explicitly() {
    // Both sets walk the same tail coordinates: the second one meets the
    // first one's assignments as forced elements.
    let g = GroupDescriptor::tail(11).unwrap();
    let e0 = g.element(&[(Coord::Tail(0), 1)]).unwrap();
    let e0e1 = g.element(&[(Coord::Tail(0), 1), (Coord::Tail(1), 2)]).unwrap();
    let fam = [
        FamilyMember { set: SetExpr::block_stream(Element::zero(), e0, 0, 1) },
        FamilyMember { set: SetExpr::block_stream(Element::zero(), e0e1, 0, 2) },
    ];
    let mut reqs = Vec::new();
    for set in 0..2 {
        for q in requirement_net(11, 2, None).unwrap() {
            reqs.push(Requirement { id: reqs.len(), set, ..q });
        }
    }
    let err = construct_dense_homomorphism(&g, &fam, 2, &reqs, &HomConfig::default()).unwrap_err();
    assert!(err.is_budget(), "{err}");
    assert!(err.to_string().contains("partial assignment"));
    let roomy = HomConfig { backtrack_budget: 10_000, ..HomConfig::default() };
    let h = construct_dense_homomorphism(&g, &fam, 2, &reqs, &roomy).unwrap();
    for (w, q) in h.witnesses.iter().zip(&reqs) {
        assert!(q.arc.contains(&w.point));
    }
}

#[test]
fn prime_stream_soundness_within_reach() {
    // With 10⁴ primes (largest 104729) the s ≥ 2/len(I) rule allows two
    // requirements at radius 2⁻⁶.
    let primes: Vec<BigInt> = common::nth_primes(10_000).into_iter().map(BigInt::from).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    for _ in 0..20 {
        let reqs = random_reqs(&mut rng, 2, 3, &common::rat(1, 64));
        let r = find_orbit_point_in(&mut integer_stream(primes.clone()), &reqs, 3).unwrap();
        check_witnesses(&r, &reqs).unwrap();
        check_trace(&r, &reqs).unwrap();
    }
    let reqs = random_reqs(&mut rng, 3, 3, &common::rat(1, 64));
    let err = find_orbit_point_in(&mut integer_stream(primes), &reqs, 3).unwrap_err();
    assert!(err.is_budget(), "{err}");
}
