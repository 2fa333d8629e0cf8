mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use joinlab::joining::{
    diagonal_invariance_defect, disintegrate, face_independence_defect, joining_from_operator_into,
    operator_from_joining, product_joining, push_joining, subsets, JoiningTensor, MeasureTensor,
};
use joinlab::markov::{dist_w, koopman, theta, MarkovOperator};
use joinlab::mixing::{correlation, fiber_projection, mixed_set_correlation, OffsetVector};
use joinlab::rational::{int, ratio};
use joinlab::skew::{
    as_automorphism, cocycle_product, relative_mixing_fraction, rigidity_statistic, SkewProduct,
};
use joinlab::space::{compose, halmos_distance, product_space};
use joinlab::torus::{character_coefficient, fourier_joining, Z2kContext};
use joinlab::{ActionGenerators, Automorphism, FiniteSpace, MeasurableSet, Rational};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn perm(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn auto(space: &Arc<FiniteSpace>, p: Vec<usize>) -> Automorphism {
    Automorphism::new(space.clone(), p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn halmos_is_a_metric(
        (a, b, c) in (1usize..=16).prop_flat_map(|n| (perm(n), perm(n), perm(n)))
    ) {
        let space = FiniteSpace::uniform(a.len());
        let (p, q, r) = (auto(&space, a), auto(&space, b), auto(&space, c));
        let pq = halmos_distance(&p, &q).unwrap();
        let qr = halmos_distance(&q, &r).unwrap();
        let pr = halmos_distance(&p, &r).unwrap();
        prop_assert!(pq >= Rational::zero());
        prop_assert_eq!(&pq, &halmos_distance(&q, &p).unwrap());
        prop_assert!(pr <= &pq + &qr);
        prop_assert_eq!(pq.is_zero(), p == q);
    }

    #[test]
    fn compose_is_associative((a, b, c) in (1usize..=10).prop_flat_map(|n| (perm(n), perm(n), perm(n)))) {
        let space = FiniteSpace::uniform(a.len());
        let (p, q, r) = (auto(&space, a), auto(&space, b), auto(&space, c));
        let id = Automorphism::identity(space);
        let left = compose(&compose(&p, &q).unwrap(), &r).unwrap();
        let right = compose(&p, &compose(&q, &r).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        prop_assert_eq!(compose(&id, &p).unwrap(), p.clone());
        prop_assert_eq!(compose(&p, &id).unwrap(), p);
    }

    #[test]
    fn product_space_has_unit_mass(weights in prop::collection::vec(prop::collection::vec(1i64..7, 1..4), 1..4)) {
        let spaces: Vec<_> = weights.iter().map(|w| {
            let t: i64 = w.iter().sum();
            FiniteSpace::new(w.iter().map(|&x| ratio(x, t)).collect()).unwrap()
        }).collect();
        let prod = product_space(&spaces).unwrap();
        prop_assert!(prod.weights().iter().sum::<Rational>().is_one());
    }

    #[test]
    fn koopman_anti_homomorphism((a, b) in (1usize..=8).prop_flat_map(|n| (perm(n), perm(n)))) {
        let space = FiniteSpace::uniform(a.len());
        let (p, q) = (auto(&space, a), auto(&space, b));
        let lhs = koopman(&compose(&p, &q).unwrap());
        prop_assert_eq!(lhs, koopman(&q).then(&koopman(&p)).unwrap());
        prop_assert_eq!(dist_w(&koopman(&p), &koopman(&p)).unwrap(), int(0));
    }

    #[test]
    fn cocycle_identity(seed in any::<u64>(), nb in 1usize..8, nf in 1usize..6, p in 0u64..32, q in 0u64..32) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = FiniteSpace::uniform(nb);
        let fiber = FiniteSpace::uniform(nf);
        let s = common::random_uniform_automorphism(&mut rng, &base);
        let cocycle = (0..nb).map(|_| common::random_uniform_automorphism(&mut rng, &fiber)).collect();
        let r = SkewProduct::new(s.clone(), fiber, cocycle).unwrap();
        for x in 0..nb {
            let lhs = cocycle_product(&r, x, p + q);
            let sp = s.power(p as i64).apply(x);
            let rhs = compose(&cocycle_product(&r, sp, q), &cocycle_product(&r, x, p)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
        let joint = as_automorphism(&r);
        prop_assert!(joinlab::space::is_measure_preserving(joint.permutation(), joint.space()).unwrap());
    }

    #[test]
    fn statistics_stay_in_range(seed in any::<u64>(), nb in 1usize..7, nf in 1usize..5, p in 1u64..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = common::random_space(&mut rng, nb);
        let fiber = FiniteSpace::uniform(nf);
        let s = joinlab::skew::random_automorphism(&base, &mut rng);
        let r = joinlab::skew::sample_random_extension(&s, &fiber, seed, joinlab::SampleMode::IidCocycle);
        let a = MeasurableSet::new(base.clone(), (0..nb).filter(|i| i % 2 == 0)).unwrap();
        let rig = rigidity_statistic(&r, &a, 3, p).unwrap();
        prop_assert!(rig >= int(0) && rig <= a.measure());
        let frac = relative_mixing_fraction(&r, p, &ratio(1, 3)).unwrap();
        prop_assert!(frac >= int(0) && frac <= int(1));
    }

    #[test]
    fn markov_powers_approach_theta(raw in prop::collection::vec(1i64..5, 3)) {
        // positive doubly stochastic circulant M on uniform-3
        let total: i64 = raw.iter().sum();
        let space = FiniteSpace::uniform(3);
        let rows: Vec<Vec<Rational>> = (0..3)
            .map(|i| (0..3).map(|j| ratio(raw[(j + 3 - i) % 3], total)).collect())
            .collect();
        let m = MarkovOperator::new(space.clone(), space.clone(), rows).unwrap();
        let th = theta(space);
        let mut prev = dist_w(&m, &th).unwrap();
        let mut cur = m.clone();
        for _ in 2..=32 {
            cur = cur.then(&m).unwrap();
            let d = dist_w(&cur, &th).unwrap();
            prop_assert!(d <= prev);
            prev = d;
        }
    }

    #[test]
    fn marginal_of_product_is_product(weights in prop::collection::vec(prop::collection::vec(1i64..5, 1..4), 2..5), pick in any::<u8>()) {
        let spaces: Vec<_> = weights.iter().map(|w| {
            let t: i64 = w.iter().sum();
            FiniteSpace::new(w.iter().map(|&x| ratio(x, t)).collect()).unwrap()
        }).collect();
        let coords: Vec<usize> = (0..spaces.len()).filter(|i| (pick >> i) & 1 == 1).collect();
        prop_assume!(!coords.is_empty());
        let v = product_joining(&spaces).unwrap();
        let sub: Vec<_> = coords.iter().map(|&c| spaces[c].clone()).collect();
        prop_assert_eq!(v.marginal(&coords).unwrap(), product_joining(&sub).unwrap());
    }

    #[test]
    fn face_independence_descends(seed in any::<u64>(), order in 3usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = FiniteSpace::uniform(2);
        let v = common::random_class_m_tensor(&mut rng, &y, &vec![y.clone(); order - 1], 0);
        for m in (2..order).rev() {
            if face_independence_defect(&v, m).unwrap().is_zero() {
                for lower in 1..m {
                    prop_assert!(face_independence_defect(&v, lower).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn disintegrate_then_reassemble(seed in any::<u64>(), nx in 1usize..4, ny in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = common::random_space(&mut rng, nx);
        let y = common::random_space(&mut rng, ny);
        // base (x0, x1) independent, fibers coupled arbitrarily
        let base_w = common::product_weights(&[x.clone(), x.clone()]);
        let fiber_w = common::product_weights(&[y.clone(), y.clone()]);
        let c = common::random_coupling(&mut rng, &base_w, &fiber_w);
        let entries: Vec<_> = (0..nx * nx).flat_map(|b| {
            let c = &c;
            (0..ny * ny).map(move |f| (vec![b / nx, f / ny, b % nx, f % ny], c[b][f].clone()))
        }).collect();
        let v = MeasureTensor::from_sparse(vec![x.clone(), y.clone(), x, y], entries).unwrap();
        let field = disintegrate(&v, &[0, 2]).unwrap();
        prop_assert_eq!(field.reassemble(), v);
    }

    #[test]
    fn koopman_push_preserves_invariance(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = FiniteSpace::uniform(n);
        let rot = Automorphism::new(space.clone(), (0..n).map(|i| (i + 1) % n).collect()).unwrap();
        let action = ActionGenerators::new(space.clone(), vec![rot.clone()]).unwrap();
        // powers of the rotation commute with it
        let ops: Vec<_> = (0..3).map(|_| koopman(&rot.power(rand::Rng::gen_range(&mut rng, 0..n as i64)))).collect();
        let v = joinlab::mixing::offset_joining(&rot, &OffsetVector::new(vec![1, 2]).unwrap());
        prop_assert_eq!(diagonal_invariance_defect(&v, &action).unwrap(), int(0));
        let pushed = push_joining(&v, &ops).unwrap();
        prop_assert_eq!(diagonal_invariance_defect(&pushed, &action).unwrap(), int(0));
    }

    #[test]
    fn operator_pairing_round_trips(seed in any::<u64>(), order in 2usize..5, d_pick in any::<usize>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let source = common::random_space(&mut rng, 2);
        let rest: Vec<_> = (1..order).map(|_| common::random_space(&mut rng, 2)).collect();
        let d = d_pick % order;
        let v = JoiningTensor::new(common::random_class_m_tensor(&mut rng, &source, &rest, d)).unwrap();
        let p = operator_from_joining(&v, d).unwrap();
        prop_assert_eq!(joining_from_operator_into(&p, &rest, d).unwrap(), v);
    }

    #[test]
    fn fourier_round_trip(c1 in -4i64..=4, c2 in -4i64..=4, c3 in -4i64..=4) {
        let ctx = Z2kContext::new(1).unwrap();
        let mut coeffs = BTreeMap::new();
        coeffs.insert(vec![0, 0, 0], int(1));
        coeffs.insert(vec![1, 1, 0], ratio(c1, 16));
        coeffs.insert(vec![0, 1, 1], ratio(c2, 16));
        coeffs.insert(vec![1, 1, 1], ratio(c3, 16));
        let v = fourier_joining(&ctx, 3, &coeffs).unwrap();
        for chars in joinlab::joining::Shape::new(vec![2, 2, 2]).tuples() {
            let expect = coeffs.get(&chars).cloned().unwrap_or_else(Rational::zero);
            prop_assert_eq!(character_coefficient(&v, &chars).unwrap(), expect);
        }
    }

    #[test]
    fn single_character_detects_edge_marginal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = Z2kContext::new(2).unwrap();
        let y = ctx.space().clone();
        let edge = common::random_space(&mut rng, 4);
        // random measure on Y × Y whose first edge may or may not be uniform
        let first = if rand::Rng::gen_bool(&mut rng, 0.5) { y.clone() } else { edge };
        let c = common::random_coupling(&mut rng, first.weights(), y.weights());
        let entries: Vec<_> = (0..4).flat_map(|a| { let c = &c; (0..4).map(move |b| (vec![a, b], c[a][b].clone())) }).collect();
        let v = MeasureTensor::from_sparse(vec![y.clone(), y.clone()], entries).unwrap();
        let uniform_edge = v.marginal(&[0]).unwrap().entries() == y.weights();
        let vanish = (1..4).all(|a| character_coefficient(&v, &[a, 0]).unwrap().is_zero());
        prop_assert_eq!(uniform_edge, vanish);
    }

    #[test]
    fn fiber_projection_contracts(seed in any::<u64>(), nb in 1usize..5, nf in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = common::random_space(&mut rng, nb);
        let fiber = common::random_space(&mut rng, nf);
        let r = SkewProduct::product_with_identity(Automorphism::identity(base.clone()), fiber.clone());
        let f: Vec<Rational> = (0..nb * nf).map(|_| ratio(rand::Rng::gen_range(&mut rng, -5..6), 3)).collect();
        let pf = fiber_projection(&r, &f).unwrap();
        let lifted: Vec<Rational> = pf.iter().flat_map(|v| std::iter::repeat_n(v.clone(), nf)).collect();
        prop_assert_eq!(fiber_projection(&r, &lifted).unwrap(), pf.clone());
        let joint = r.joint_space();
        let norm_f: Rational = f.iter().zip(joint.weights()).map(|(v, w)| v * v * w).sum();
        let norm_pf: Rational = pf.iter().zip(base.weights()).map(|(v, w)| v * v * w).sum();
        prop_assert!(norm_pf <= norm_f);
    }

    #[test]
    fn mixed_correlation_reduces_to_correlation(seed in any::<u64>(), m in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = joinlab::skew::sample_random_extension(
            &common::random_uniform_automorphism(&mut rng, &FiniteSpace::uniform(4)),
            &FiniteSpace::uniform(3),
            seed,
            joinlab::SampleMode::IidCocycle,
        );
        let verticals: Vec<MeasurableSet> = (0..=m)
            .map(|_| MeasurableSet::new(r.base().clone(), (0..4).filter(|_| rand::Rng::gen_bool(&mut rng, 0.6))).unwrap())
            .collect();
        let full_h = vec![MeasurableSet::full(r.fiber().clone()); m];
        let k = OffsetVector::new((0..m).map(|_| rand::Rng::gen_range(&mut rng, 1..6)).collect()).unwrap();
        let lifted: Vec<MeasurableSet> = verticals.iter().map(|a| {
            MeasurableSet::new(r.joint_space(), a.atoms().flat_map(|x| (0..3).map(move |y| x * 3 + y))).unwrap()
        }).collect();
        prop_assert_eq!(
            mixed_set_correlation(&r, &verticals, &full_h, &k).unwrap(),
            correlation(&as_automorphism(&r), &lifted, &k).unwrap()
        );
    }
}

#[test]
fn face_subsets_cover_all_faces() {
    assert_eq!(subsets(4, 2).len(), 6);
    assert_eq!(subsets(5, 0), vec![Vec::<usize>::new()]);
}

#[test]
fn product_joining_single_space_roundtrip() {
    let u = FiniteSpace::uniform(3);
    let v = product_joining(&[u.clone(), u.clone()]).unwrap();
    assert_eq!(operator_from_joining(&v, 1).unwrap(), theta(u));
}
