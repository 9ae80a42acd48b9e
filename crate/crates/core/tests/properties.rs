//! Property tests over the loop operations: action laws, norm
//! identities, retraction idempotence, and the exact lattice predicates.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use loopmoment_core::liegroup::{enumerate_lattice, is_admissible, LatticeVector};
use loopmoment_core::loops::{random_loop, random_tangent, AlgebraicLoop};
use loopmoment_core::moment::{moment, symplectic_form};
use loopmoment_core::Loop64;

fn seeded_loop(seed: u64, order: usize) -> Loop64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_loop::<f64, _>(2, order, 0.6, &mut rng).expect("random loop")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rotation_is_an_action(seed in 0u64..1000, s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let lp = seeded_loop(seed, 2);
        let a = lp.rotate(s).rotate(t);
        let b = lp.rotate(s + t);
        prop_assert!(a.h1_distance_sq(&b).sqrt() < 1e-9);
        // rotations preserve the invariants and the order
        a.validate().unwrap();
        prop_assert_eq!(a.order(), lp.order());
    }

    #[test]
    fn h1_formula_matches_quadrature(seed in 0u64..1000, order in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tangent = random_tangent::<f64, _>(2, order, 1.0, &mut rng);
        let a = tangent.series().h1_norm_sq();
        let b = tangent.series().h1_norm_sq_quadrature();
        prop_assert!((a - b).abs() < 1e-10 * (1.0 + a));
    }

    #[test]
    fn retraction_is_idempotent_on_valid_loops(seed in 0u64..1000) {
        let lp = seeded_loop(seed, 2);
        let again = AlgebraicLoop::retract(lp.series()).unwrap();
        prop_assert!(lp.h1_distance_sq(&again).sqrt() < 1e-10);
    }

    #[test]
    fn symplectic_form_is_antisymmetric(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xi = random_tangent::<f64, _>(2, 2, 1.0, &mut rng);
        let eta = random_tangent::<f64, _>(2, 2, 1.0, &mut rng);
        let a = symplectic_form(&xi, &eta).unwrap();
        let b = symplectic_form(&eta, &xi).unwrap();
        prop_assert!((a + b).abs() < 1e-10);
    }

    #[test]
    fn moment_is_invariant_under_the_torus_action(seed in 0u64..500) {
        let lp = seeded_loop(seed, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef);
        let t = loopmoment_core::liegroup::random_torus_element::<f64, _>(2, &mut rng);
        let s: f64 = 1.1;
        let moved = lp.conjugate(&t).unwrap().rotate_left(s);
        prop_assert!(moment(&moved).distance(&moment(&lp)) < 1e-8);
    }

    #[test]
    fn admissible_vectors_are_regular(c0 in -6i64..6, c1 in -6i64..6, q in 1u64..12) {
        let x = LatticeVector::new(vec![c0, c1, -(c0 + c1)]).unwrap();
        if is_admissible(&x, q).unwrap() {
            prop_assert!(x.is_regular());
        }
    }

    #[test]
    fn lattice_enumeration_is_nested(r1 in 0.0f64..4.0, r2 in 0.0f64..4.0) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let small = enumerate_lattice(2, lo);
        let large = enumerate_lattice(2, hi);
        for x in &small {
            prop_assert!(large.contains(x));
        }
    }
}
