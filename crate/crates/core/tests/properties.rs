//! Generative property tests for the algebraic invariants.

use commlab::freealg::{parse_poly, FreePoly};
use commlab::matrix::Matrix;
use commlab::scalar::{quat_diff_unit_norms, Scalar, ScalarDomain};
use proptest::prelude::*;

fn arb_rational() -> impl Strategy<Value = Scalar> {
    (-40i64..=40, 1i64..=12).prop_map(|(n, d)| Scalar::rational(n, d))
}

fn arb_quat_rat() -> impl Strategy<Value = Scalar> {
    (
        -9i64..=9,
        -9i64..=9,
        -9i64..=9,
        -9i64..=9,
    )
        .prop_map(|(a, b, c, d)| Scalar::quat_rat_i64(a, b, c, d))
}

fn arb_poly() -> impl Strategy<Value = FreePoly> {
    let term = (
        -5i64..=5,
        proptest::collection::vec(1u32..=3, 0..=4),
    );
    proptest::collection::vec(term, 1..=5).prop_map(|terms| {
        let d = ScalarDomain::Rational;
        FreePoly::from_terms(
            d,
            terms
                .into_iter()
                .map(|(c, w)| (Scalar::from_i64(d, c), w))
                .collect(),
        )
        .unwrap()
    })
}

proptest! {
    #[test]
    fn rational_field_axioms(a in arb_rational(), b in arb_rational(), c in arb_rational()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn quaternion_axioms_and_norm(a in arb_quat_rat(), b in arb_quat_rat(), c in arb_quat_rat()) {
        // associativity and distributivity survive noncommutativity
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        // N(ab) = N(a) N(b), exactly
        let lhs = (&a * &b).quat_norm().unwrap();
        let rhs = &a.quat_norm().unwrap() * &b.quat_norm().unwrap();
        prop_assert_eq!(lhs, rhs);
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn poly_parse_print_roundtrip(f in arb_poly()) {
        let text = f.to_string();
        let back = parse_poly(&text, ScalarDomain::Rational).unwrap();
        prop_assert_eq!(f, back);
    }

    #[test]
    fn tilde_normalize_idempotent(f in arb_poly()) {
        let once = f.tilde_normalize();
        prop_assert_eq!(once.tilde_normalize(), once);
    }

    #[test]
    fn tilde_respects_products(f in arb_poly(), g in arb_poly()) {
        let lhs = f.mul(&g).tilde_normalize();
        let rhs = f.tilde_normalize().mul(&g.tilde_normalize()).tilde_normalize();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn gf_inverse_replay(p in prop::sample::select(vec![3u64, 5, 7, 11]), seed in any::<u64>()) {
        use rand::rngs::StdRng;
        use rand::SeedableRng;
        let domain = ScalarDomain::prime_field(p).unwrap();
        let mut rng = StdRng::seed_from_u64(seed);
        let a = Matrix::random_gf(&mut rng, domain, 3);
        let kernel = a.right_kernel_basis();
        prop_assert_eq!(a.rank() + kernel.len(), 3);
        if a.is_invertible() {
            let inv = a.inverse().unwrap();
            prop_assert_eq!(a.mul(&inv).unwrap(), Matrix::identity(domain, 3));
        }
    }

    #[test]
    fn unit_norm_difference_replay(
        a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in -1.0f64..1.0,
    ) {
        let q = Scalar::quat_f64(a, b, c, d);
        if q.norm_f64().sqrt() <= 2.0 {
            let (u, v) = quat_diff_unit_norms(&q).unwrap();
            prop_assert!((u.norm_f64() - 1.0).abs() <= 1e-10);
            prop_assert!((v.norm_f64() - 1.0).abs() <= 1e-10);
            prop_assert!((&(&u - &v) - &q).norm_f64().sqrt() <= 1e-10);
        }
    }
}
