//! Property tests over the series substrate, canonical forms and transforms.

mod common;

use common::*;
use local_mellin::mellin::{
    inverse_mellin_0_inf, inverse_mellin_inf_inf, inverse_mellin_x_inf, mellin_0_inf,
    mellin_inf_inf, mellin_x_inf,
};
use local_mellin::objects::{
    direct_sum, galois_act, galois_equivalent, is_primitive, iso_equivalent, Component,
    ConnectionObject, DiffOpObject, Flavor, Object, Point,
};
use local_mellin::puiseux::PhiDirection;
use local_mellin::weyl::{global_mellin, DomainElement};
use local_mellin::{Coefficient, FieldConfig, PuiseuxSeries, TransformOptions, Var};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn coefficient() -> impl Strategy<Value = Coefficient> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| c(p, q))
}

fn nonzero_coefficient() -> impl Strategy<Value = Coefficient> {
    coefficient().prop_filter("nonzero", |x| !x.is_zero())
}

/// Exact Laurent polynomial in `theta^(1/ram)`.
fn poly(ram: i64) -> impl Strategy<Value = PuiseuxSeries> {
    prop::collection::vec((-4i64..=4, coefficient()), 0..5)
        .prop_map(move |terms| PuiseuxSeries::new(Var::Theta, ram, terms, None))
}

/// Truncated series with a nonzero leading term and `len` known units.
fn unit_series(ram: i64, len: i64) -> impl Strategy<Value = PuiseuxSeries> {
    (-3i64..=3, nonzero_coefficient(), prop::collection::vec(coefficient(), (len * ram) as usize)).prop_map(
        move |(k, lead, tail)| {
            let mut terms = vec![(k, lead)];
            terms.extend(tail.into_iter().enumerate().map(|(i, c)| (k + 1 + i as i64, c)));
            PuiseuxSeries::new(Var::Theta, ram, terms, Some(k + len * ram))
        },
    )
}

fn opts() -> TransformOptions {
    TransformOptions::default()
}

fn forward(e: &ConnectionObject) -> local_mellin::Result<DiffOpObject> {
    match &e.point {
        Point::Zero => mellin_0_inf(e, &opts()),
        Point::Finite(_) => mellin_x_inf(e, &opts()),
        Point::Infinity => mellin_inf_inf(e, &opts()),
    }
}

fn point_for(rng: &mut StdRng, which: u8) -> Point {
    match which % 3 {
        0 => Point::Zero,
        1 => Point::Finite(random_x(rng)),
        _ => Point::Infinity,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn ring_axioms(a in poly(2), b in poly(2), d in poly(1)) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &d, &a * &(&b * &d));
        prop_assert_eq!(&a * &(&b + &d), &(&a * &b) + &(&a * &d));
        prop_assert!((&a - &a).vanishes());
    }

    #[test]
    fn invert_residual(u in unit_series(2, 4)) {
        let inv = u.invert().unwrap();
        prop_assert!((&u * &inv - PuiseuxSeries::one(Var::Theta)).vanishes());
    }

    #[test]
    fn pow_matches_repeated_product(u in unit_series(1, 4), n in 0i64..=4) {
        let mut prod = PuiseuxSeries::one(Var::Theta);
        for _ in 0..n {
            prod = &prod * &u;
        }
        prop_assert!((u.pow_int(n).unwrap() - prod).vanishes());
    }

    #[test]
    fn square_root_squares_back(tail in prop::collection::vec(coefficient(), 4), b in 1i64..=3) {
        let mut terms = vec![(0, c(b * b, 1))];
        terms.extend(tail.into_iter().enumerate().map(|(i, x)| (i as i64 + 1, x)));
        let s = PuiseuxSeries::new(Var::Theta, 1, terms, Some(5));
        let r = s.pow_rational(local_mellin::puiseux::Exp::new(1, 2), 0).unwrap();
        prop_assert!((&r * &r - s).vanishes());
    }

    #[test]
    fn reversion_residual(p in 1i64..=3, tail in prop::collection::vec(coefficient(), 3)) {
        let mut terms = vec![(p, Coefficient::one())];
        terms.extend(tail.into_iter().enumerate().map(|(i, x)| (p + 1 + i as i64, x)));
        let s = PuiseuxSeries::new(Var::Z, 1, terms, Some(p + 4));
        let h = s.revert(Var::Theta, 0).unwrap();
        let t = PuiseuxSeries::monomial(Var::Theta, Coefficient::one(), 1, 1);
        prop_assert!((s.substitute(&h).unwrap() - t).vanishes());
    }

    #[test]
    fn phi_is_an_automorphism(x in unit_series(2, 3), y in unit_series(2, 3)) {
        let f = |s: &PuiseuxSeries| s.phi(PhiDirection::Forward).unwrap();
        prop_assert_eq!(f(&(&x * &y)), &f(&x) * &f(&y));
        prop_assert_eq!(f(&(&x + &y)), &f(&x) + &f(&y));
        prop_assert_eq!(f(&x).phi(PhiDirection::Inverse).unwrap(), x);
    }

    #[test]
    fn canonicalization_is_idempotent(seed in any::<u64>(), which in 0u8..3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let point = point_for(&mut rng, which);
        let e = ConnectionObject::single(point.clone(), random_connection_at(&mut rng, &point));
        let once = e.canonicalize();
        prop_assert_eq!(once.canonicalize(), once.clone());
        let d = forward(&e).unwrap();
        let again = d.canonicalize().unwrap();
        prop_assert_eq!(again, d);
    }

    #[test]
    fn galois_orbits_are_closed(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (f, r, _) = random_f_zero(&mut rng);
        let f = ConnectionObject::single(Point::Zero, f).canonicalize().components[0].series.clone();
        let cfg = FieldConfig::approx();
        let fa = f.embed(&cfg);
        for j in 0..r {
            let moved = galois_act(&fa, j).unwrap();
            prop_assert!(galois_equivalent(&fa, &moved).unwrap().is_some());
            prop_assert_eq!(
                is_primitive(&moved, r, Flavor::Connection).unwrap(),
                is_primitive(&fa, r, Flavor::Connection).unwrap()
            );
        }
    }

    #[test]
    fn iso_equivalence_is_reflexive_and_symmetric(seed in any::<u64>(), which in 0u8..3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let point = point_for(&mut rng, which);
        let a = Object::Connection(ConnectionObject::single(point.clone(), random_connection_at(&mut rng, &point)));
        let b = Object::Connection(ConnectionObject::single(point.clone(), random_connection_at(&mut rng, &point)));
        prop_assert!(iso_equivalent(&a, &a).unwrap());
        prop_assert_eq!(iso_equivalent(&a, &b).unwrap(), iso_equivalent(&b, &a).unwrap());
    }

    #[test]
    fn transforms_roundtrip(seed in any::<u64>(), which in 0u8..3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let point = point_for(&mut rng, which);
        let e = ConnectionObject::new(
            point.clone(),
            vec![Component::new(random_connection_at(&mut rng, &point), random_jordan(&mut rng))],
        );
        let d = forward(&e).unwrap();
        let back = match &point {
            Point::Zero => inverse_mellin_0_inf(&d, &opts()),
            Point::Finite(x) => inverse_mellin_x_inf(&d, x, &opts()),
            Point::Infinity => inverse_mellin_inf_inf(&d, &opts()),
        }
        .unwrap();
        prop_assert!(iso_equivalent(&Object::Connection(e.canonicalize()), &Object::Connection(back)).unwrap());
    }

    #[test]
    fn transforms_are_additive(seed in any::<u64>(), which in 0u8..3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let point = point_for(&mut rng, which);
        let e1 = ConnectionObject::single(point.clone(), random_connection_at(&mut rng, &point));
        let e2 = ConnectionObject::single(point.clone(), random_connection_at(&mut rng, &point));
        let Object::Connection(sum) = direct_sum(&Object::Connection(e1.clone()), &Object::Connection(e2.clone())).unwrap() else {
            panic!("direct sum changed kind");
        };
        let whole = Object::DiffOp(forward(&sum).unwrap());
        let parts = direct_sum(&Object::DiffOp(forward(&e1).unwrap()), &Object::DiffOp(forward(&e2).unwrap())).unwrap();
        prop_assert!(iso_equivalent(&whole, &parts).unwrap());
    }

    #[test]
    fn global_mellin_is_multiplicative(
        a in prop::collection::vec((-2i64..=2, 0u32..=3, coefficient()), 1..4),
        b in prop::collection::vec((-2i64..=2, 0u32..=3, coefficient()), 1..4),
    ) {
        let build = |v: &[(i64, u32, Coefficient)]| {
            v.iter().fold(DomainElement::zero(), |acc, (i, j, x)| acc.add(&DomainElement::term(x.clone(), *i, *j)))
        };
        let (a, b) = (build(&a), build(&b));
        prop_assert_eq!(global_mellin(&a.mul(&b)), global_mellin(&a).mul(&global_mellin(&b)));
        prop_assert_eq!(global_mellin(&a.commutator(&b)), global_mellin(&a).commutator(&global_mellin(&b)));
    }
}
