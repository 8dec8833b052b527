#![allow(dead_code)]

//! Shared constructors and random generators for the integration suites.

use local_mellin::objects::{Component, ConnectionObject, DiffOpObject, Point};
use local_mellin::{Coefficient, PuiseuxSeries, Var};
use num_integer::Integer;
use rand::rngs::StdRng;
use rand::Rng;

pub fn c(p: i64, q: i64) -> Coefficient {
    Coefficient::from_ratio(p, q)
}

/// Series from `(numerator, p, q)` triples: `p/q * var^(numerator/ram)`.
pub fn series(var: Var, ram: i64, terms: &[(i64, i64, i64)]) -> PuiseuxSeries {
    PuiseuxSeries::new(var, ram, terms.iter().map(|&(k, p, q)| (k, c(p, q))), None)
}

pub fn z(ram: i64, terms: &[(i64, i64, i64)]) -> PuiseuxSeries {
    series(Var::Z, ram, terms)
}

pub fn theta(ram: i64, terms: &[(i64, i64, i64)]) -> PuiseuxSeries {
    series(Var::Theta, ram, terms)
}

pub fn small_rational(rng: &mut StdRng) -> Coefficient {
    let p = rng.gen_range(-5..=5);
    let q = rng.gen_range(1..=4);
    c(p, q)
}

pub fn nonzero_rational(rng: &mut StdRng) -> Coefficient {
    loop {
        let x = small_rational(rng);
        if !x.is_zero() {
            return x;
        }
    }
}

/// Positive base whose powers keep every root the transforms take rational.
pub fn root_base(rng: &mut StdRng) -> Coefficient {
    [c(1, 1), c(2, 1), c(1, 2), c(3, 1), c(2, 3)][rng.gen_range(0..5)].clone()
}

/// Coprime `(r, s)` with both in `1..=3`.
pub fn coprime_pair(rng: &mut StdRng) -> (i64, i64) {
    loop {
        let r = rng.gen_range(1..=3);
        let s = rng.gen_range(1..=3);
        if r.gcd(&s) == 1 {
            return (r, s);
        }
    }
}

/// `lead * var^(-s/r)` plus random terms up to exponent 0.
pub fn slope_series(rng: &mut StdRng, var: Var, r: i64, s: i64, lead: Coefficient) -> PuiseuxSeries {
    let mut terms = vec![(-s, lead)];
    for k in (-s + 1)..=0 {
        if rng.gen_bool(0.6) {
            terms.push((k, small_rational(rng)));
        }
    }
    PuiseuxSeries::new(var, r, terms, None)
}

/// Connection at `0` with `a = -b^s`, so `(-a)^(r/s)` is rational.
pub fn random_f_zero(rng: &mut StdRng) -> (PuiseuxSeries, i64, i64) {
    let (r, s) = coprime_pair(rng);
    let b = root_base(rng);
    let a = -b.pow(s).unwrap();
    (slope_series(rng, Var::Z, r, s, a), r, s)
}

/// Connection at infinity, same compatibility rule as at `0`.
pub fn random_f_infinity(rng: &mut StdRng) -> (PuiseuxSeries, i64, i64) {
    let (r, s) = coprime_pair(rng);
    let b = root_base(rng);
    let a = -b.pow(s).unwrap();
    (slope_series(rng, Var::Zeta, r, s, a), r, s)
}

/// Connection at `x` (regular with probability 1/4), with `-x a` an
/// `(r+s)`-th power in the irregular case. Returns `(f, r, s)`; `s = 0`
/// marks the regular case.
pub fn random_f_finite(rng: &mut StdRng, x: &Coefficient) -> (PuiseuxSeries, i64, i64) {
    if rng.gen_bool(0.25) {
        loop {
            let alpha = small_rational(rng);
            if alpha.as_integer().is_none() {
                return (PuiseuxSeries::constant(Var::Zx, alpha), 1, 0);
            }
        }
    }
    let (r, s) = coprime_pair(rng);
    let b = root_base(rng);
    let a = -(b.pow(r + s).unwrap().checked_div(x).unwrap());
    (slope_series(rng, Var::Zx, r, s, a), r, s)
}

pub fn random_x(rng: &mut StdRng) -> Coefficient {
    [c(1, 1), c(2, 1), c(-1, 1), c(1, 2)][rng.gen_range(0..4)].clone()
}

/// Difference operator of positive order `p/q` with leading coefficient
/// `b^p`, so the inverse transform stays rational.
pub fn random_g_positive(rng: &mut StdRng) -> (PuiseuxSeries, i64, i64) {
    let (p, q) = coprime_pair(rng);
    let b = root_base(rng);
    let mut terms = vec![(p, b.pow(p).unwrap())];
    for k in (p + 1)..=(p + q) {
        if rng.gen_bool(0.6) {
            terms.push((k, small_rational(rng)));
        }
    }
    (PuiseuxSeries::new(Var::Theta, q, terms, None), p, q)
}

pub fn random_jordan(rng: &mut StdRng) -> u32 {
    rng.gen_range(1..=3)
}

pub fn connection(point: Point, f: PuiseuxSeries, m: u32) -> ConnectionObject {
    ConnectionObject::new(point, vec![Component::new(f, m)])
}

pub fn diffop(g: PuiseuxSeries, m: u32) -> DiffOpObject {
    DiffOpObject::new(vec![Component::new(g, m)])
}

pub fn random_connection_at(rng: &mut StdRng, point: &Point) -> PuiseuxSeries {
    match point {
        Point::Zero => random_f_zero(rng).0,
        Point::Infinity => random_f_infinity(rng).0,
        Point::Finite(x) => random_f_finite(rng, x).0,
    }
}

/// `sqrt(2)` to well beyond 160 bits, by Newton iteration on rationals.
pub fn sqrt2() -> num_rational::BigRational {
    let two = num_rational::BigRational::from_integer(2.into());
    let mut x = num_rational::BigRational::new(3.into(), 2.into());
    for _ in 0..8 {
        x = (&x + &two / &x) / num_rational::BigRational::from_integer(2.into());
    }
    x
}
