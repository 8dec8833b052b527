//! Scalar coefficients: exact rationals and an arbitrary-precision complex
//! fallback.
//!
//! Approximate values are stored as pairs of dyadic rationals rounded to the
//! working precision after every operation, so precision never silently drops
//! below the configured number of bits.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default working precision for the complex field, in bits.
pub const DEFAULT_PRECISION_BITS: u32 = 160;
/// Default relative tolerance for approximate equality.
pub const DEFAULT_TOLERANCE: f64 = 1e-20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldMode {
    Exact,
    Approx,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldConfig {
    pub mode: FieldMode,
    pub precision_bits: u32,
    pub tolerance: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig::exact()
    }
}

impl FieldConfig {
    pub fn exact() -> Self {
        FieldConfig {
            mode: FieldMode::Exact,
            precision_bits: DEFAULT_PRECISION_BITS,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn approx() -> Self {
        FieldConfig {
            mode: FieldMode::Approx,
            ..FieldConfig::exact()
        }
    }

    pub fn approx_with(precision_bits: u32, tolerance: f64) -> Result<Self> {
        let cfg = FieldConfig {
            mode: FieldMode::Approx,
            precision_bits,
            tolerance,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Rejects tolerances that the working precision cannot support.
    pub fn validate(&self) -> Result<()> {
        if self.precision_bits == 0 {
            return Err(Error::InvalidConfig("precision must be positive".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig("tolerance must be a positive real".into()));
        }
        let floor = 2f64.powf(-(self.precision_bits as f64) / 2.0);
        if self.tolerance < floor {
            return Err(Error::InvalidConfig(format!(
                "tolerance {:e} is below 2^(-{}/2) = {:e}",
                self.tolerance, self.precision_bits, floor
            )));
        }
        Ok(())
    }

    pub fn is_exact(&self) -> bool {
        self.mode == FieldMode::Exact
    }

    /// Embeds a rational into the configured field.
    pub fn coefficient(&self, r: BigRational) -> Coefficient {
        match self.mode {
            FieldMode::Exact => Coefficient::Exact(r),
            FieldMode::Approx => Coefficient::approx_from_rational(&r, self.precision_bits, self.tolerance),
        }
    }

    pub fn from_int(&self, n: i64) -> Coefficient {
        self.coefficient(BigRational::from_integer(n.into()))
    }

    /// Converts an existing coefficient into the configured mode.
    pub fn embed(&self, c: &Coefficient) -> Coefficient {
        match (self.mode, c) {
            (FieldMode::Approx, Coefficient::Exact(r)) => {
                Coefficient::approx_from_rational(r, self.precision_bits, self.tolerance)
            }
            _ => c.clone(),
        }
    }

    /// Parses a coefficient literal: `p`, `p/q`, a decimal, or a complex
    /// literal `a+bi`. Decimals and complex literals require approx mode.
    pub fn parse_coefficient(&self, text: &str) -> Result<Coefficient> {
        let c = parse_literal(text, self)?;
        Ok(self.embed(&c))
    }
}

/// Arbitrary-precision complex number with dyadic rational parts.
#[derive(Clone, Debug)]
pub struct ApproxComplex {
    re: BigRational,
    im: BigRational,
    prec: u32,
    tol: f64,
}

impl ApproxComplex {
    pub fn new(re: BigRational, im: BigRational, prec: u32, tol: f64) -> Self {
        ApproxComplex {
            re: round_to_bits(&re, prec),
            im: round_to_bits(&im, prec),
            prec,
            tol,
        }
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    fn to_f64_pair(&self) -> (f64, f64) {
        (
            self.re.to_f64().unwrap_or(0.0),
            self.im.to_f64().unwrap_or(0.0),
        )
    }
}

/// Rounds `x` to roughly `bits` significant bits, returning a dyadic rational.
fn round_to_bits(x: &BigRational, bits: u32) -> BigRational {
    if x.is_zero() {
        return BigRational::zero();
    }
    let n = x.numer();
    let d = x.denom();
    let e = n.bits() as i64 - d.bits() as i64 - bits as i64;
    if e >= 0 {
        // Large magnitude: round to a multiple of 2^e.
        let den = d << (e as usize);
        let m = round_div(n, &den);
        BigRational::from_integer(m << (e as usize))
    } else {
        if d.is_one() {
            return x.clone();
        }
        let sh = (-e) as usize;
        let m = round_div(&(n << sh), d);
        BigRational::new(m, BigInt::one() << sh)
    }
}

/// Integer division rounded to nearest, ties away from zero.
fn round_div(n: &BigInt, d: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    let (q, r) = n.div_rem(d);
    if (&r * &two).abs() >= d.abs() {
        if (n.sign() == Sign::Minus) != (d.sign() == Sign::Minus) {
            q - 1
        } else {
            q + 1
        }
    } else {
        q
    }
}

fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

#[derive(Clone, Debug)]
pub enum Coefficient {
    Exact(BigRational),
    Approx(ApproxComplex),
}

impl Coefficient {
    pub fn zero() -> Self {
        Coefficient::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Coefficient::Exact(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Coefficient::Exact(BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        Coefficient::Exact(BigRational::new(p.into(), q.into()))
    }

    pub fn approx_from_rational(r: &BigRational, prec: u32, tol: f64) -> Self {
        Coefficient::Approx(ApproxComplex::new(r.clone(), BigRational::zero(), prec, tol))
    }

    pub fn approx(re: BigRational, im: BigRational, prec: u32, tol: f64) -> Self {
        Coefficient::Approx(ApproxComplex::new(re, im, prec, tol))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coefficient::Exact(_))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Coefficient::Exact(r) => Some(r),
            Coefficient::Approx(_) => None,
        }
    }

    /// Precision and tolerance when approximate.
    pub fn approx_params(&self) -> Option<(u32, f64)> {
        match self {
            Coefficient::Exact(_) => None,
            Coefficient::Approx(a) => Some((a.prec, a.tol)),
        }
    }

    /// True for exact zero, or for an approximate value below tolerance.
    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Exact(r) => r.is_zero(),
            Coefficient::Approx(a) => {
                let t = rational_from_f64(a.tol);
                a.norm_sqr() <= &t * &t
            }
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Coefficient::Exact(r) => r.is_one(),
            Coefficient::Approx(_) => *self == Coefficient::one(),
        }
    }

    /// Converts to the approximate field at the given precision.
    pub fn to_approx(&self, prec: u32, tol: f64) -> Coefficient {
        match self {
            Coefficient::Exact(r) => Coefficient::approx_from_rational(r, prec, tol),
            Coefficient::Approx(a) => {
                Coefficient::approx(a.re.clone(), a.im.clone(), prec, tol)
            }
        }
    }

    fn as_approx_like(&self, prec: u32, tol: f64) -> ApproxComplex {
        match self {
            Coefficient::Exact(r) => ApproxComplex::new(r.clone(), BigRational::zero(), prec, tol),
            Coefficient::Approx(a) => a.clone(),
        }
    }

    fn binary(
        &self,
        other: &Coefficient,
        exact: impl Fn(&BigRational, &BigRational) -> BigRational,
        approx: impl Fn(&ApproxComplex, &ApproxComplex) -> (BigRational, BigRational),
    ) -> Coefficient {
        match (self, other) {
            (Coefficient::Exact(a), Coefficient::Exact(b)) => Coefficient::Exact(exact(a, b)),
            _ => {
                let (prec, tol) = merged_params(self, other);
                let a = self.as_approx_like(prec, tol);
                let b = other.as_approx_like(prec, tol);
                let (re, im) = approx(&a, &b);
                Coefficient::approx(re, im, prec, tol)
            }
        }
    }

    pub fn inv(&self) -> Result<Coefficient> {
        match self {
            Coefficient::Exact(r) => {
                if r.is_zero() {
                    Err(Error::DivisionByZero)
                } else {
                    Ok(Coefficient::Exact(r.recip()))
                }
            }
            Coefficient::Approx(a) => {
                let n = a.norm_sqr();
                if n.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                Ok(Coefficient::approx(
                    &a.re / &n,
                    -(&a.im / &n),
                    a.prec,
                    a.tol,
                ))
            }
        }
    }

    pub fn checked_div(&self, other: &Coefficient) -> Result<Coefficient> {
        Ok(self * &other.inv()?)
    }

    /// Integer power; negative exponents invert.
    pub fn pow(&self, e: i64) -> Result<Coefficient> {
        let mut base = if e < 0 { self.inv()? } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = match self {
            Coefficient::Exact(_) => Coefficient::one(),
            Coefficient::Approx(a) => Coefficient::approx_from_rational(&BigRational::one(), a.prec, a.tol),
        };
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }

    /// Multiplies by an integer ratio `p/q`.
    pub fn scale(&self, p: i64, q: i64) -> Coefficient {
        self * &Coefficient::from_ratio(p, q)
    }

    /// Approximate modulus as f64 (diagnostics and initial guesses only).
    pub fn abs_f64(&self) -> f64 {
        match self {
            Coefficient::Exact(r) => r.to_f64().unwrap_or(f64::INFINITY).abs(),
            Coefficient::Approx(a) => {
                let (x, y) = a.to_f64_pair();
                x.hypot(y)
            }
        }
    }

    /// Real and imaginary parts as f64.
    pub fn to_f64_pair(&self) -> (f64, f64) {
        match self {
            Coefficient::Exact(r) => (r.to_f64().unwrap_or(f64::NAN), 0.0),
            Coefficient::Approx(a) => a.to_f64_pair(),
        }
    }

    /// Real part as a rational (exact value, or the stored dyadic value).
    pub fn real_part(&self) -> BigRational {
        match self {
            Coefficient::Exact(r) => r.clone(),
            Coefficient::Approx(a) => a.re.clone(),
        }
    }

    /// Total order used for canonical sorting: exact rationals by value,
    /// approximate values by (re, im). Exact values sort before approximate.
    pub fn total_cmp(&self, other: &Coefficient) -> Ordering {
        match (self, other) {
            (Coefficient::Exact(a), Coefficient::Exact(b)) => a.cmp(b),
            (Coefficient::Exact(_), Coefficient::Approx(_)) => Ordering::Less,
            (Coefficient::Approx(_), Coefficient::Exact(_)) => Ordering::Greater,
            (Coefficient::Approx(a), Coefficient::Approx(b)) => {
                if self == other {
                    Ordering::Equal
                } else {
                    a.re.cmp(&b.re).then_with(|| a.im.cmp(&b.im))
                }
            }
        }
    }

    /// Reduces the value modulo `(1/q)Z` into `[0, 1/q)`. Approximate values
    /// have their real part reduced; a value within tolerance of a lattice
    /// point snaps to it.
    pub fn reduce_mod_inv(&self, q: i64) -> Coefficient {
        let step = BigRational::new(BigInt::one(), q.into());
        match self {
            Coefficient::Exact(r) => {
                let k = (r / &step).floor();
                Coefficient::Exact(r - k * &step)
            }
            Coefficient::Approx(a) => {
                let k = (&a.re / &step).floor();
                let mut re = &a.re - k * &step;
                let t = rational_from_f64(a.tol);
                if (&step - &re) <= t {
                    re = BigRational::zero();
                }
                if re.abs() <= t {
                    re = BigRational::zero();
                }
                Coefficient::approx(re, a.im.clone(), a.prec, a.tol)
            }
        }
    }

    /// Returns `Some(n)` when the value is an integer (within tolerance).
    pub fn as_integer(&self) -> Option<BigInt> {
        match self {
            Coefficient::Exact(r) => r.is_integer().then(|| r.to_integer()),
            Coefficient::Approx(a) => {
                let n = a.re.round();
                let c = Coefficient::approx(n.clone(), BigRational::zero(), a.prec, a.tol);
                (c == *self).then(|| n.to_integer())
            }
        }
    }
}

fn merged_params(a: &Coefficient, b: &Coefficient) -> (u32, f64) {
    match (a.approx_params(), b.approx_params()) {
        (Some((p1, t1)), Some((p2, t2))) => (p1.max(p2), t1.max(t2)),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => (DEFAULT_PRECISION_BITS, DEFAULT_TOLERANCE),
    }
}

impl PartialEq for Coefficient {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Coefficient::Exact(a), Coefficient::Exact(b)) => a == b,
            _ => {
                let (prec, tol) = merged_params(self, other);
                let a = self.as_approx_like(prec, tol);
                let b = other.as_approx_like(prec, tol);
                let dre = &a.re - &b.re;
                let dim = &a.im - &b.im;
                let d2 = &dre * &dre + &dim * &dim;
                let scale = BigRational::one().max(a.norm_sqr()).max(b.norm_sqr());
                let t = rational_from_f64(tol);
                d2 <= &t * &t * scale
            }
        }
    }
}

impl<'a> Add<&'a Coefficient> for &'a Coefficient {
    type Output = Coefficient;
    fn add(self, o: &Coefficient) -> Coefficient {
        self.binary(o, |a, b| a + b, |a, b| (&a.re + &b.re, &a.im + &b.im))
    }
}

impl<'a> Sub<&'a Coefficient> for &'a Coefficient {
    type Output = Coefficient;
    fn sub(self, o: &Coefficient) -> Coefficient {
        self.binary(o, |a, b| a - b, |a, b| (&a.re - &b.re, &a.im - &b.im))
    }
}

impl<'a> Mul<&'a Coefficient> for &'a Coefficient {
    type Output = Coefficient;
    fn mul(self, o: &Coefficient) -> Coefficient {
        self.binary(
            o,
            |a, b| a * b,
            |a, b| (&a.re * &b.re - &a.im * &b.im, &a.re * &b.im + &a.im * &b.re),
        )
    }
}

/// Panics on division by zero, like rational division.
impl<'a> Div<&'a Coefficient> for &'a Coefficient {
    type Output = Coefficient;
    fn div(self, o: &Coefficient) -> Coefficient {
        self.checked_div(o).expect("coefficient division by zero")
    }
}

impl Neg for &Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        match self {
            Coefficient::Exact(r) => Coefficient::Exact(-r),
            Coefficient::Approx(a) => Coefficient::Approx(ApproxComplex {
                re: -&a.re,
                im: -&a.im,
                prec: a.prec,
                tol: a.tol,
            }),
        }
    }
}

impl Neg for Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        -&self
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<Coefficient> for Coefficient {
            type Output = Coefficient;
            fn $m(self, o: Coefficient) -> Coefficient {
                (&self).$m(&o)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
owned_binop!(Div, div);

impl From<BigRational> for Coefficient {
    fn from(r: BigRational) -> Self {
        Coefficient::Exact(r)
    }
}

impl From<i64> for Coefficient {
    fn from(n: i64) -> Self {
        Coefficient::from_int(n)
    }
}

/// Exact integer n-th root of a non-negative integer, if it exists.
fn exact_int_root(x: &BigInt, n: u32) -> Option<BigInt> {
    let r = x.nth_root(n);
    (num_traits::pow(r.clone(), n as usize) == *x).then_some(r)
}

/// Principal-branch or branch-`b` n-th root of a nonzero coefficient.
///
/// Exact mode returns a rational root when one exists: branch 0 is the
/// positive root for positive input (or the unique real root for odd `n`),
/// and odd branches of even roots flip its sign. Approx mode returns the
/// root with minimal non-negative argument times `e^(2 pi i b / n)`.
pub fn nth_root(c: &Coefficient, n: u32, branch: i64) -> Result<Coefficient> {
    if n == 0 {
        return Err(Error::InvalidConfig("root index must be positive".into()));
    }
    if c.is_zero() {
        return Err(Error::ZeroRoot);
    }
    if n == 1 {
        return Ok(c.clone());
    }
    match c {
        Coefficient::Exact(r) => {
            let neg = r.is_negative();
            if neg && n % 2 == 0 {
                return Err(Error::NoExactRoot(format!("{} has no rational {}-th root", r, n)));
            }
            let num = exact_int_root(&r.numer().abs(), n);
            let den = exact_int_root(r.denom(), n);
            let (num, den) = match (num, den) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::NoExactRoot(format!("{} is not a perfect {}-th power", r, n))),
            };
            let mut root = BigRational::new(num, den);
            if neg {
                root = -root;
            }
            let b = branch.rem_euclid(n as i64);
            if b == 0 {
                Ok(Coefficient::Exact(root))
            } else if n % 2 == 0 && 2 * b == n as i64 {
                Ok(Coefficient::Exact(-root))
            } else {
                Err(Error::NoExactRoot(format!("branch {} of a {}-th root is not rational", branch, n)))
            }
        }
        Coefficient::Approx(a) => {
            let principal = approx_principal_root(a, n);
            let b = branch.rem_euclid(n as i64);
            if b == 0 {
                Ok(principal)
            } else {
                let z = approx_root_of_unity(n as i64, b, a.prec, a.tol);
                Ok(&principal * &z)
            }
        }
    }
}

fn approx_principal_root(a: &ApproxComplex, n: u32) -> Coefficient {
    let (x, y) = a.to_f64_pair();
    let mut arg = y.atan2(x);
    if arg < 0.0 {
        arg += 2.0 * std::f64::consts::PI;
    }
    // Values just below the positive real axis count as argument 0.
    let near_cut = (y.abs() <= a.tol * x.hypot(y)) && x > 0.0;
    if near_cut || arg > 2.0 * std::f64::consts::PI * (1.0 - 1e-15) {
        arg = 0.0;
    }
    let modulus = x.hypot(y).powf(1.0 / n as f64);
    let ang = arg / n as f64;
    let guess = Coefficient::approx(
        rational_from_f64(modulus * ang.cos()),
        rational_from_f64(modulus * ang.sin()),
        a.prec,
        a.tol,
    );
    let target = Coefficient::Approx(a.clone());
    newton_root(guess, &target, n, a.prec)
}

/// Newton iteration for y^n = target from a close initial guess.
fn newton_root(mut y: Coefficient, target: &Coefficient, n: u32, prec: u32) -> Coefficient {
    let nn = Coefficient::from_int(n as i64);
    // Quadratic convergence from ~50 bits of an f64 guess.
    let mut steps = 2;
    let mut bits = 48u32;
    while bits < prec + 8 {
        bits *= 2;
        steps += 1;
    }
    for _ in 0..steps {
        let ynm1 = y.pow(n as i64 - 1).expect("nonzero");
        let yn = &ynm1 * &y;
        let denom = &nn * &ynm1;
        let step = &(&yn - target) / &denom;
        y = &y - &step;
    }
    y
}

fn approx_root_of_unity(q: i64, m: i64, prec: u32, tol: f64) -> Coefficient {
    let m = m.rem_euclid(q);
    let one = BigRational::one();
    let zero = BigRational::zero();
    if m == 0 {
        return Coefficient::approx(one, zero, prec, tol);
    }
    if 2 * m == q {
        return Coefficient::approx(-one, zero, prec, tol);
    }
    if 4 * m == q {
        return Coefficient::approx(zero, one, prec, tol);
    }
    if 4 * m == 3 * q {
        return Coefficient::approx(zero, -one, prec, tol);
    }
    let ang = 2.0 * std::f64::consts::PI * m as f64 / q as f64;
    let guess = Coefficient::approx(
        rational_from_f64(ang.cos()),
        rational_from_f64(ang.sin()),
        prec,
        tol,
    );
    let one = Coefficient::approx(BigRational::one(), BigRational::zero(), prec, tol);
    newton_root(guess, &one, q as u32, prec)
}

/// Result of evaluating a root of unity in the configured field.
#[derive(Clone, Debug, PartialEq)]
pub enum UnitFactor {
    Value(Coefficient),
    NonRationalUnit,
}

/// The factor `zeta_q^(j k)` by which the Galois element `j` multiplies the
/// coefficient of `var^(k/q)`.
pub fn root_of_unity_factor(cfg: &FieldConfig, q: i64, j: i64, k: i64) -> UnitFactor {
    assert!(q > 0, "q must be positive");
    let m = (j * k).rem_euclid(q);
    match cfg.mode {
        FieldMode::Exact => {
            if m == 0 {
                UnitFactor::Value(Coefficient::one())
            } else if 2 * m == q {
                UnitFactor::Value(Coefficient::from_int(-1))
            } else {
                UnitFactor::NonRationalUnit
            }
        }
        FieldMode::Approx => {
            UnitFactor::Value(approx_root_of_unity(q, m, cfg.precision_bits, cfg.tolerance))
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Exact(r) => write!(f, "{}", r),
            Coefficient::Approx(a) => {
                let digits = ((a.prec as f64) * std::f64::consts::LOG10_2).ceil() as usize;
                let re = format_decimal(&a.re, digits);
                let t = rational_from_f64(a.tol);
                let scale = BigRational::one().max(a.re.abs()).max(a.im.abs());
                if a.im.abs() <= &t * &scale {
                    write!(f, "{}", re)
                } else if a.re.abs() <= &t * &scale {
                    write!(f, "{}i", format_decimal(&a.im, digits))
                } else {
                    let im = format_decimal(&a.im.abs(), digits);
                    let sign = if a.im.is_negative() { '-' } else { '+' };
                    write!(f, "{}{}{}i", re, sign, im)
                }
            }
        }
    }
}

/// Formats a rational with `digits` significant decimal digits.
fn format_decimal(x: &BigRational, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let neg = x.is_negative();
    let ax = x.abs();
    // Decimal exponent estimate from bit lengths, corrected below.
    let est = ((ax.numer().bits() as f64 - ax.denom().bits() as f64) * std::f64::consts::LOG10_2)
        .floor() as i64;
    let mut e10 = est;
    let ten = BigInt::from(10);
    let scaled = |e: i64| -> BigRational {
        let shift = digits as i64 - 1 - e;
        if shift >= 0 {
            &ax * BigRational::from_integer(num_traits::pow(ten.clone(), shift as usize))
        } else {
            &ax / BigRational::from_integer(num_traits::pow(ten.clone(), (-shift) as usize))
        }
    };
    let lo = num_traits::pow(ten.clone(), digits - 1);
    let hi = num_traits::pow(ten.clone(), digits);
    let mut m = scaled(e10).round().to_integer();
    for _ in 0..4 {
        if m >= hi {
            e10 += 1;
        } else if m < lo {
            e10 -= 1;
        } else {
            break;
        }
        m = scaled(e10).round().to_integer();
    }
    if m >= hi {
        m /= 10;
        e10 += 1;
    }
    let s = m.to_string();
    let (int_part, frac_part) = s.split_at(1);
    let frac = frac_part.trim_end_matches('0');
    let mantissa = if frac.is_empty() {
        int_part.to_string()
    } else {
        format!("{}.{}", int_part, frac)
    };
    let body = if (-5..=20).contains(&e10) {
        plain_decimal(&s, e10)
    } else {
        format!("{}e{}", mantissa, e10)
    };
    if neg {
        format!("-{}", body)
    } else {
        body
    }
}

/// Places the decimal point in digit string `s` whose first digit has
/// decimal exponent `e10`.
fn plain_decimal(s: &str, e10: i64) -> String {
    let digits = s.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    if e10 < 0 {
        format!("0.{}{}", "0".repeat((-e10 - 1) as usize), digits)
    } else {
        let int_len = e10 as usize + 1;
        if digits.len() <= int_len {
            format!("{}{}", digits, "0".repeat(int_len - digits.len()))
        } else {
            format!("{}.{}", &digits[..int_len], &digits[int_len..])
        }
    }
}

/// Parses a real decimal literal (`-1.25e-3`) into an exact rational.
fn parse_decimal(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().ok()?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{}{}", ip, fp).parse().ok()?;
    let e = exp - fp.len() as i64;
    let ten = BigInt::from(10);
    let mut r = if e >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, e as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-e) as usize))
    };
    if neg {
        r = -r;
    }
    Some(r)
}

fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    match t.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().ok()?;
            let b: BigInt = b.trim().parse().ok()?;
            (!b.is_zero()).then(|| BigRational::new(a, b))
        }
        None => t.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

/// Parses `p`, `p/q`, decimals, and complex literals `a+bi`, `a-bi`, `bi`,
/// `i`, optionally wrapped in parentheses.
pub fn parse_literal(text: &str, cfg: &FieldConfig) -> Result<Coefficient> {
    let mut t = text.trim();
    if t.starts_with('(') && t.ends_with(')') {
        t = t[1..t.len() - 1].trim();
    }
    let bad = || Error::syntax(0, format!("invalid coefficient literal '{}'", text));
    if let Some(r) = parse_rational(t) {
        return Ok(Coefficient::Exact(r));
    }
    let need_approx = || -> Result<()> {
        if cfg.is_exact() {
            Err(Error::syntax(0, format!("literal '{}' requires the complex field", text)))
        } else {
            Ok(())
        }
    };
    if let Some(body) = t.strip_suffix('i') {
        need_approx()?;
        // Split at the last sign that is not part of an exponent.
        let bytes = body.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
                split = Some(i);
                break;
            }
        }
        let (re_s, im_s) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im_s = match im_s {
            "" | "+" => "1",
            "-" => "-1",
            s => s,
        };
        let re = parse_decimal(re_s).or_else(|| parse_rational(re_s)).ok_or_else(bad)?;
        let im = parse_decimal(im_s).or_else(|| parse_rational(im_s)).ok_or_else(bad)?;
        return Ok(Coefficient::approx(re, im, cfg.precision_bits, cfg.tolerance));
    }
    if let Some(r) = parse_decimal(t) {
        need_approx()?;
        return Ok(Coefficient::approx(r, BigRational::zero(), cfg.precision_bits, cfg.tolerance));
    }
    Err(bad())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Coefficient {
        Coefficient::from_ratio(p, d)
    }

    #[test]
    fn exact_roots() {
        assert_eq!(nth_root(&q(4, 1), 2, 0).unwrap(), q(2, 1));
        assert_eq!(nth_root(&q(4, 1), 2, 1).unwrap(), q(-2, 1));
        assert_eq!(nth_root(&q(1, 1), 1, 0).unwrap(), q(1, 1));
        assert_eq!(nth_root(&q(-8, 27), 3, 0).unwrap(), q(-2, 3));
        assert!(matches!(nth_root(&q(2, 1), 2, 0), Err(Error::NoExactRoot(_))));
        assert!(matches!(nth_root(&q(-1, 1), 2, 0), Err(Error::NoExactRoot(_))));
        assert!(matches!(nth_root(&q(8, 1), 3, 1), Err(Error::NoExactRoot(_))));
    }

    #[test]
    fn approx_sqrt_minus_one() {
        let cfg = FieldConfig::approx();
        let m1 = cfg.from_int(-1);
        let r = nth_root(&m1, 2, 0).unwrap();
        assert_eq!(&r * &r, m1);
        let (re, im) = r.to_f64_pair();
        assert!(re.abs() < 1e-30 && (im - 1.0).abs() < 1e-30);
    }

    #[test]
    fn approx_sqrt_two_precision() {
        let cfg = FieldConfig::approx();
        let r = nth_root(&cfg.from_int(2), 2, 0).unwrap();
        let sq = &r * &r;
        let Coefficient::Approx(a) = sq else { panic!() };
        let err = (&a.re - BigRational::from_integer(2.into())).abs();
        // Well beyond f64 precision.
        assert!(err < BigRational::new(1.into(), BigInt::one() << 140));
    }

    #[test]
    fn principal_branch_near_positive_axis() {
        let cfg = FieldConfig::approx();
        let tiny = BigRational::new((-1).into(), BigInt::one() << 100);
        let c = Coefficient::approx(BigRational::from_integer(4.into()), tiny, cfg.precision_bits, cfg.tolerance);
        let r = nth_root(&c, 2, 0).unwrap();
        assert!(r == cfg.from_int(2));
    }

    #[test]
    fn units() {
        let ex = FieldConfig::exact();
        assert_eq!(root_of_unity_factor(&ex, 2, 1, 1), UnitFactor::Value(q(-1, 1)));
        assert_eq!(root_of_unity_factor(&ex, 4, 1, 2), UnitFactor::Value(q(-1, 1)));
        assert_eq!(root_of_unity_factor(&ex, 3, 1, 1), UnitFactor::NonRationalUnit);
        let ap = FieldConfig::approx();
        let UnitFactor::Value(w) = root_of_unity_factor(&ap, 3, 1, 1) else { panic!() };
        assert_eq!(w.pow(3).unwrap(), ap.from_int(1));
        assert!(w != ap.from_int(1));
    }

    #[test]
    fn config_validation() {
        assert!(FieldConfig::approx().validate().is_ok());
        assert!(FieldConfig::approx_with(128, 1e-20).is_err());
        assert!(FieldConfig::approx_with(128, 1e-15).is_ok());
    }

    #[test]
    fn literal_round_trip() {
        let ex = FieldConfig::exact();
        for s in ["0", "-3", "7/12", "-22/7"] {
            let c = ex.parse_coefficient(s).unwrap();
            assert_eq!(c.to_string(), s);
        }
        assert!(ex.parse_coefficient("1.5").is_err());
        let ap = FieldConfig::approx();
        let c = ap.parse_coefficient("1.5-2.25i").unwrap();
        let back = ap.parse_coefficient(&c.to_string()).unwrap();
        assert_eq!(c, back);
        let i = ap.parse_coefficient("i").unwrap();
        assert_eq!(&i * &i, ap.from_int(-1));
    }

    #[test]
    fn decimal_format() {
        assert_eq!(format_decimal(&BigRational::new(1.into(), 4.into()), 10), "0.25");
        assert_eq!(format_decimal(&BigRational::from_integer(1200.into()), 10), "1200");
        assert_eq!(format_decimal(&BigRational::new(1.into(), BigInt::from(10).pow(30)), 5), "1e-30");
    }

    #[test]
    fn reduce_mod() {
        assert_eq!(q(3, 2).reduce_mod_inv(1), q(1, 2));
        assert_eq!(q(-1, 3).reduce_mod_inv(1), q(2, 3));
        assert_eq!(q(-3, 4).reduce_mod_inv(2), q(1, 4));
        assert_eq!(q(5, 1).reduce_mod_inv(1), q(0, 1));
    }
}
