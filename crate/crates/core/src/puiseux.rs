//! Truncated Puiseux series `sum c_k var^(k/q)` with explicit error terms.
//!
//! A series stores its ramification `q`, a sparse map of exponent numerators
//! to nonzero coefficients, and an optional truncation numerator `T`: every
//! exponent `>= T/q` is unknown. `None` means the series is an exact Puiseux
//! polynomial. Every operation computes the weakest truncation it can prove.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{nth_root, Coefficient, FieldConfig};

/// Rational exponent.
pub type Exp = Ratio<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Z,
    Zx,
    Zeta,
    Theta,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::Z => "z",
            Var::Zx => "zx",
            Var::Zeta => "zeta",
            Var::Theta => "theta",
        }
    }

    pub fn from_name(s: &str) -> Option<Var> {
        match s {
            "z" => Some(Var::Z),
            "zx" => Some(Var::Zx),
            "zeta" => Some(Var::Zeta),
            "theta" => Some(Var::Theta),
            _ => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhiDirection {
    /// `theta -> theta / (1 + theta)`
    Forward,
    /// `theta -> theta / (1 - theta)`
    Inverse,
}

/// Window of exponent numerators `[lo, hi]` over a shared ramification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExponentWindow {
    pub lo: i64,
    pub hi: i64,
}

impl ExponentWindow {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::WindowTooSmall(format!("empty window [{}, {}]", lo, hi)));
        }
        Ok(ExponentWindow { lo, hi })
    }

    pub fn contains(&self, k: i64) -> bool {
        self.lo <= k && k <= self.hi
    }
}

#[derive(Clone, Debug)]
pub struct PuiseuxSeries {
    var: Var,
    ram: i64,
    terms: BTreeMap<i64, Coefficient>,
    trunc: Option<i64>,
}

fn lcm(a: i64, b: i64) -> i64 {
    a.lcm(&b)
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl PuiseuxSeries {
    /// Builds a series, summing duplicate exponents and dropping zero
    /// coefficients and terms at or beyond the truncation.
    pub fn new(
        var: Var,
        ram: i64,
        terms: impl IntoIterator<Item = (i64, Coefficient)>,
        trunc: Option<i64>,
    ) -> Self {
        assert!(ram > 0, "ramification must be positive");
        let mut map: BTreeMap<i64, Coefficient> = BTreeMap::new();
        for (k, c) in terms {
            if trunc.is_some_and(|t| k >= t) {
                continue;
            }
            match map.get_mut(&k) {
                Some(old) => *old = &*old + &c,
                None => {
                    map.insert(k, c);
                }
            }
        }
        map.retain(|_, c| !c.is_zero());
        PuiseuxSeries {
            var,
            ram,
            terms: map,
            trunc,
        }
    }

    pub fn zero(var: Var) -> Self {
        PuiseuxSeries::new(var, 1, [], None)
    }

    pub fn constant(var: Var, c: Coefficient) -> Self {
        PuiseuxSeries::new(var, 1, [(0, c)], None)
    }

    pub fn one(var: Var) -> Self {
        PuiseuxSeries::constant(var, Coefficient::one())
    }

    /// `c * var^(k/ram)`.
    pub fn monomial(var: Var, c: Coefficient, k: i64, ram: i64) -> Self {
        PuiseuxSeries::new(var, ram, [(k, c)], None)
    }

    /// `c * var^e` for a rational exponent.
    pub fn monomial_exp(var: Var, c: Coefficient, e: Exp) -> Self {
        PuiseuxSeries::monomial(var, c, *e.numer(), *e.denom())
    }

    /// The pure error term `O(var^e)`.
    pub fn big_o(var: Var, e: Exp) -> Self {
        PuiseuxSeries::new(var, *e.denom(), [], Some(*e.numer()))
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn ram(&self) -> i64 {
        self.ram
    }

    pub fn terms(&self) -> &BTreeMap<i64, Coefficient> {
        &self.terms
    }

    pub fn trunc(&self) -> Option<i64> {
        self.trunc
    }

    pub fn trunc_exp(&self) -> Option<Exp> {
        self.trunc.map(|t| Exp::new(t, self.ram))
    }

    pub fn is_exact(&self) -> bool {
        self.trunc.is_none()
    }

    /// True when no coefficient is known to be nonzero.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn coeff(&self, k: i64) -> Option<&Coefficient> {
        self.terms.get(&k)
    }

    /// Coefficient of `var^e`, or `None` when it is zero or unknown.
    pub fn coeff_at(&self, e: Exp) -> Option<&Coefficient> {
        let k = e * Exp::from_integer(self.ram);
        if !k.is_integer() {
            return None;
        }
        self.terms.get(&k.to_integer())
    }

    pub fn leading(&self) -> Option<(i64, &Coefficient)> {
        self.terms.iter().next().map(|(k, c)| (*k, c))
    }

    pub fn leading_coefficient(&self) -> Option<&Coefficient> {
        self.leading().map(|(_, c)| c)
    }

    /// Order `min k / q`; `None` for a series with no known nonzero term.
    pub fn ord(&self) -> Option<Exp> {
        self.leading().map(|(k, _)| Exp::new(k, self.ram))
    }

    /// Lower bound on the valuation: the order, or the truncation for a
    /// series with no terms. `None` for the exact zero series.
    fn ord_lower_numer(&self) -> Option<i64> {
        self.leading().map(|(k, _)| k).or(self.trunc)
    }

    pub fn all_exact_coefficients(&self) -> bool {
        self.terms.values().all(Coefficient::is_exact)
    }

    pub fn with_var(&self, var: Var) -> Self {
        PuiseuxSeries {
            var,
            ..self.clone()
        }
    }

    /// Adds an error term at numerator `t` (keeps an existing smaller one).
    pub fn truncate(&self, t: i64) -> Self {
        let trunc = min_opt(self.trunc, Some(t));
        PuiseuxSeries::new(self.var, self.ram, self.terms.clone(), trunc)
    }

    /// Adds an error term `O(var^e)`.
    pub fn truncate_exp(&self, e: Exp) -> Self {
        let r = lcm(self.ram, *e.denom());
        let s = self.lift(r);
        s.truncate(*(e * Exp::from_integer(r)).numer())
    }

    /// Same series over ramification `new_ram`, a multiple of `ram`.
    pub fn lift(&self, new_ram: i64) -> Self {
        assert!(new_ram % self.ram == 0, "lift target must be a multiple");
        let f = new_ram / self.ram;
        if f == 1 {
            return self.clone();
        }
        PuiseuxSeries {
            var: self.var,
            ram: new_ram,
            terms: self.terms.iter().map(|(k, c)| (k * f, c.clone())).collect(),
            trunc: self.trunc.map(|t| t * f),
        }
    }

    /// Reduces the ramification to `q / gcd(q, k..., T)`.
    pub fn normalize_ram(&self) -> Self {
        let mut g = self.ram;
        for k in self.terms.keys() {
            g = g.gcd(k);
        }
        if let Some(t) = self.trunc {
            g = g.gcd(&t);
        }
        if g <= 1 {
            return self.clone();
        }
        PuiseuxSeries {
            var: self.var,
            ram: self.ram / g,
            terms: self.terms.iter().map(|(k, c)| (k / g, c.clone())).collect(),
            trunc: self.trunc.map(|t| t / g),
        }
    }

    pub fn map_coefficients(&self, f: impl Fn(i64, &Coefficient) -> Coefficient) -> Self {
        PuiseuxSeries::new(
            self.var,
            self.ram,
            self.terms.iter().map(|(k, c)| (*k, f(*k, c))),
            self.trunc,
        )
    }

    /// Converts every coefficient into the configured field.
    pub fn embed(&self, cfg: &FieldConfig) -> Self {
        self.map_coefficients(|_, c| cfg.embed(c))
    }

    pub fn scale(&self, c: &Coefficient) -> Self {
        self.map_coefficients(|_, x| x * c)
    }

    /// Multiplies by `c * var^(k/ram)`.
    pub fn mul_monomial(&self, c: &Coefficient, k: i64, ram: i64) -> Self {
        let r = lcm(self.ram, ram);
        let s = self.lift(r);
        let shift = k * (r / ram);
        PuiseuxSeries::new(
            self.var,
            r,
            s.terms.iter().map(|(j, x)| (j + shift, x * c)),
            s.trunc.map(|t| t + shift),
        )
    }

    fn check_var(&self, other: &Self) -> Result<()> {
        if self.var != other.var {
            return Err(Error::VarMismatch(self.var.name().into(), other.var.name().into()));
        }
        Ok(())
    }

    fn merged(&self, other: &Self) -> (Self, Self) {
        let r = lcm(self.ram, other.ram);
        (self.lift(r), other.lift(r))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_var(other)?;
        let (a, b) = self.merged(other);
        let trunc = min_opt(a.trunc, b.trunc);
        Ok(PuiseuxSeries::new(
            a.var,
            a.ram,
            a.terms.into_iter().chain(b.terms),
            trunc,
        ))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_var(other)?;
        let (a, b) = self.merged(other);
        let (la, lb) = match (a.ord_lower_numer(), b.ord_lower_numer()) {
            (Some(x), Some(y)) => (x, y),
            // One factor is the exact zero series.
            _ => return Ok(PuiseuxSeries::new(a.var, a.ram, [], None)),
        };
        let trunc = min_opt(a.trunc.map(|t| t + lb), b.trunc.map(|t| t + la));
        let mut out: BTreeMap<i64, Coefficient> = BTreeMap::new();
        for (ka, ca) in &a.terms {
            for (kb, cb) in &b.terms {
                let k = ka + kb;
                if trunc.is_some_and(|t| k >= t) {
                    break;
                }
                let p = ca * cb;
                match out.get_mut(&k) {
                    Some(old) => *old = &*old + &p,
                    None => {
                        out.insert(k, p);
                    }
                }
            }
        }
        Ok(PuiseuxSeries::new(a.var, a.ram, out, trunc))
    }

    /// Multiplicative inverse; relative precision is preserved.
    pub fn invert(&self) -> Result<Self> {
        let (k0, c0) = self.leading().ok_or(Error::ZeroLeading)?;
        let c0_inv = c0.inv()?;
        let Some(t) = self.trunc else {
            if self.is_monomial() {
                return Ok(PuiseuxSeries::monomial(self.var, c0_inv, -k0, self.ram));
            }
            return Err(Error::NeedsTruncation);
        };
        let rel = (t - k0) as usize;
        let c: Vec<Coefficient> = (0..rel)
            .map(|i| self.terms.get(&(k0 + i as i64)).cloned().unwrap_or_else(Coefficient::zero))
            .collect();
        let mut b: Vec<Coefficient> = Vec::with_capacity(rel);
        b.push(c0_inv.clone());
        for n in 1..rel {
            let mut acc = Coefficient::zero();
            for i in 1..=n {
                if !c[i].is_zero() {
                    acc = &acc + &(&c[i] * &b[n - i]);
                }
            }
            b.push(-(&acc * &c0_inv));
        }
        Ok(PuiseuxSeries::new(
            self.var,
            self.ram,
            b.into_iter().enumerate().map(|(i, x)| (i as i64 - k0, x)),
            Some(t - 2 * k0),
        ))
    }

    /// Integer power. Exact inputs stay exact for non-negative exponents.
    pub fn pow_int(&self, n: i64) -> Result<Self> {
        if n < 0 {
            return self.invert()?.pow_int(-n);
        }
        let mut acc = PuiseuxSeries::one(self.var);
        let mut base = self.clone();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.checked_mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// `self^(u/p)` with the leading coefficient's root taken at `branch`.
    pub fn pow_rational(&self, e: Exp, branch: i64) -> Result<Self> {
        let (u, p) = (*e.numer(), *e.denom());
        if p == 1 {
            return self.pow_int(u);
        }
        let (k0, c0) = self.leading().ok_or(Error::ZeroLeading)?;
        let lc = nth_root(c0, p as u32, branch)?.pow(u)?;
        let q = self.ram;
        let big = q * p;
        let rel = match self.trunc {
            Some(t) => t - k0,
            None => {
                if self.is_monomial() {
                    return Ok(PuiseuxSeries::monomial(self.var, lc, k0 * u, big).normalize_ram());
                }
                return Err(Error::NeedsTruncation);
            }
        };
        let c0_inv = c0.inv()?;
        let v: Vec<Coefficient> = (0..rel)
            .map(|i| match self.terms.get(&(k0 + i)) {
                Some(c) if i > 0 => c * &c0_inv,
                _ => Coefficient::zero(),
            })
            .collect();
        let y = binomial_power(&v, e, rel as usize);
        Ok(PuiseuxSeries::new(
            self.var,
            big,
            y.into_iter()
                .enumerate()
                .map(|(n, c)| (k0 * u + n as i64 * p, &c * &lc)),
            Some(k0 * u + rel * p),
        )
        .normalize_ram())
    }

    /// Term-wise derivative with respect to `var`.
    pub fn derivative(&self) -> Self {
        let q = self.ram;
        PuiseuxSeries::new(
            self.var,
            q,
            self.terms
                .iter()
                .map(|(k, c)| (k - q, c * &Coefficient::from_ratio(*k, q))),
            self.trunc.map(|t| t - q),
        )
    }

    /// Composition `self(s)`; the result lives in the variable of `s`.
    ///
    /// Propagated truncation: the Horner evaluation supplies the bound from
    /// the precision of `s`, and a truncated `self` contributes the bound
    /// `ord(s) * T/q`.
    pub fn substitute(&self, s: &PuiseuxSeries) -> Result<Self> {
        let qa = self.ram;
        let ord_s = s.ord();
        if self.trunc.is_some() && ord_s.map_or(true, |o| o <= Exp::from_integer(0)) {
            return Err(Error::DivergentComposition);
        }
        let tail_bound = self.trunc.map(|t| ord_s.expect("checked above") * Exp::new(t, qa));
        let Some((kmin, _)) = self.leading() else {
            return Ok(match tail_bound {
                Some(e) => PuiseuxSeries::big_o(s.var, e),
                None => PuiseuxSeries::zero(s.var),
            });
        };
        if ord_s.is_none() {
            return Err(Error::ZeroLeading);
        }
        let sigma = if qa == 1 {
            s.clone()
        } else {
            s.pow_rational(Exp::new(1, qa), 0)?
        };
        let kmax = *self.terms.keys().next_back().expect("nonempty");
        let mut acc = PuiseuxSeries::zero(s.var);
        let mut d = kmax;
        loop {
            if let Some(c) = self.terms.get(&d) {
                acc = acc.checked_add(&PuiseuxSeries::constant(s.var, c.clone()))?;
            }
            if d == kmin {
                break;
            }
            acc = acc.checked_mul(&sigma)?;
            d -= 1;
        }
        let result = acc.checked_mul(&sigma.pow_int(kmin)?)?;
        Ok(match tail_bound {
            Some(e) => result.truncate_exp(e),
            None => result,
        })
    }

    /// Compositional inverse: returns `h` in `target` with `self(h(t)) = t`.
    ///
    /// For `self = c w^p (1 + u(w))` with `w = var^(1/q)` and `p > 0`, the
    /// fixed point `w = kappa t^(1/p) (1 + u(w))^(-1/p)` with
    /// `kappa^p = 1/c` is iterated until it stabilises; `h = w^q`.
    pub fn revert(&self, target: Var, branch: i64) -> Result<Self> {
        let (p, c) = self.leading().ok_or(Error::ZeroLeading)?;
        let q = self.ram;
        if p == 0 {
            return Err(Error::RevertFailed("series has order zero".into()));
        }
        if p < 0 {
            if self.is_monomial() && self.is_exact() {
                // c z^(p/q) = t  =>  z = (t / c)^(q/p)
                let base = PuiseuxSeries::monomial(target, c.inv()?, 1, 1);
                return base.pow_rational(Exp::new(q, p), branch);
            }
            return Err(Error::Unsupported(
                "reversion of a negative-order series with a tail; revert its inverse".into(),
            ));
        }
        if self.is_exact() && !self.is_monomial() {
            return Err(Error::NeedsTruncation);
        }
        let kappa = nth_root(&c.inv()?, p as u32, branch)?;
        let kt = PuiseuxSeries::monomial(target, kappa, 1, p);
        let c_inv = c.inv()?;
        let rel = self.trunc.map(|t| t - p);
        let one_plus_u = PuiseuxSeries::new(
            target,
            1,
            self.terms.iter().map(|(k, x)| (k - p, x * &c_inv)),
            rel,
        );
        let w = if one_plus_u.is_monomial() && one_plus_u.is_exact() {
            kt
        } else {
            let g = one_plus_u.pow_rational(Exp::new(-1, p), 0)?;
            let mut w = kt.clone();
            let mut agreement: Option<Exp> = None;
            let max_iter = rel.unwrap_or(0) + 4;
            let mut done = false;
            for _ in 0..max_iter {
                let next = kt.checked_mul(&g.substitute(&w)?)?;
                let diff = next.checked_sub(&w)?;
                w = next;
                match diff.ord() {
                    None => {
                        done = true;
                        break;
                    }
                    Some(o) => {
                        if agreement.is_some_and(|a| o <= a) {
                            return Err(Error::RevertFailed(format!(
                                "agreement order stalled at {}",
                                o
                            )));
                        }
                        agreement = Some(o);
                    }
                }
            }
            if !done {
                return Err(Error::RevertFailed("iteration did not stabilise".into()));
            }
            w
        };
        Ok(w.pow_int(q)?.normalize_ram())
    }

    /// The substitution automorphism `theta^(1/q) -> theta^(1/q) (1 +- theta)^(-1/q)`.
    pub fn phi(&self, direction: PhiDirection) -> Result<Self> {
        if self.var != Var::Theta {
            return Err(Error::VarMismatch(self.var.name().into(), Var::Theta.name().into()));
        }
        let q = self.ram;
        let sign = match direction {
            PhiDirection::Forward => 1,
            PhiDirection::Inverse => -1,
        };
        let mut out = PuiseuxSeries::new(Var::Theta, q, [], self.trunc);
        for (k, c) in &self.terms {
            let alpha = Exp::new(-k, q);
            let n_terms = match self.trunc {
                Some(t) => ((t - k) as f64 / q as f64).ceil().max(0.0) as usize,
                None => {
                    if !(alpha.is_integer() && alpha >= Exp::from_integer(0)) {
                        return Err(Error::NeedsTruncation);
                    }
                    alpha.to_integer() as usize + 1
                }
            };
            let coeffs = binomial_coefficients(alpha, n_terms);
            let piece = PuiseuxSeries::new(
                Var::Theta,
                q,
                coeffs.into_iter().enumerate().map(|(i, b)| {
                    let s = if sign < 0 && i % 2 == 1 { -b } else { b };
                    (k + i as i64 * q, &s * c)
                }),
                self.trunc,
            );
            out = out.checked_add(&piece)?;
        }
        Ok(out)
    }

    /// True when the series agrees with zero to its truncation.
    pub fn vanishes(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            var: self.var.name().to_string(),
            ram: self.ram,
            terms: self.terms.iter().map(|(k, c)| (*k, c.to_string())).collect(),
            trunc: self.trunc,
        }
    }

    pub fn from_json(j: &SeriesJson, cfg: &FieldConfig) -> Result<Self> {
        let var = Var::from_name(&j.var)
            .ok_or_else(|| Error::syntax(0, format!("unknown variable '{}'", j.var)))?;
        if j.ram <= 0 {
            return Err(Error::syntax(0, "ram must be positive"));
        }
        let mut terms = Vec::with_capacity(j.terms.len());
        for (k, s) in &j.terms {
            terms.push((*k, cfg.parse_coefficient(s)?));
        }
        Ok(PuiseuxSeries::new(var, j.ram, terms, j.trunc))
    }
}

/// Coefficients `y_0..y_{n-1}` of `(1 + sum_{i>=1} v_i x^i)^e` by the
/// J.C.P. Miller recurrence `n y_n = sum_k ((e+1)k - n) v_k y_{n-k}`.
fn binomial_power(v: &[Coefficient], e: Exp, n: usize) -> Vec<Coefficient> {
    let mut y = Vec::with_capacity(n);
    if n == 0 {
        return y;
    }
    y.push(Coefficient::one());
    let e1 = e + Exp::from_integer(1);
    for m in 1..n {
        let mut acc = Coefficient::zero();
        for k in 1..=m {
            if k >= v.len() || v[k].is_zero() || y[m - k].is_zero() {
                continue;
            }
            let f = e1 * Exp::from_integer(k as i64) - Exp::from_integer(m as i64);
            if *f.numer() == 0 {
                continue;
            }
            let w = &v[k] * &y[m - k];
            acc = &acc + &w.scale(*f.numer(), *f.denom());
        }
        y.push(acc.scale(1, m as i64));
    }
    y
}

/// `binom(alpha, i)` for `i = 0..n`.
pub fn binomial_coefficients(alpha: Exp, n: usize) -> Vec<Coefficient> {
    let mut out = Vec::with_capacity(n);
    let mut b = Exp::from_integer(1);
    for i in 0..n {
        out.push(Coefficient::from_ratio(*b.numer(), *b.denom()));
        let i = i as i64;
        b = b * (alpha - Exp::from_integer(i)) / Exp::from_integer(i + 1);
    }
    out
}

impl PartialEq for PuiseuxSeries {
    /// Equal as truncated series: same variable, same truncation and the
    /// same coefficients (approximate coefficients within tolerance).
    fn eq(&self, other: &Self) -> bool {
        if self.var != other.var {
            return false;
        }
        let (a, b) = self.merged(other);
        if a.trunc != b.trunc {
            return false;
        }
        let keys: std::collections::BTreeSet<i64> =
            a.terms.keys().chain(b.terms.keys()).copied().collect();
        let zero = Coefficient::zero();
        keys.into_iter().all(|k| {
            let x = a.terms.get(&k).unwrap_or(&zero);
            let y = b.terms.get(&k).unwrap_or(&zero);
            x == y
        })
    }
}

impl Neg for &PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn neg(self) -> PuiseuxSeries {
        self.map_coefficients(|_, c| -c)
    }
}

impl Neg for PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn neg(self) -> PuiseuxSeries {
        -&self
    }
}

/// Panics on variable mismatch; use the `checked_*` methods otherwise.
impl<'a> Add<&'a PuiseuxSeries> for &'a PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn add(self, o: &PuiseuxSeries) -> PuiseuxSeries {
        self.checked_add(o).expect("series variable mismatch")
    }
}

impl<'a> Sub<&'a PuiseuxSeries> for &'a PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn sub(self, o: &PuiseuxSeries) -> PuiseuxSeries {
        self.checked_sub(o).expect("series variable mismatch")
    }
}

impl<'a> Mul<&'a PuiseuxSeries> for &'a PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn mul(self, o: &PuiseuxSeries) -> PuiseuxSeries {
        self.checked_mul(o).expect("series variable mismatch")
    }
}

macro_rules! owned_series_op {
    ($tr:ident, $m:ident) => {
        impl $tr<PuiseuxSeries> for PuiseuxSeries {
            type Output = PuiseuxSeries;
            fn $m(self, o: PuiseuxSeries) -> PuiseuxSeries {
                (&self).$m(&o)
            }
        }
    };
}
owned_series_op!(Add, add);
owned_series_op!(Sub, sub);
owned_series_op!(Mul, mul);

/// JSON form `{"var", "ram", "terms": [[k, "coef"]], "trunc"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub var: String,
    pub ram: i64,
    pub terms: Vec<(i64, String)>,
    pub trunc: Option<i64>,
}

/// `var^e` in the text format, or the empty string for `e = 0`.
pub fn format_power(var: Var, e: Exp) -> String {
    if *e.numer() == 0 {
        String::new()
    } else if e == Exp::from_integer(1) {
        var.name().to_string()
    } else if e.is_integer() && *e.numer() > 0 {
        format!("{}^{}", var.name(), e.numer())
    } else if e.is_integer() {
        format!("{}^({})", var.name(), e.numer())
    } else {
        format!("{}^({}/{})", var.name(), e.numer(), e.denom())
    }
}

impl fmt::Display for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in &self.terms {
            let mono = format_power(self.var, Exp::new(*k, self.ram));
            let (neg, body) = match c {
                Coefficient::Exact(r) => {
                    let neg = r < &num_rational::BigRational::from_integer(0.into());
                    let a = if neg { -r } else { r.clone() };
                    let cs = a.to_string();
                    let body = if mono.is_empty() {
                        cs
                    } else if cs == "1" {
                        mono
                    } else {
                        format!("{}*{}", cs, mono)
                    };
                    (neg, body)
                }
                Coefficient::Approx(_) => {
                    let cs = format!("({})", c);
                    let body = if mono.is_empty() { cs } else { format!("{}*{}", cs, mono) };
                    (false, body)
                }
            };
            if first {
                if neg {
                    write!(f, "-{}", body)?;
                } else {
                    write!(f, "{}", body)?;
                }
                first = false;
            } else if neg {
                write!(f, " - {}", body)?;
            } else {
                write!(f, " + {}", body)?;
            }
        }
        if let Some(t) = self.trunc {
            let e = Exp::new(t, self.ram);
            let mono = if *e.numer() == 0 {
                format!("{}^0", self.var.name())
            } else {
                format_power(self.var, e)
            };
            if first {
                write!(f, "O({})", mono)?;
            } else {
                write!(f, " + O({})", mono)?;
            }
        } else if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(p: i64, q: i64) -> Coefficient {
        Coefficient::from_ratio(p, q)
    }

    fn z(terms: &[(i64, i64, i64)], ram: i64, trunc: Option<i64>) -> PuiseuxSeries {
        PuiseuxSeries::new(Var::Z, ram, terms.iter().map(|&(k, p, q)| (k, c(p, q))), trunc)
    }

    #[test]
    fn difference_of_squares() {
        let a = z(&[(0, 1, 1), (1, 1, 1)], 2, None);
        let b = z(&[(0, 1, 1), (1, -1, 1)], 2, None);
        assert_eq!((&a * &b).normalize_ram(), z(&[(0, 1, 1), (1, -1, 1)], 1, None));
    }

    #[test]
    fn truncation_rules() {
        let a = z(&[(-1, 1, 1), (0, 1, 1)], 1, Some(2));
        let x = z(&[(1, 1, 1)], 1, None);
        assert_eq!(&a * &x, z(&[(0, 1, 1), (1, 1, 1)], 1, Some(3)));
        let p = z(&[(0, 1, 1)], 1, Some(2));
        let q = z(&[(1, 1, 1)], 1, Some(3));
        assert_eq!(&p + &q, z(&[(0, 1, 1), (1, 1, 1)], 1, Some(2)));
    }

    #[test]
    fn invert_examples() {
        let a = z(&[(0, 1, 1), (1, 1, 1)], 1, Some(5));
        assert_eq!(a.invert().unwrap(), z(&[(0, 1, 1), (1, -1, 1), (2, 1, 1), (3, -1, 1), (4, 1, 1)], 1, Some(5)));
        let b = z(&[(-2, 1, 1), (-1, 1, 1)], 1, Some(2));
        let inv = b.invert().unwrap();
        assert_eq!(inv, z(&[(2, 1, 1), (3, -1, 1), (4, 1, 1), (5, -1, 1)], 1, Some(6)));
        assert!((&b * &inv - PuiseuxSeries::one(Var::Z)).vanishes());
        assert_eq!(z(&[], 1, Some(3)).invert(), Err(Error::ZeroLeading));
    }

    #[test]
    fn binomial_half() {
        let a = PuiseuxSeries::new(Var::Theta, 1, [(0, c(1, 1)), (1, c(1, 1))], Some(4));
        let p = a.pow_rational(Exp::new(-1, 2), 0).unwrap();
        let want = PuiseuxSeries::new(
            Var::Theta,
            1,
            [(0, c(1, 1)), (1, c(-1, 2)), (2, c(3, 8)), (3, c(-5, 16))],
            Some(4),
        );
        assert_eq!(p, want);
    }

    #[test]
    fn monomial_powers() {
        let a = z(&[(2, 1, 1)], 1, None);
        assert_eq!(a.pow_rational(Exp::new(1, 2), 0).unwrap(), z(&[(1, 1, 1)], 1, None));
        let b = z(&[(-2, 4, 1)], 1, None);
        assert_eq!(b.pow_rational(Exp::new(3, 2), 0).unwrap(), z(&[(-3, 8, 1)], 1, None));
    }

    #[test]
    fn derivative_examples() {
        let a = z(&[(1, 1, 1)], 2, None);
        assert_eq!(a.derivative(), z(&[(-1, 1, 2)], 2, None));
        let b = z(&[(-1, 1, 1)], 1, Some(2));
        assert_eq!(b.derivative(), z(&[(-2, -1, 1)], 1, Some(1)));
        assert!(PuiseuxSeries::constant(Var::Theta, c(3, 1)).derivative().vanishes());
    }

    #[test]
    fn substitution() {
        let a = z(&[(2, 1, 1)], 1, None);
        let s = PuiseuxSeries::monomial(Var::Theta, c(1, 1), 1, 2);
        assert_eq!(a.substitute(&s).unwrap(), PuiseuxSeries::monomial(Var::Theta, c(1, 1), 1, 1));
        let geo = z(&[(0, 1, 1), (1, -1, 1), (2, 1, 1), (3, -1, 1), (4, 1, 1), (5, -1, 1)], 1, Some(6));
        let s = PuiseuxSeries::new(Var::Theta, 1, [(1, c(1, 1)), (2, c(1, 1))], None);
        let lhs = geo.substitute(&s).unwrap();
        let rhs = PuiseuxSeries::new(Var::Theta, 1, [(0, c(1, 1)), (1, c(1, 1)), (2, c(1, 1))], Some(6))
            .invert()
            .unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(lhs.coeff(2), None);
        assert_eq!(lhs.coeff(3), Some(&c(1, 1)));
    }

    #[test]
    fn reversion() {
        let s = z(&[(2, 1, 1), (3, 1, 1)], 1, Some(5));
        let h = s.revert(Var::Theta, 0).unwrap();
        let want = PuiseuxSeries::new(
            Var::Theta,
            2,
            [(1, c(1, 1)), (2, c(-1, 2)), (3, c(5, 8))],
            Some(4),
        );
        assert_eq!(h, want);
        let id = z(&[(1, 1, 1)], 1, None).revert(Var::Theta, 0).unwrap();
        assert_eq!(id, PuiseuxSeries::monomial(Var::Theta, c(1, 1), 1, 1));
        let neg = z(&[(-1, 1, 1)], 1, None).revert(Var::Theta, 0).unwrap();
        assert_eq!(neg, PuiseuxSeries::monomial(Var::Theta, c(1, 1), -1, 1));
    }

    #[test]
    fn phi_examples() {
        let t = PuiseuxSeries::new(Var::Theta, 1, [(1, c(1, 1))], Some(4));
        assert_eq!(
            t.phi(PhiDirection::Forward).unwrap(),
            PuiseuxSeries::new(Var::Theta, 1, [(1, c(1, 1)), (2, c(-1, 1)), (3, c(1, 1))], Some(4))
        );
        let ti = PuiseuxSeries::monomial(Var::Theta, c(1, 1), -1, 1);
        assert_eq!(
            ti.phi(PhiDirection::Forward).unwrap(),
            PuiseuxSeries::new(Var::Theta, 1, [(-1, c(1, 1)), (0, c(1, 1))], None)
        );
        let h = PuiseuxSeries::new(Var::Theta, 2, [(1, c(1, 1))], Some(7));
        assert_eq!(
            h.phi(PhiDirection::Forward).unwrap(),
            PuiseuxSeries::new(Var::Theta, 2, [(1, c(1, 1)), (3, c(-1, 2)), (5, c(3, 8))], Some(7))
        );
    }

    #[test]
    fn normalize() {
        assert_eq!(z(&[(2, 1, 1)], 2, None).normalize_ram().ram(), 1);
        assert_eq!(z(&[(1, 1, 1), (2, 1, 1)], 2, None).normalize_ram().ram(), 2);
        assert_eq!(z(&[], 6, None).normalize_ram().ram(), 1);
    }

    #[test]
    fn display() {
        let s = PuiseuxSeries::new(Var::Z, 2, [(-4, c(-1, 1)), (-1, c(3, 2))], None);
        assert_eq!(s.to_string(), "-z^(-2) + 3/2*z^(-1/2)");
        let t = PuiseuxSeries::new(Var::Theta, 2, [(0, c(1, 1)), (2, c(-1, 1))], Some(3));
        assert_eq!(t.to_string(), "1 - theta + O(theta^(3/2))");
        assert_eq!(PuiseuxSeries::zero(Var::Z).to_string(), "0");
    }
}
