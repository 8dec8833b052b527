//! Brute-force operator checks on finite monomial windows.
//!
//! An operator is stored column by column: column `k` is the image of
//! `z^(k/q)` as a sparse vector indexed by exponent numerators. Each column
//! carries a bound below which its entries are exact. Truncation at the
//! window edges only ever lowers that bound, so every assertion made on
//! entries below it holds for the untruncated operator.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::Coefficient;
use crate::mellin::{self, TransformOptions};
use crate::objects::{canonical_diffop_series, iso_equivalent, ConnectionObject, DiffOpObject, Object, Point};
use crate::puiseux::{binomial_coefficients, Exp, PuiseuxSeries, Var};

/// Columns `k0..=k1`, exponent numerators over `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub q: i64,
    pub k0: i64,
    pub k1: i64,
}

impl Window {
    pub fn new(q: i64, k0: i64, k1: i64) -> Result<Window> {
        if q <= 0 || k0 > k1 {
            return Err(Error::WindowTooSmall(format!("q = {}, columns [{}, {}]", q, k0, k1)));
        }
        Ok(Window { q, k0, k1 })
    }

    /// Columns `[-8q, 8q]`.
    pub fn default_for(q: i64) -> Window {
        Window { q, k0: -8 * q, k1: 8 * q }
    }

    pub fn columns(&self) -> std::ops::RangeInclusive<i64> {
        self.k0..=self.k1
    }

    /// First row that is never stored.
    fn top(&self) -> i64 {
        self.k1 + 1
    }

    /// The same exponent range with ramification `q * factor`.
    pub fn refine(&self, factor: i64) -> Window {
        Window {
            q: self.q * factor,
            k0: self.k0 * factor,
            k1: self.k1 * factor,
        }
    }

    fn exp(&self, numer: i64) -> Exp {
        Exp::new(numer, self.q)
    }
}

/// Sparse vector of exponent numerators. Entries below `valid_to` are exact;
/// `valid_to = None` marks a vector nothing is known about.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowVector {
    entries: BTreeMap<i64, Coefficient>,
    valid_to: Option<i64>,
}

impl WindowVector {
    pub fn unreliable() -> Self {
        WindowVector {
            entries: BTreeMap::new(),
            valid_to: None,
        }
    }

    /// Sums duplicate rows and drops zeros and rows at or above `valid_to`.
    pub fn exact(entries: impl IntoIterator<Item = (i64, Coefficient)>, valid_to: i64) -> Self {
        let mut map: BTreeMap<i64, Coefficient> = BTreeMap::new();
        for (k, c) in entries {
            if k >= valid_to {
                continue;
            }
            let v = match map.remove(&k) {
                Some(old) => &old + &c,
                None => c,
            };
            if !v.is_zero() {
                map.insert(k, v);
            }
        }
        WindowVector {
            entries: map,
            valid_to: Some(valid_to),
        }
    }

    pub fn basis(k: i64, w: &Window) -> Self {
        WindowVector::exact([(k, Coefficient::one())], w.top())
    }

    /// The coefficient vector of `s` on the window.
    pub fn from_series(s: &PuiseuxSeries, w: &Window) -> Result<Self> {
        let s = lift_to(s, w.q)?;
        let valid = s.trunc().map_or(w.top(), |t| t.min(w.top()));
        Ok(WindowVector::exact(s.terms().iter().map(|(k, c)| (*k, c.clone())), valid))
    }

    pub fn entries(&self) -> &BTreeMap<i64, Coefficient> {
        &self.entries
    }

    pub fn get(&self, row: i64) -> Option<&Coefficient> {
        self.entries.get(&row)
    }

    pub fn valid_to(&self) -> Option<i64> {
        self.valid_to
    }

    pub fn is_reliable(&self) -> bool {
        self.valid_to.is_some()
    }

    pub fn leading(&self) -> Option<(i64, &Coefficient)> {
        self.entries.iter().next().map(|(k, c)| (*k, c))
    }

    fn combine(&self, other: &WindowVector, c: &Coefficient) -> WindowVector {
        match (self.valid_to, other.valid_to) {
            (Some(a), Some(b)) => WindowVector::exact(
                self.entries
                    .iter()
                    .map(|(k, v)| (*k, v.clone()))
                    .chain(other.entries.iter().map(|(k, v)| (*k, v * c))),
                a.min(b),
            ),
            _ => WindowVector::unreliable(),
        }
    }

    pub fn add(&self, other: &WindowVector) -> WindowVector {
        self.combine(other, &Coefficient::one())
    }

    pub fn sub(&self, other: &WindowVector) -> WindowVector {
        self.combine(other, &-Coefficient::one())
    }

    pub fn scale(&self, c: &Coefficient) -> WindowVector {
        match self.valid_to {
            Some(v) => WindowVector::exact(self.entries.iter().map(|(k, x)| (*k, x * c)), v),
            None => WindowVector::unreliable(),
        }
    }
}

/// Operator recipes that `WindowOperator::build` turns into matrices.
#[derive(Clone, Debug)]
pub enum OpSpec {
    Identity,
    /// Multiplication by a series.
    MulBy(PuiseuxSeries),
    /// `z^n d/dz`.
    ZPowDdz(i64),
    /// `d/dz + z^(-1) f`.
    Nabla(PuiseuxSeries),
    /// `z d/dz + f`.
    ZNabla(PuiseuxSeries),
    /// `-(z d/dz + f)`.
    Eta(PuiseuxSeries),
    /// `z nabla_z` at infinity in the coordinate `zeta = 1/z`: `-zeta d/dzeta + f`.
    ZetaNabla(PuiseuxSeries),
    /// `z nabla` at a finite point `x` in the coordinate `z_x`: `(x + z_x)(d/dz_x + z_x^(-1) f)`.
    XNabla(Coefficient, PuiseuxSeries),
    /// `g phi` with `phi(theta) = theta / (1 + theta)`.
    Phi(PuiseuxSeries),
    Commutator(Box<OpSpec>, Box<OpSpec>),
}

fn lift_to(s: &PuiseuxSeries, q: i64) -> Result<PuiseuxSeries> {
    if q % s.ram() != 0 {
        return Err(Error::RamMismatch(s.ram(), q));
    }
    Ok(s.lift(q))
}

/// Matrix of an operator on a window; see the module docs for the
/// reliability bookkeeping.
#[derive(Clone, Debug)]
pub struct WindowOperator {
    window: Window,
    band_lo: i64,
    band_hi: Option<i64>,
    cols: BTreeMap<i64, WindowVector>,
}

impl WindowOperator {
    fn from_columns(
        window: Window,
        band_lo: i64,
        band_hi: Option<i64>,
        mut col: impl FnMut(i64) -> Result<WindowVector>,
    ) -> Result<Self> {
        let mut cols = BTreeMap::new();
        for k in window.columns() {
            cols.insert(k, col(k)?);
        }
        Ok(WindowOperator {
            window,
            band_lo,
            band_hi,
            cols,
        })
    }

    pub fn identity(window: Window) -> Self {
        WindowOperator::from_columns(window, 0, Some(0), |k| Ok(WindowVector::basis(k, &window)))
            .expect("identity columns are infallible")
    }

    pub fn build(spec: &OpSpec, window: Window) -> Result<Self> {
        let w = window;
        match spec {
            OpSpec::Identity => Ok(WindowOperator::identity(w)),
            OpSpec::MulBy(f) => {
                let f = lift_to(f, w.q)?;
                let lo = f.terms().keys().next().copied().unwrap_or(0);
                let hi = f.terms().keys().next_back().copied().unwrap_or(0);
                WindowOperator::from_columns(w, lo, Some(hi), |k| {
                    let valid = f.trunc().map_or(w.top(), |t| (k + t).min(w.top()));
                    Ok(WindowVector::exact(
                        f.terms().iter().map(|(j, c)| (k + j, c.clone())),
                        valid,
                    ))
                })
            }
            OpSpec::ZPowDdz(n) => {
                let shift = w.q * (n - 1);
                WindowOperator::from_columns(w, shift, Some(shift), |k| {
                    Ok(WindowVector::exact([(k + shift, Coefficient::from_ratio(k, w.q))], w.top()))
                })
            }
            OpSpec::Nabla(f) => {
                let d = WindowOperator::build(&OpSpec::ZPowDdz(0), w)?;
                let m = WindowOperator::build(&OpSpec::MulBy(f.mul_monomial(&Coefficient::one(), -1, 1)), w)?;
                Ok(d.add(&m))
            }
            OpSpec::ZNabla(f) => {
                let d = WindowOperator::build(&OpSpec::ZPowDdz(1), w)?;
                Ok(d.add(&WindowOperator::build(&OpSpec::MulBy(f.clone()), w)?))
            }
            OpSpec::Eta(f) => Ok(WindowOperator::build(&OpSpec::ZNabla(f.clone()), w)?.neg()),
            OpSpec::ZetaNabla(f) => {
                let d = WindowOperator::build(&OpSpec::ZPowDdz(1), w)?.neg();
                Ok(d.add(&WindowOperator::build(&OpSpec::MulBy(f.clone()), w)?))
            }
            OpSpec::XNabla(x, f) => {
                let shift = PuiseuxSeries::new(
                    f.var(),
                    1,
                    [(0, x.clone()), (1, Coefficient::one())],
                    None,
                );
                let m = WindowOperator::build(&OpSpec::MulBy(shift), w)?;
                Ok(m.compose(&WindowOperator::build(&OpSpec::Nabla(f.clone()), w)?))
            }
            OpSpec::Phi(g) => {
                let g = lift_to(g, w.q)?;
                let lo = g.terms().keys().next().copied().ok_or(Error::ZeroLeading)?;
                WindowOperator::from_columns(w, lo, None, |k| {
                    let n = ((w.top() - k - lo).max(0) / w.q + 1) as usize;
                    let binom = binomial_coefficients(Exp::new(-k, w.q), n);
                    let valid = g.trunc().map_or(w.top(), |t| (k + t).min(w.top()));
                    let mut entries = Vec::new();
                    for (t, b) in binom.iter().enumerate() {
                        for (j, c) in g.terms() {
                            entries.push((k + t as i64 * w.q + j, b * c));
                        }
                    }
                    Ok(WindowVector::exact(entries, valid))
                })
            }
            OpSpec::Commutator(a, b) => {
                let a = WindowOperator::build(a, w)?;
                let b = WindowOperator::build(b, w)?;
                Ok(a.commutator(&b))
            }
        }
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// Declared band `[lo, hi]` of row minus column; `hi = None` is unbounded.
    pub fn band(&self) -> (i64, Option<i64>) {
        (self.band_lo, self.band_hi)
    }

    pub fn column(&self, k: i64) -> Option<&WindowVector> {
        self.cols.get(&k)
    }

    pub fn columns(&self) -> impl Iterator<Item = (i64, &WindowVector)> {
        self.cols.iter().map(|(k, v)| (*k, v))
    }

    pub fn reliable_columns(&self) -> usize {
        self.cols.values().filter(|c| c.is_reliable()).count()
    }

    /// Applies the operator to a vector.
    pub fn apply(&self, v: &WindowVector) -> WindowVector {
        let w = &self.window;
        let Some(vt) = v.valid_to else {
            return WindowVector::unreliable();
        };
        let mut valid = vt.saturating_add(self.band_lo).min(w.top());
        let mut acc: Vec<(i64, Coefficient)> = Vec::new();
        for (row, c) in &v.entries {
            let Some(col) = self.cols.get(row) else {
                return WindowVector::unreliable();
            };
            let Some(cv) = col.valid_to else {
                return WindowVector::unreliable();
            };
            valid = valid.min(cv);
            acc.extend(col.entries.iter().map(|(r, x)| (*r, c * x)));
        }
        WindowVector::exact(acc, valid)
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &WindowOperator) -> WindowOperator {
        assert_eq!(self.window, other.window, "window mismatch");
        WindowOperator {
            window: self.window,
            band_lo: self.band_lo + other.band_lo,
            band_hi: self.band_hi.zip(other.band_hi).map(|(a, b)| a + b),
            cols: other.cols.iter().map(|(k, v)| (*k, self.apply(v))).collect(),
        }
    }

    fn zip_with(&self, other: &WindowOperator, f: impl Fn(&WindowVector, &WindowVector) -> WindowVector) -> WindowOperator {
        assert_eq!(self.window, other.window, "window mismatch");
        WindowOperator {
            window: self.window,
            band_lo: self.band_lo.min(other.band_lo),
            band_hi: self.band_hi.zip(other.band_hi).map(|(a, b)| a.max(b)),
            cols: self
                .cols
                .iter()
                .map(|(k, v)| (*k, f(v, &other.cols[k])))
                .collect(),
        }
    }

    pub fn add(&self, other: &WindowOperator) -> WindowOperator {
        self.zip_with(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &WindowOperator) -> WindowOperator {
        self.zip_with(other, |a, b| a.sub(b))
    }

    pub fn scale(&self, c: &Coefficient) -> WindowOperator {
        WindowOperator {
            cols: self.cols.iter().map(|(k, v)| (*k, v.scale(c))).collect(),
            ..self.clone()
        }
    }

    pub fn neg(&self) -> WindowOperator {
        self.scale(&-Coefficient::one())
    }

    pub fn pow(&self, n: u32) -> WindowOperator {
        let mut acc = WindowOperator::identity(self.window);
        for _ in 0..n {
            acc = self.compose(&acc);
        }
        acc
    }

    pub fn commutator(&self, other: &WindowOperator) -> WindowOperator {
        self.compose(other).sub(&other.compose(self))
    }

    /// Solves `self u = v` by back-substitution from the leading band.
    pub fn apply_inverse(&self, v: &WindowVector) -> Result<WindowVector> {
        let w = &self.window;
        let lo = self.band_lo;
        let Some(mut res_valid) = v.valid_to else {
            return Ok(WindowVector::unreliable());
        };
        let mut res = v.entries.clone();
        let mut u: Vec<(i64, Coefficient)> = Vec::new();
        let mut stop = w.top();
        while let Some((&i, c)) = res.iter().next() {
            if i >= res_valid {
                break;
            }
            let k = i - lo;
            if k > w.k1 {
                stop = stop.min(k);
                break;
            }
            let Some(col) = self.cols.get(&k) else {
                return Ok(WindowVector::unreliable());
            };
            let cv = match col.valid_to {
                Some(cv) if cv > i => cv,
                _ => {
                    stop = stop.min(k);
                    break;
                }
            };
            let lead = col.get(i).ok_or(Error::SingularLeading(k))?;
            let t = c.checked_div(lead)?;
            for (r, x) in &col.entries {
                let nv = match res.remove(r) {
                    Some(old) => &old - &(&t * x),
                    None => -(&t * x),
                };
                if !nv.is_zero() {
                    res.insert(*r, nv);
                }
            }
            // Exact cancellation of the pivot, also in approximate mode.
            res.remove(&i);
            res_valid = res_valid.min(cv);
            res.retain(|r, _| *r < res_valid);
            u.push((k, t));
        }
        let valid = res_valid.saturating_sub(lo).min(stop).min(w.top());
        Ok(WindowVector::exact(u, valid))
    }

    pub fn inverse(&self) -> Result<WindowOperator> {
        let w = self.window;
        WindowOperator::from_columns(w, -self.band_lo, None, |k| self.apply_inverse(&WindowVector::basis(k, &w)))
    }

    /// Smallest exponent shift `(row - k)/q` over the leading entries of
    /// reliable nonzero columns.
    pub fn measured_order(&self) -> Option<Exp> {
        self.cols
            .iter()
            .filter(|(_, v)| v.is_reliable())
            .filter_map(|(k, v)| v.leading().map(|(r, _)| r - k))
            .min()
            .map(|s| self.window.exp(s))
    }
}

/// Outcome of asserting that an operator difference has order above a bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    /// Minimum over conclusive columns of the leading shift (or the
    /// validity bound for columns that vanish).
    pub certified: Option<Exp>,
    /// Columns that either exhibit a leading entry or vanish beyond the bound.
    pub conclusive: usize,
    /// Columns whose leading entry sits at or below the bound.
    pub violations: usize,
}

/// Certifies `Ord(d) > required`; `required = None` asserts `d = 0` on
/// every reliable entry.
pub fn certify(d: &WindowOperator, required: Option<Exp>) -> Certificate {
    let w = d.window;
    let mut cert = Certificate {
        certified: None,
        conclusive: 0,
        violations: 0,
    };
    let note = |e: Exp, cert: &mut Certificate| {
        cert.certified = Some(cert.certified.map_or(e, |c: Exp| c.min(e)));
        cert.conclusive += 1;
    };
    for (k, v) in d.columns() {
        let Some(vt) = v.valid_to else { continue };
        match v.leading() {
            Some((r, _)) => {
                let e = w.exp(r - k);
                if required.is_none_or(|req| e <= req) {
                    cert.violations += 1;
                }
                note(e, &mut cert);
            }
            None => {
                let e = w.exp(vt - k);
                if required.is_none_or(|req| e > req) {
                    note(e, &mut cert);
                }
            }
        }
    }
    cert
}

/// Per-check result, serialized as `{check, params, certified_order, required_order, pass}`.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub check: String,
    pub params: BTreeMap<String, String>,
    pub certified_order: Option<Exp>,
    pub required_order: Option<Exp>,
    pub pass: bool,
}

impl OracleReport {
    fn new(check: &str, params: &[(&str, String)]) -> Self {
        OracleReport {
            check: check.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            certified_order: None,
            required_order: None,
            pass: false,
        }
    }

    fn certified(mut self, cert: &Certificate, required: Option<Exp>) -> Result<Self> {
        if cert.conclusive == 0 {
            return Err(Error::WindowTooSmall(format!("no conclusive column for {}", self.check)));
        }
        self.certified_order = cert.certified;
        self.required_order = required;
        self.pass = cert.violations == 0;
        self.params.insert("conclusive_columns".into(), cert.conclusive.to_string());
        Ok(self)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "check": self.check,
            "params": self.params,
            "certified_order": self.certified_order.map(|e| e.to_string()),
            "required_order": self.required_order.map(|e| e.to_string()),
            "pass": self.pass,
        })
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.check, if self.pass { "PASS" } else { "FAIL" })?;
        match (self.certified_order, self.required_order) {
            (Some(c), Some(r)) => write!(f, " (certified order {} vs required > {})", c, r)?,
            (Some(c), None) => write!(f, " (exact on all reliable entries, checked through relative order {})", c)?,
            _ => {}
        }
        for (k, v) in &self.params {
            write!(f, "\n  {} = {}", k, v)?;
        }
        Ok(())
    }
}

fn ord_of(f: &PuiseuxSeries) -> Result<Exp> {
    f.ord().ok_or(Error::SingularLeading(0))
}

/// Checks the three-term expansion of `(A + B)^m` for `A = f`, `B = z^n d/dz`.
pub fn check_operator_root_integer(f: &PuiseuxSeries, n: i64, q: i64, m: u32, window: Option<Window>) -> Result<OracleReport> {
    let o = ord_of(f)?;
    if n == 0 || o >= Exp::from_integer(n - 1) {
        return Err(Error::HypothesisViolated(format!("need ord(f) = {} < n - 1 = {}", o, n - 1)));
    }
    if m < 2 {
        return Err(Error::HypothesisViolated(format!("m = {} must be at least 2", m)));
    }
    let q = q.lcm(&f.ram());
    let w = window.unwrap_or_else(|| Window::default_for(q));
    let a = WindowOperator::build(&OpSpec::MulBy(f.clone()), w)?;
    let b = WindowOperator::build(&OpSpec::ZPowDdz(n), w)?;
    let lhs = a.add(&b).pow(m);
    let mi = m as i64;
    let rhs = a
        .pow(m)
        .add(&a.pow(m - 1).compose(&b).scale(&Coefficient::from_int(mi)))
        .add(&a.pow(m - 2).compose(&b.commutator(&a)).scale(&Coefficient::from_ratio(mi * (mi - 1), 2)));
    let required = o * Exp::from_integer(mi - 1) + Exp::from_integer(n - 1);
    let cert = certify(&lhs.sub(&rhs), Some(required));
    OracleReport::new(
        "lemma51",
        &[("f", f.to_string()), ("n", n.to_string()), ("m", m.to_string()), ("q", w.q.to_string())],
    )
    .certified(&cert, Some(required))
}

/// `sum_mu z^(mu/q) P_mu(D)` with `D = z d/dz`; terms at `mu >= bound` are unknown.
#[derive(Clone, Debug)]
struct OpSeries {
    q: i64,
    terms: BTreeMap<i64, Vec<Coefficient>>,
    bound: Option<i64>,
}

fn poly_trim(mut p: Vec<Coefficient>) -> Vec<Coefficient> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn poly_add(a: &[Coefficient], b: &[Coefficient]) -> Vec<Coefficient> {
    let n = a.len().max(b.len());
    let z = Coefficient::zero();
    poly_trim((0..n).map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z)).collect())
}

fn poly_mul(a: &[Coefficient], b: &[Coefficient]) -> Vec<Coefficient> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Coefficient::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    poly_trim(out)
}

/// `P(D + c)`.
fn poly_shift(p: &[Coefficient], c: &Coefficient) -> Vec<Coefficient> {
    let mut out: Vec<Coefficient> = Vec::new();
    for coef in p.iter().rev() {
        // Horner: out = out * (D + c) + coef
        let mut next = vec![Coefficient::zero(); out.len() + 1];
        for (i, x) in out.iter().enumerate() {
            next[i + 1] = &next[i + 1] + x;
            next[i] = &next[i] + &(x * c);
        }
        next[0] = &next[0] + coef;
        out = next;
    }
    poly_trim(out)
}

fn poly_eval(p: &[Coefficient], x: &Coefficient) -> Coefficient {
    p.iter().rev().fold(Coefficient::zero(), |acc, c| &(&acc * x) + c)
}

impl OpSeries {
    fn from_series(s: &PuiseuxSeries, q: i64) -> Result<Self> {
        let s = lift_to(s, q)?;
        Ok(OpSeries {
            q,
            terms: s.terms().iter().map(|(k, c)| (*k, vec![c.clone()])).collect(),
            bound: s.trunc(),
        })
    }

    fn constant(q: i64, c: Coefficient) -> Self {
        OpSeries {
            q,
            terms: [(0, vec![c])].into_iter().collect(),
            bound: None,
        }
    }

    /// `z^(mu/q) P(D)`.
    fn term(q: i64, mu: i64, p: Vec<Coefficient>) -> Self {
        let mut terms = BTreeMap::new();
        let p = poly_trim(p);
        if !p.is_empty() {
            terms.insert(mu, p);
        }
        OpSeries { q, terms, bound: None }
    }

    fn lowest(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    fn clean(mut self) -> Self {
        if let Some(b) = self.bound {
            self.terms.retain(|mu, _| *mu < b);
        }
        self.terms.retain(|_, p| !p.is_empty());
        self
    }

    fn truncate(mut self, bound: i64) -> Self {
        self.bound = Some(self.bound.map_or(bound, |b| b.min(bound)));
        self.clean()
    }

    fn add(&self, o: &OpSeries) -> OpSeries {
        let mut terms = self.terms.clone();
        for (mu, p) in &o.terms {
            let v = poly_add(terms.get(mu).map_or(&[][..], |x| x.as_slice()), p);
            terms.insert(*mu, v);
        }
        OpSeries {
            q: self.q,
            terms,
            bound: min_opt(self.bound, o.bound),
        }
        .clean()
    }

    fn scale(&self, c: &Coefficient) -> OpSeries {
        OpSeries {
            q: self.q,
            terms: self
                .terms
                .iter()
                .map(|(mu, p)| (*mu, poly_trim(p.iter().map(|x| x * c).collect())))
                .collect(),
            bound: self.bound,
        }
        .clean()
    }

    /// Left multiplication by `z^(mu/q)`.
    fn shift(&self, mu: i64) -> OpSeries {
        OpSeries {
            q: self.q,
            terms: self.terms.iter().map(|(k, p)| (k + mu, p.clone())).collect(),
            bound: self.bound.map(|b| b + mu),
        }
    }

    /// `(z^mu P(D)) (z^nu Q(D)) = z^(mu+nu) P(D + nu/q) Q(D)`.
    fn mul(&self, o: &OpSeries) -> OpSeries {
        let bound = min_opt(
            self.bound.map(|b| b + o.lowest().unwrap_or(0)),
            o.bound.map(|b| b + self.lowest().unwrap_or(0)),
        );
        let mut terms: BTreeMap<i64, Vec<Coefficient>> = BTreeMap::new();
        for (nu, qp) in &o.terms {
            for (mu, pp) in &self.terms {
                if bound.is_some_and(|b| mu + nu >= b) {
                    continue;
                }
                let shifted = poly_shift(pp, &Coefficient::from_ratio(*nu, self.q));
                let prod = poly_mul(&shifted, qp);
                let e = terms.entry(mu + nu).or_default();
                *e = poly_add(e, &prod);
            }
        }
        OpSeries { q: self.q, terms, bound }.clean()
    }

    /// `z^(-c/q) X z^(c/q)`.
    fn conjugate(&self, c: i64) -> OpSeries {
        let cc = Coefficient::from_ratio(c, self.q);
        OpSeries {
            q: self.q,
            terms: self.terms.iter().map(|(mu, p)| (*mu, poly_shift(p, &cc))).collect(),
            bound: self.bound,
        }
    }

    fn to_window(&self, w: &Window) -> Result<WindowOperator> {
        if w.q != self.q {
            return Err(Error::RamMismatch(self.q, w.q));
        }
        let lo = self.lowest().unwrap_or(0);
        WindowOperator::from_columns(*w, lo, self.terms.keys().next_back().copied(), |k| {
            let x = Coefficient::from_ratio(k, w.q);
            let valid = self.bound.map_or(w.top(), |b| (k + b).min(w.top()));
            Ok(WindowVector::exact(
                self.terms.iter().map(|(mu, p)| (k + mu, poly_eval(p, &x))),
                valid,
            ))
        })
    }
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Solves `sum_{i<p} Delta(D + i c) = e(D)` for the polynomial `Delta`.
fn solve_conjugate_sum(e: &[Coefficient], p: u32, c: &Coefficient) -> Result<Vec<Coefficient>> {
    let mut res = e.to_vec();
    let mut delta = vec![Coefficient::zero(); e.len()];
    let pc = Coefficient::from_int(p as i64);
    for j in (0..e.len()).rev() {
        let t = res[j].checked_div(&pc)?;
        if t.is_zero() {
            continue;
        }
        let mut mono = vec![Coefficient::zero(); j + 1];
        mono[j] = t.clone();
        for i in 0..p as i64 {
            let s = poly_shift(&mono, &(c * &Coefficient::from_int(i)));
            res = poly_add(&res, &s.iter().map(|x| -x).collect::<Vec<_>>());
        }
        res.resize(e.len(), Coefficient::zero());
        delta[j] = t;
    }
    Ok(poly_trim(delta))
}

/// A `p`-th root of a monic operator `y = z^o (1 + N)`, accurate through
/// relative valuation `rel_bound` (numerators over `q`).
fn operator_root(y: &OpSeries, p: u32, rel_bound: i64) -> Result<OpSeries> {
    let q = y.q;
    let o = y.lowest().ok_or(Error::SingularLeading(0))?;
    if y.terms[&o] != vec![Coefficient::one()] {
        return Err(Error::SingularLeading(o));
    }
    if o % p as i64 != 0 {
        return Err(Error::RamMismatch(q, p as i64));
    }
    let gamma = o / p as i64;
    let one = OpSeries::constant(q, Coefficient::one());
    let target = y.shift(-o).truncate(rel_bound);
    let mut k = OpSeries::term(q, 0, Vec::new());
    loop {
        let factor = one.add(&k);
        let mut prod = one.clone();
        for i in (0..p as i64).rev() {
            prod = prod.mul(&factor.conjugate(i * gamma)).truncate(rel_bound);
        }
        let err = target.add(&prod.scale(&-Coefficient::one())).truncate(rel_bound);
        let Some(mu) = err.lowest() else { break };
        if mu <= 0 {
            return Err(Error::SingularLeading(mu));
        }
        let delta = solve_conjugate_sum(&err.terms[&mu], p, &Coefficient::from_ratio(gamma, q))?;
        k = k.add(&OpSeries::term(q, mu, delta));
    }
    Ok(one.add(&k).truncate(rel_bound).shift(gamma))
}

/// Builds `R` with `R^p = (A + B)/a` for `A = f = a z^o + ...`, `B = z^n d/dz`,
/// and checks it on the window.
pub fn check_operator_root_fractional(f: &PuiseuxSeries, n: i64, q: i64, p: u32, window: Option<Window>) -> Result<OracleReport> {
    let (lk, a) = f.leading().map(|(k, c)| (k, c.clone())).ok_or(Error::SingularLeading(0))?;
    let o = Exp::new(lk, f.ram());
    if n == 0 || o >= Exp::from_integer(n - 1) {
        return Err(Error::HypothesisViolated(format!("need ord(f) = {} < n - 1 = {}", o, n - 1)));
    }
    if p == 0 {
        return Err(Error::HypothesisViolated("p must be positive".into()));
    }
    let q = q.lcm(&f.ram()) * p as i64;
    let w = match window {
        Some(w) if q % w.q == 0 => w.refine(q / w.q),
        Some(w) => return Err(Error::RamMismatch(w.q, q)),
        None => Window::default_for(q),
    };
    let inv_a = a.inv()?;
    let y = OpSeries::from_series(f, q)?
        .add(&OpSeries::term(q, q * (n - 1), vec![Coefficient::zero(), Coefficient::one()]))
        .scale(&inv_a);
    // Agreement is required through two orders of the derivative part.
    let required = Exp::from_integer(2 * (n - 1)) - o;
    let rel_bound = ((required - o) * Exp::from_integer(q)).to_integer() + 2 * q;
    let r = operator_root(&y, p, rel_bound)?.to_window(&w)?;
    let diff = r.pow(p).sub(&y.to_window(&w)?);
    let cert = certify(&diff, Some(required));
    OracleReport::new(
        "lemma51-root",
        &[("f", f.to_string()), ("n", n.to_string()), ("p", p.to_string()), ("q", q.to_string())],
    )
    .certified(&cert, Some(required))
}

/// Checks `(eta + 1) Phi = Phi eta` and `[nabla, z] = 1` with `eta = -z nabla`,
/// `Phi = z`, together with `(z nabla)(z nabla)^(-1) = 1`.
pub fn check_commutation(f: &PuiseuxSeries, window: Option<Window>) -> Result<OracleReport> {
    let w = window.unwrap_or_else(|| Window::default_for(f.ram()));
    let x = WindowOperator::build(&OpSpec::ZNabla(f.clone()), w)?;
    let theta = x.inverse()?;
    let eta = x.neg();
    let phi = WindowOperator::build(&OpSpec::MulBy(PuiseuxSeries::monomial(f.var(), Coefficient::one(), 1, 1)), w)?;
    let id = WindowOperator::identity(w);
    let nabla = WindowOperator::build(&OpSpec::Nabla(f.clone()), w)?;
    let checks = [
        eta.add(&id).compose(&phi).sub(&phi.compose(&eta)),
        nabla.commutator(&phi).sub(&id),
        x.compose(&theta).sub(&id),
    ];
    let mut report = OracleReport::new("commutation", &[("f", f.to_string()), ("q", w.q.to_string())]);
    let mut certified: Option<Exp> = None;
    let mut pass = true;
    let mut conclusive = usize::MAX;
    for d in &checks {
        let cert = certify(d, None);
        if cert.conclusive == 0 {
            return Err(Error::WindowTooSmall("no conclusive column for commutation".into()));
        }
        pass &= cert.violations == 0;
        conclusive = conclusive.min(cert.conclusive);
        certified = min_exp(certified, cert.certified);
    }
    report.certified_order = certified;
    report.pass = pass;
    report.params.insert("conclusive_columns".into(), conclusive.to_string());
    Ok(report)
}

fn min_exp(a: Option<Exp>, b: Option<Exp>) -> Option<Exp> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Compares `(-theta)^(r/s)`, raised to the `s`-th power, with the
/// three-term expansion in `f` and `z d/dz` (the derivative acting on the
/// column `z^(n/r)` as `n/r`). Works with `u = f/a` so that every power is
/// exact: `Ptilde^s` is compared against `a^r (-theta)^r`.
pub fn check_expansion_10_3(f: &PuiseuxSeries, window: Option<Window>) -> Result<OracleReport> {
    let f = f.normalize_ram();
    let (lk, a) = f.leading().map(|(k, c)| (k, c.clone())).ok_or(Error::SingularLeading(0))?;
    let o = Exp::new(lk, f.ram());
    if o >= Exp::from_integer(0) {
        return Err(Error::SlopeNotPositive(format!("ord(f) = {}", o)));
    }
    let (s, r) = (-*o.numer(), *o.denom());
    let q = f.ram().lcm(&r);
    let w = window.unwrap_or_else(|| Window::default_for(q));
    if w.q != q {
        return Err(Error::RamMismatch(w.q, q));
    }
    let required = Exp::from_integer(s - 1) + Exp::new(r + s, r);
    // Series precision: the relative order needed, plus slack.
    let span = required + Exp::from_integer(3);
    let prec = |x: &PuiseuxSeries| -> PuiseuxSeries {
        let ord = x.ord().unwrap_or(Exp::from_integer(0));
        x.truncate_exp(ord + span)
    };
    let ft = prec(&f);
    let u = ft.scale(&a.inv()?);
    let m = Exp::new(-r, s);
    let big_u = u.pow_rational(m, 0)?;
    let f_inv = ft.invert()?;
    let zf1 = ft.derivative().mul_monomial(&Coefficient::one(), 1, 1);
    let rs = Exp::new(r, s);
    let c2 = Coefficient::from_ratio(-*rs.numer(), *rs.denom());
    let half = rs * (rs + Exp::from_integer(1)) / Exp::from_integer(2);
    let c3 = Coefficient::from_ratio(*half.numer(), *half.denom());
    let t2 = big_u.checked_mul(&f_inv)?;
    let t3 = big_u.checked_mul(&f_inv.pow_int(2)?)?.checked_mul(&zf1)?;
    let p_tilde = OpSeries::from_series(&big_u, q)?
        .add(&OpSeries::from_series(&t2.scale(&c2), q)?.mul(&OpSeries::term(q, 0, vec![Coefficient::zero(), Coefficient::one()])))
        .add(&OpSeries::from_series(&t3.scale(&c3), q)?);
    let lhs = p_tilde.to_window(&w)?.pow(s as u32);
    let x = WindowOperator::build(&OpSpec::ZNabla(f.clone()), w)?;
    let neg_theta = x.inverse()?;
    let rhs = neg_theta.pow(r as u32).scale(&a.pow(r)?);
    let cert = certify(&lhs.sub(&rhs), Some(required));
    OracleReport::new(
        "exp103",
        &[("f", f.to_string()), ("a", a.to_string()), ("s", s.to_string()), ("r", r.to_string())],
    )
    .certified(&cert, Some(required))
}

/// Operator `z nabla` of `E_f` at `point`, in the local coordinate.
pub fn znabla_spec(point: &Point, f: &PuiseuxSeries) -> OpSpec {
    match point {
        Point::Zero => OpSpec::ZNabla(f.clone()),
        Point::Infinity => OpSpec::ZetaNabla(f.clone()),
        Point::Finite(x) => OpSpec::XNabla(x.clone(), f.clone()),
    }
}

/// Recovers the class of `g` from the operators alone and compares it with
/// the transform output. With `theta = -(z nabla)^(-1)` and `Phi = z`, the
/// vector `1` spans the module over `k((theta))` when the output has
/// ramification 1, and `z . 1 = G(theta) . 1` gives `Phi = G phi` in that
/// basis. `G` is found by eliminating `z` against `theta^k(1)`.
pub fn check_transform_class(point: &Point, f: &PuiseuxSeries, opts: &TransformOptions) -> Result<OracleReport> {
    let f = f.normalize_ram();
    let q = f.ram();
    let w = Window::default_for(q);
    let x = WindowOperator::build(&znabla_spec(point, &f), w)?;
    let theta = x.inverse()?.neg();
    let step = theta.band().0;
    if step <= 0 {
        return Err(Error::SlopeNotPositive(format!("theta has order {}", w.exp(step))));
    }
    let z_coord = match point {
        Point::Zero => PuiseuxSeries::monomial(Var::Z, Coefficient::one(), 1, 1),
        Point::Infinity => PuiseuxSeries::monomial(Var::Zeta, Coefficient::one(), -1, 1),
        Point::Finite(x) => PuiseuxSeries::new(Var::Zx, 1, [(0, x.clone()), (1, Coefficient::one())], None),
    };
    let mut res = WindowVector::from_series(&z_coord, &w)?;
    let (first, _) = res.leading().ok_or(Error::ZeroLeading)?;
    // Two exponents past lambda + 1 are enough for the class.
    let last = first + 3 * step;
    let e0 = WindowVector::basis(0, &w);
    let basis = |k: i64| -> Result<WindowVector> {
        let mut v = e0.clone();
        if k >= 0 {
            for _ in 0..k {
                v = theta.apply(&v);
            }
        } else {
            // theta^(-1) = -z nabla
            let theta_inv = x.neg();
            for _ in 0..(-k) {
                v = theta_inv.apply(&v);
            }
        }
        Ok(v)
    };
    let mut g_terms = Vec::new();
    loop {
        let Some(vt) = res.valid_to() else {
            return Err(Error::WindowTooSmall("residual became unreliable".into()));
        };
        let lead = res.leading().map(|(e, c)| (e, c.clone()));
        match lead {
            Some((e, c)) if e <= last && e < vt => {
                if e % step != 0 {
                    return Err(Error::Unsupported("class recovery needs output ramification 1".into()));
                }
                let k = e / step;
                let b = basis(k)?;
                let bl = b.get(e).ok_or(Error::SingularLeading(k))?;
                let coef = c.checked_div(bl)?;
                res = res.sub(&b.scale(&coef));
                g_terms.push((k, coef));
            }
            _ => {
                if vt <= last {
                    return Err(Error::WindowTooSmall(format!("residual known only below row {}", vt)));
                }
                break;
            }
        }
    }
    let g_oracle = PuiseuxSeries::new(Var::Theta, 1, g_terms, Some(last / step + 1));
    let conn = ConnectionObject::single(point.clone(), f.clone());
    let out = match point {
        Point::Zero => mellin::mellin_0_inf(&conn, opts)?,
        Point::Finite(_) => mellin::mellin_x_inf(&conn, opts)?,
        Point::Infinity => mellin::mellin_inf_inf(&conn, opts)?,
    };
    let g_transform = out.components.first().ok_or(Error::ZeroLeading)?.series.clone();
    let canon = canonical_diffop_series(&g_oracle)?;
    let mut report = OracleReport::new(
        "class",
        &[
            ("point", point.tag()),
            ("f", f.to_string()),
            ("g_oracle", canon.to_string()),
            ("g_transform", g_transform.to_string()),
        ],
    );
    report.pass = out.components.len() == 1 && canon == g_transform;
    Ok(report)
}

/// Forward then inverse transform (or the reverse for difference operators),
/// compared up to isomorphism. Difference operators go back to the point
/// their order selects (`0`, `x = a_0`, or infinity).
pub fn check_roundtrip(o: &Object, opts: &TransformOptions) -> Result<OracleReport> {
    let back = match o {
        Object::Connection(e) => {
            let d = match &e.point {
                Point::Zero => mellin::mellin_0_inf(e, opts)?,
                Point::Finite(_) => mellin::mellin_x_inf(e, opts)?,
                Point::Infinity => mellin::mellin_inf_inf(e, opts)?,
            };
            Object::Connection(match &e.point {
                Point::Zero => mellin::inverse_mellin_0_inf(&d, opts)?,
                Point::Finite(x) => mellin::inverse_mellin_x_inf(&d, x, opts)?,
                Point::Infinity => mellin::inverse_mellin_inf_inf(&d, opts)?,
            })
        }
        Object::DiffOp(d) => {
            let first = d.components.first().ok_or(Error::ZeroLeading)?;
            let (k, lead) = first.series.leading().ok_or(Error::ZeroLeading)?;
            let e = if k > 0 {
                mellin::inverse_mellin_0_inf(d, opts)?
            } else if k == 0 {
                mellin::inverse_mellin_x_inf(d, &lead.clone(), opts)?
            } else {
                mellin::inverse_mellin_inf_inf(d, opts)?
            };
            let d2: DiffOpObject = match &e.point {
                Point::Zero => mellin::mellin_0_inf(&e, opts)?,
                Point::Finite(_) => mellin::mellin_x_inf(&e, opts)?,
                Point::Infinity => mellin::mellin_inf_inf(&e, opts)?,
            };
            Object::DiffOp(d2)
        }
    };
    let mut report = OracleReport::new("roundtrip", &[("input", o.to_string().replace('\n', "; ")), ("output", back.to_string().replace('\n', "; "))]);
    report.pass = iso_equivalent(o, &back)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(p: i64, q: i64) -> Coefficient {
        Coefficient::from_ratio(p, q)
    }

    fn z(ram: i64, terms: &[(i64, i64, i64)]) -> PuiseuxSeries {
        PuiseuxSeries::new(Var::Z, ram, terms.iter().map(|&(k, p, q)| (k, c(p, q))), None)
    }

    #[test]
    fn znabla_example_and_identity() {
        let w = Window::default_for(1);
        let x = WindowOperator::build(&OpSpec::ZNabla(z(1, &[(-1, -1, 1)])), w).unwrap();
        let col = x.column(3).unwrap();
        assert_eq!(col.get(3), Some(&c(3, 1)));
        assert_eq!(col.get(2), Some(&c(-1, 1)));
        let id = WindowOperator::build(&OpSpec::MulBy(z(1, &[(0, 1, 1)])), w).unwrap();
        assert!(certify(&id.sub(&WindowOperator::identity(w)), None).violations == 0);
    }

    #[test]
    fn theta_expansion() {
        let w = Window::default_for(1);
        let x = WindowOperator::build(&OpSpec::ZNabla(z(1, &[(-1, -1, 1)])), w).unwrap();
        let theta = x.inverse().unwrap().neg();
        for n in -5..4 {
            let col = theta.column(n).unwrap();
            assert_eq!(col.get(n + 1), Some(&c(1, 1)));
            assert_eq!(col.get(n + 2).cloned().unwrap_or_else(Coefficient::zero), c(n + 1, 1));
            assert!(col.get(n).is_none());
        }
        let r = certify(&x.compose(&theta).neg().sub(&WindowOperator::identity(w)), None);
        assert_eq!(r.violations, 0);
        assert!(r.conclusive > 8);
    }

    #[test]
    fn inverse_of_multiplication() {
        let w = Window::default_for(1);
        let m = WindowOperator::build(&OpSpec::MulBy(z(1, &[(1, 1, 1)])), w).unwrap();
        let inv = m.inverse().unwrap();
        for k in -6..6 {
            let col = inv.column(k).unwrap();
            assert_eq!(col.entries().len(), 1);
            assert_eq!(col.get(k - 1), Some(&c(1, 1)));
        }
        assert!(!inv.column(w.k0).unwrap().is_reliable());
    }

    #[test]
    fn commutator_of_derivation_and_multiplication() {
        let w = Window::default_for(2);
        let f = z(2, &[(-2, 1, 1), (-1, 3, 1)]);
        let comm = WindowOperator::build(
            &OpSpec::Commutator(Box::new(OpSpec::ZPowDdz(1)), Box::new(OpSpec::MulBy(f.clone()))),
            w,
        )
        .unwrap();
        let zf = f.derivative().mul_monomial(&Coefficient::one(), 1, 1);
        let expect = WindowOperator::build(&OpSpec::MulBy(zf), w).unwrap();
        assert_eq!(certify(&comm.sub(&expect), None).violations, 0);
    }

    #[test]
    fn lemma_examples() {
        let r = check_operator_root_integer(&z(1, &[(-1, 1, 1)]), 1, 1, 2, None).unwrap();
        assert!(r.pass);
        assert_eq!(r.certified_order, Some(Exp::from_integer(0)));
        let r = check_operator_root_integer(&z(1, &[(-2, 1, 1)]), 1, 1, 3, None).unwrap();
        assert!(r.pass, "{}", r);
        assert!(matches!(
            check_operator_root_integer(&z(1, &[(1, 1, 1)]), 1, 1, 2, None),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn root_examples() {
        let r = check_operator_root_fractional(&z(1, &[(-1, 1, 1)]), 1, 1, 2, None).unwrap();
        assert!(r.pass, "{}", r);
        let r = check_operator_root_fractional(&z(1, &[(-1, 1, 1)]), 1, 1, 1, None).unwrap();
        assert!(r.pass, "{}", r);
        assert!(check_operator_root_fractional(&PuiseuxSeries::zero(Var::Z), 1, 1, 2, None).is_err());
    }

    #[test]
    fn commutation_examples() {
        assert!(check_commutation(&z(1, &[(-1, -1, 1)]), None).unwrap().pass);
        assert!(check_commutation(&z(1, &[(-2, -1, 1)]), None).unwrap().pass);
    }

    #[test]
    fn expansion_examples() {
        for f in [z(1, &[(-1, -1, 1)]), z(1, &[(-1, 2, 1)]), z(1, &[(-2, -1, 1)])] {
            let r = check_expansion_10_3(&f, None).unwrap();
            assert!(r.pass, "{}", r);
        }
    }

    #[test]
    fn class_recovery() {
        let opts = TransformOptions::default();
        for f in [z(1, &[(-1, -1, 1)]), z(1, &[(-1, 1, 2)]), z(2, &[(-1, 1, 1)])] {
            let r = check_transform_class(&Point::Zero, &f, &opts).unwrap();
            assert!(r.pass, "{}", r);
        }
        let zeta = |p, q| PuiseuxSeries::new(Var::Zeta, 1, [(-1, c(p, q))], None);
        for f in [zeta(-1, 1), zeta(1, 2), zeta(3, 1)] {
            let r = check_transform_class(&Point::Infinity, &f, &opts).unwrap();
            assert!(r.pass, "{}", r);
        }
        let alpha = PuiseuxSeries::constant(Var::Zx, c(1, 3));
        let r = check_transform_class(&Point::Finite(c(2, 1)), &alpha, &opts).unwrap();
        assert!(r.pass, "{}", r);
    }
}
