//! Local Mellin transforms between connections at `0`, `x`, `infinity` and
//! difference operators near infinity, and their inverses.
//!
//! Each transform works on one component at a time: it solves the defining
//! system for `theta` as a series in the local coordinate, reverts it, and
//! adds the explicit correction term. Working precision is chosen so that
//! the output is known exactly on the class-relevant window
//! (through `theta^(lambda+1)` for difference operators, through exponent 0
//! for connections), plus `margin` extra exponent units.

use crate::error::{Error, Result};
use crate::field::{nth_root, Coefficient};
use crate::objects::{
    canonical_connection_series, canonical_diffop_series, Component, ConnectionObject,
    DiffOpObject, Object, Point,
};
use crate::puiseux::{Exp, PuiseuxSeries, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformKind {
    M0Inf,
    MxInf,
    MinfInf,
    InvM0Inf,
    InvMxInf,
    InvMinfInf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransformOptions {
    /// Extra exponent units of working precision.
    pub margin: u32,
    /// Root branch used for every fractional power.
    pub branch: i64,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions { margin: 2, branch: 0 }
    }
}

/// Intermediate series of a forward transform on one component.
#[derive(Clone, Debug)]
pub struct ForwardTrace {
    /// `theta` as a series in the local coordinate.
    pub theta: PuiseuxSeries,
    /// Reverted series (`z = h(theta)`, `z_x = h(theta)`, or `zeta = h(theta)`).
    pub h: PuiseuxSeries,
    /// Uncanonicalized `g`.
    pub g: PuiseuxSeries,
    /// Expected ramification of the output.
    pub ram: i64,
}

/// Intermediate series of an inverse transform on one component.
#[derive(Clone, Debug)]
pub struct InverseTrace {
    /// The series that gets reverted (`z(theta)`, `z_x(theta)` or `zeta(theta)`).
    pub coordinate: PuiseuxSeries,
    /// `theta` as a series in the local coordinate.
    pub theta: PuiseuxSeries,
    /// Uncanonicalized `f`.
    pub f: PuiseuxSeries,
    pub ram: i64,
}

fn theta_monomial(c: Coefficient, k: i64, ram: i64) -> PuiseuxSeries {
    PuiseuxSeries::monomial(Var::Theta, c, k, ram)
}

fn ensure_known_through(s: &PuiseuxSeries, e: Exp, what: &str) -> Result<()> {
    match s.trunc_exp() {
        Some(t) if t <= e => Err(Error::PrecisionExhausted(format!(
            "{} known only below exponent {}, need {}",
            what, t, e
        ))),
        _ => Ok(()),
    }
}

/// Working relative precision: `base` numerators plus `margin` units.
fn working(base: i64, ram: i64, opts: &TransformOptions) -> i64 {
    base + 1 + opts.margin as i64 * ram
}

/// Zero to infinity on one component: `f = a z^(-s/r) + ...` with `s > 0`.
pub fn trace_0_inf(f: &PuiseuxSeries, opts: &TransformOptions) -> Result<ForwardTrace> {
    let f = f.with_var(Var::Z);
    let (k0, a) = f
        .leading()
        .ok_or_else(|| Error::SlopeNotPositive("class of f is zero".into()))?;
    if k0 >= 0 {
        return Err(Error::SlopeNotPositive(format!("ord f = {} is not negative", f.ord().unwrap())));
    }
    let (r, s) = (f.ram(), -k0);
    let p = working(s, r, opts);
    let theta = -(f.truncate(k0 + p).invert()?);
    let h = theta.revert(Var::Theta, opts.branch)?;
    // (-a)^(r/s) on the branch used by the reversion.
    let root = nth_root(&-a, s as u32, opts.branch)?.pow(r)?;
    let corr = theta_monomial(&root * &Coefficient::from_ratio(r + s, 2 * s), r + s, s);
    let g = h.checked_sub(&corr)?;
    ensure_known_through(&g, Exp::new(r + s, s), "g")?;
    Ok(ForwardTrace { theta, h, g, ram: s })
}

/// Finite point `x` to infinity on one component (regular or irregular).
pub fn trace_x_inf(f: &PuiseuxSeries, x: &Coefficient, opts: &TransformOptions) -> Result<ForwardTrace> {
    let f = f.with_var(Var::Zx);
    let (k0, _) = f.leading().ok_or(Error::HorizontalSection)?;
    if k0 > 0 {
        return Err(Error::SlopeNotPositive("f has positive order; canonicalize first".into()));
    }
    let (r, s) = (f.ram(), -k0);
    let p = working(s, r, opts);
    // x + z_x known well past the precision of f.
    let z = PuiseuxSeries::new(Var::Zx, 1, [(0, x.clone()), (1, Coefficient::one())], None);
    let zf = z.checked_mul(&f.truncate(k0 + p))?;
    let zx = PuiseuxSeries::monomial(Var::Zx, Coefficient::one(), 1, 1);
    let theta = -(zx.checked_mul(&zf.invert()?)?);
    let h = theta.revert(Var::Theta, opts.branch)?;
    let corr = theta_monomial(x * &Coefficient::from_ratio(s, 2 * (s + r)), 1, 1);
    let g = PuiseuxSeries::constant(Var::Theta, x.clone())
        .checked_add(&h)?
        .checked_add(&corr)?;
    ensure_known_through(&g, Exp::from_integer(1), "g")?;
    Ok(ForwardTrace { theta, h, g, ram: r + s })
}

/// Infinity to infinity on one component: `f = a zeta^(-s/r) + ...`, `s > 0`.
///
/// The correction is `c_z * ((r+s)/(2s)) * theta^(1 - r/s)` where `c_z` is
/// the leading coefficient of `z(theta)`, i.e. `(-a)^(-r/s)`.
pub fn trace_inf_inf(f: &PuiseuxSeries, opts: &TransformOptions) -> Result<ForwardTrace> {
    let f = f.with_var(Var::Zeta);
    let (k0, _) = f
        .leading()
        .ok_or_else(|| Error::SlopeNotPositive("class of f is zero".into()))?;
    if k0 >= 0 {
        return Err(Error::SlopeNotPositive(format!("ord f = {} is not negative", f.ord().unwrap())));
    }
    let (r, s) = (f.ram(), -k0);
    let p = working(s, r, opts);
    let theta = -(f.truncate(k0 + p).invert()?);
    let zeta = theta.revert(Var::Theta, opts.branch)?;
    let z = zeta.invert()?.lift(s);
    let (_, cz) = z.leading().ok_or(Error::ZeroLeading)?;
    let corr = theta_monomial(cz * &Coefficient::from_ratio(r + s, 2 * s), s - r, s);
    let g = z.checked_sub(&corr)?;
    ensure_known_through(&g, Exp::new(s - r, s), "g")?;
    Ok(ForwardTrace { theta, h: zeta, g, ram: s })
}

/// Inverse of zero to infinity on one component: `g = a theta^(p/q) + ...`.
pub fn trace_inv_0_inf(g: &PuiseuxSeries, opts: &TransformOptions) -> Result<InverseTrace> {
    let g = g.with_var(Var::Theta);
    let (k0, a) = g.leading().ok_or(Error::ZeroLeading)?;
    if k0 <= 0 {
        return Err(Error::NotInDomain(format!("ord g = {} is not positive", g.ord().unwrap())));
    }
    let (q, p) = (g.ram(), k0);
    let corr = theta_monomial(a * &Coefficient::from_ratio(p + q, 2 * q), p + q, q);
    let work = working(q, q, opts);
    let coordinate = g.checked_add(&corr)?.truncate(k0 + work);
    let theta = coordinate.revert(Var::Z, opts.branch)?;
    let f = -(theta.invert()?);
    ensure_known_through(&f, Exp::from_integer(0), "f")?;
    Ok(InverseTrace { coordinate, theta, f, ram: p })
}

/// Inverse of finite point to infinity: `g = x + b theta^(r/(r+s)) + ...`.
pub fn trace_inv_x_inf(g: &PuiseuxSeries, x: &Coefficient, opts: &TransformOptions) -> Result<InverseTrace> {
    let g = g.with_var(Var::Theta);
    let (k0, lead) = g.leading().ok_or(Error::ZeroLeading)?;
    if k0 != 0 || lead != x {
        return Err(Error::NotInDomain(format!(
            "need order 0 with leading coefficient {}, got {} at order {}",
            x,
            lead,
            g.ord().unwrap()
        )));
    }
    let big_q = g.ram();
    let d = g.checked_sub(&PuiseuxSeries::constant(Var::Theta, x.clone()))?;
    let (r, _) = d
        .leading()
        .ok_or_else(|| Error::NotInDomain("g - x vanishes".into()))?;
    let s = big_q - r;
    if s < 0 {
        return Err(Error::NotInDomain(format!("ord(g - x) = {} exceeds 1", d.ord().unwrap())));
    }
    let corr = theta_monomial(x * &Coefficient::from_ratio(s, 2 * (s + r)), big_q, big_q);
    let work = working(s, r, opts);
    let coordinate = d.checked_sub(&corr)?.truncate(r + work);
    let theta = coordinate.revert(Var::Zx, opts.branch)?;
    let zx = PuiseuxSeries::monomial(Var::Zx, Coefficient::one(), 1, 1);
    let z = PuiseuxSeries::new(Var::Zx, 1, [(0, x.clone()), (1, Coefficient::one())], None)
        .truncate_exp(Exp::new(work, r) + Exp::from_integer(2));
    let f = -(zx.checked_mul(&z.checked_mul(&theta)?.invert()?)?);
    ensure_known_through(&f, Exp::from_integer(0), "f")?;
    Ok(InverseTrace { coordinate, theta, f, ram: r })
}

/// Inverse of infinity to infinity: `g = b theta^(-r/s) + ...`.
pub fn trace_inv_inf_inf(g: &PuiseuxSeries, opts: &TransformOptions) -> Result<InverseTrace> {
    let g = g.with_var(Var::Theta);
    let (k0, b) = g.leading().ok_or(Error::ZeroLeading)?;
    if k0 >= 0 {
        return Err(Error::NotInDomain(format!("ord g = {} is not negative", g.ord().unwrap())));
    }
    let (s, r) = (g.ram(), -k0);
    let corr = theta_monomial(b * &Coefficient::from_ratio(r + s, 2 * s), s - r, s);
    let work = working(s, s, opts);
    let z = g.checked_add(&corr)?.truncate(k0 + work);
    let coordinate = z.invert()?;
    let theta = coordinate.revert(Var::Zeta, opts.branch)?;
    let f = -(theta.invert()?);
    ensure_known_through(&f, Exp::from_integer(0), "f")?;
    Ok(InverseTrace { coordinate, theta, f, ram: r })
}

fn map_components<T>(
    comps: &[Component],
    mut step: impl FnMut(&PuiseuxSeries) -> Result<T>,
    mut out: impl FnMut(T) -> Result<PuiseuxSeries>,
) -> Result<Vec<Component>> {
    comps
        .iter()
        .map(|c| Ok(Component::new(out(step(&c.series)?)?, c.jordan)))
        .collect()
}

pub fn mellin_0_inf(e: &ConnectionObject, opts: &TransformOptions) -> Result<DiffOpObject> {
    if e.point != Point::Zero {
        return Err(Error::UnsupportedPoint(format!("expected zero, got {}", e.point.tag())));
    }
    let e = e.canonicalize();
    let comps = map_components(&e.components, |f| trace_0_inf(f, opts), |t| canonical_diffop_series(&t.g))?;
    DiffOpObject::new(comps).canonicalize()
}

pub fn mellin_x_inf(e: &ConnectionObject, opts: &TransformOptions) -> Result<DiffOpObject> {
    let Point::Finite(x) = &e.point else {
        return Err(Error::UnsupportedPoint(format!("expected a finite point, got {}", e.point.tag())));
    };
    let e = e.canonicalize();
    let comps = map_components(&e.components, |f| trace_x_inf(f, x, opts), |t| canonical_diffop_series(&t.g))?;
    DiffOpObject::new(comps).canonicalize()
}

pub fn mellin_inf_inf(e: &ConnectionObject, opts: &TransformOptions) -> Result<DiffOpObject> {
    if e.point != Point::Infinity {
        return Err(Error::UnsupportedPoint(format!("expected infinity, got {}", e.point.tag())));
    }
    let e = e.canonicalize();
    let comps = map_components(&e.components, |f| trace_inf_inf(f, opts), |t| canonical_diffop_series(&t.g))?;
    DiffOpObject::new(comps).canonicalize()
}

pub fn inverse_mellin_0_inf(d: &DiffOpObject, opts: &TransformOptions) -> Result<ConnectionObject> {
    let d = d.canonicalize()?;
    let comps = map_components(&d.components, |g| trace_inv_0_inf(g, opts), |t| {
        Ok(canonical_connection_series(&t.f))
    })?;
    Ok(ConnectionObject::new(Point::Zero, comps).canonicalize())
}

pub fn inverse_mellin_x_inf(d: &DiffOpObject, x: &Coefficient, opts: &TransformOptions) -> Result<ConnectionObject> {
    let d = d.canonicalize()?;
    let comps = map_components(&d.components, |g| trace_inv_x_inf(g, x, opts), |t| {
        Ok(canonical_connection_series(&t.f))
    })?;
    Ok(ConnectionObject::new(Point::Finite(x.clone()), comps).canonicalize())
}

pub fn inverse_mellin_inf_inf(d: &DiffOpObject, opts: &TransformOptions) -> Result<ConnectionObject> {
    let d = d.canonicalize()?;
    let comps = map_components(&d.components, |g| trace_inv_inf_inf(g, opts), |t| {
        Ok(canonical_connection_series(&t.f))
    })?;
    Ok(ConnectionObject::new(Point::Infinity, comps).canonicalize())
}

/// Dispatches a transform request. `x` is required for `InvMxInf`.
pub fn transform(kind: TransformKind, input: &Object, x: Option<&Coefficient>, opts: &TransformOptions) -> Result<Object> {
    match (kind, input) {
        (TransformKind::M0Inf, Object::Connection(e)) => Ok(Object::DiffOp(mellin_0_inf(e, opts)?)),
        (TransformKind::MxInf, Object::Connection(e)) => Ok(Object::DiffOp(mellin_x_inf(e, opts)?)),
        (TransformKind::MinfInf, Object::Connection(e)) => Ok(Object::DiffOp(mellin_inf_inf(e, opts)?)),
        (TransformKind::InvM0Inf, Object::DiffOp(d)) => Ok(Object::Connection(inverse_mellin_0_inf(d, opts)?)),
        (TransformKind::InvMxInf, Object::DiffOp(d)) => {
            let x = x.ok_or_else(|| Error::UnsupportedPoint("inverse at a finite point needs x".into()))?;
            Ok(Object::Connection(inverse_mellin_x_inf(d, x, opts)?))
        }
        (TransformKind::InvMinfInf, Object::DiffOp(d)) => Ok(Object::Connection(inverse_mellin_inf_inf(d, opts)?)),
        _ => Err(Error::KindMismatch),
    }
}

/// Target subcategories of difference operators.
#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    Positive,
    Zero(Coefficient),
    Negative,
}

/// Whether every component's order (and leading coefficient for
/// `Zero(x)`) lies in the target subcategory.
pub fn check_membership(d: &DiffOpObject, target: &Target) -> bool {
    d.components.iter().all(|c| {
        let Some((k, lead)) = c.series.leading() else {
            return false;
        };
        match target {
            Target::Positive => k > 0,
            Target::Negative => k < 0,
            Target::Zero(x) => k == 0 && lead == x,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(p: i64, q: i64) -> Coefficient {
        Coefficient::from_ratio(p, q)
    }

    fn series(var: Var, ram: i64, terms: &[(i64, i64, i64)]) -> PuiseuxSeries {
        PuiseuxSeries::new(var, ram, terms.iter().map(|&(k, p, q)| (k, c(p, q))), None)
    }

    fn opts() -> TransformOptions {
        TransformOptions::default()
    }

    #[test]
    fn zero_examples() {
        let t = trace_0_inf(&series(Var::Z, 1, &[(-1, -1, 1)]), &opts()).unwrap();
        assert_eq!(t.g.truncate(3), series(Var::Theta, 1, &[(1, 1, 1), (2, -1, 1)]).truncate(3));
        let t = trace_0_inf(&series(Var::Z, 1, &[(-1, 1, 1)]), &opts()).unwrap();
        assert_eq!(t.g.truncate(3), series(Var::Theta, 1, &[(1, -1, 1), (2, 1, 1)]).truncate(3));
        let t = trace_0_inf(&series(Var::Z, 1, &[(-2, -1, 1)]), &opts()).unwrap();
        assert_eq!(
            canonical_diffop_series(&t.g).unwrap(),
            series(Var::Theta, 2, &[(1, 1, 1), (3, 1, 4)])
        );
    }

    #[test]
    fn finite_examples() {
        let t = trace_x_inf(&series(Var::Zx, 1, &[(0, 1, 3)]), &c(2, 1), &opts()).unwrap();
        assert_eq!(canonical_diffop_series(&t.g).unwrap(), series(Var::Theta, 1, &[(0, 2, 1), (1, 4, 3)]));
        let t = trace_x_inf(&series(Var::Zx, 1, &[(-1, -1, 1)]), &c(1, 1), &opts()).unwrap();
        assert_eq!(
            t.g.truncate(4),
            series(Var::Theta, 2, &[(0, 1, 1), (1, 1, 1), (2, 3, 4), (3, 1, 8)]).truncate(4)
        );
        assert_eq!(
            canonical_diffop_series(&t.g).unwrap(),
            series(Var::Theta, 2, &[(0, 1, 1), (1, 1, 1), (2, 1, 4)])
        );
    }

    #[test]
    fn infinity_examples() {
        let t = trace_inf_inf(&series(Var::Zeta, 1, &[(-1, -1, 1)]), &opts()).unwrap();
        assert_eq!(t.g.truncate(1), series(Var::Theta, 1, &[(-1, 1, 1), (0, -1, 1)]).truncate(1));
        let t = trace_inf_inf(&series(Var::Zeta, 1, &[(-2, -1, 1)]), &opts()).unwrap();
        assert_eq!(t.g.truncate(2), series(Var::Theta, 2, &[(-1, 1, 1), (1, -3, 4)]).truncate(2));
    }

    #[test]
    fn inverse_examples() {
        let t = trace_inv_0_inf(&series(Var::Theta, 1, &[(1, 1, 1)]), &opts()).unwrap();
        assert_eq!(canonical_connection_series(&t.f), series(Var::Z, 1, &[(-1, -1, 1)]));
        let t = trace_inv_0_inf(&series(Var::Theta, 1, &[(1, 1, 1), (2, -1, 1)]), &opts()).unwrap();
        assert_eq!(t.coordinate, series(Var::Theta, 1, &[(1, 1, 1)]).truncate(t.coordinate.trunc().unwrap()));
        assert!(matches!(
            trace_inv_0_inf(&series(Var::Theta, 1, &[(-1, 1, 1)]), &opts()),
            Err(Error::NotInDomain(_))
        ));
        let t = trace_inv_inf_inf(&series(Var::Theta, 1, &[(-1, 1, 1), (0, -1, 1)]), &opts()).unwrap();
        assert_eq!(canonical_connection_series(&t.f), series(Var::Zeta, 1, &[(-1, -1, 1)]));
        let g = series(Var::Theta, 2, &[(0, 1, 1), (1, 1, 1), (2, 1, 4)]);
        let t = trace_inv_x_inf(&g, &c(1, 1), &opts()).unwrap();
        assert_eq!(canonical_connection_series(&t.f), series(Var::Zx, 1, &[(-1, -1, 1)]));
        assert!(matches!(trace_inv_x_inf(&g, &c(3, 1), &opts()), Err(Error::NotInDomain(_))));
    }

    #[test]
    fn membership() {
        let d = DiffOpObject::single(series(Var::Theta, 1, &[(1, 1, 1)]));
        assert!(check_membership(&d, &Target::Positive));
        let d = DiffOpObject::single(series(Var::Theta, 1, &[(-1, 1, 1), (0, -1, 1)]));
        assert!(check_membership(&d, &Target::Negative));
        let d = DiffOpObject::single(series(Var::Theta, 1, &[(0, 2, 1), (1, 1, 1)]));
        assert!(!check_membership(&d, &Target::Zero(c(3, 1))));
        assert!(check_membership(&d, &Target::Zero(c(2, 1))));
    }
}
