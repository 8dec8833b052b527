//! Connection and difference-operator objects, canonical classes, Galois
//! orbits and order formulas.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{root_of_unity_factor, Coefficient, FieldConfig, UnitFactor};
use crate::puiseux::{Exp, PuiseuxSeries, SeriesJson, Var};

/// Singular point of a connection; selects the local coordinate.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Zero,
    Finite(Coefficient),
    Infinity,
}

impl Point {
    /// Local coordinate: `z`, `z_x = z - x`, or `zeta = 1/z`.
    pub fn var(&self) -> Var {
        match self {
            Point::Zero => Var::Z,
            Point::Finite(_) => Var::Zx,
            Point::Infinity => Var::Zeta,
        }
    }

    pub fn tag(&self) -> String {
        match self {
            Point::Zero => "zero".into(),
            Point::Finite(x) => format!("x:{}", x),
            Point::Infinity => "infinity".into(),
        }
    }

    pub fn parse(tag: &str, cfg: &FieldConfig) -> Result<Point> {
        match tag.trim() {
            "zero" | "0" => Ok(Point::Zero),
            "infinity" | "inf" => Ok(Point::Infinity),
            t => {
                let body = t.strip_prefix("x:").or_else(|| t.strip_prefix("x=")).unwrap_or(t);
                let x = cfg
                    .parse_coefficient(body)
                    .map_err(|_| Error::syntax(0, format!("unknown point '{}'", t)))?;
                if x.is_zero() {
                    return Err(Error::UnsupportedPoint("finite point must be nonzero".into()));
                }
                Ok(Point::Finite(x))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub series: PuiseuxSeries,
    pub jordan: u32,
}

impl Component {
    pub fn new(series: PuiseuxSeries, jordan: u32) -> Self {
        assert!(jordan >= 1, "Jordan size must be positive");
        Component { series, jordan }
    }

    pub fn simple(series: PuiseuxSeries) -> Self {
        Component::new(series, 1)
    }

    /// Ramification of the component, read from its series.
    pub fn q(&self) -> i64 {
        self.series.ram()
    }
}

/// Direct sum of `E_f ⊗ J_m` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionObject {
    pub point: Point,
    pub components: Vec<Component>,
}

/// Direct sum of `D_g ⊗ T_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffOpObject {
    pub components: Vec<Component>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Object {
    Connection(ConnectionObject),
    DiffOp(DiffOpObject),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    Connection,
    DiffOp,
}

impl ConnectionObject {
    pub fn new(point: Point, components: Vec<Component>) -> Self {
        let var = point.var();
        let components = components
            .into_iter()
            .map(|c| Component::new(c.series.with_var(var), c.jordan))
            .collect();
        ConnectionObject { point, components }
    }

    /// Single component with Jordan size 1.
    pub fn single(point: Point, f: PuiseuxSeries) -> Self {
        ConnectionObject::new(point, vec![Component::simple(f)])
    }

    pub fn canonicalize(&self) -> ConnectionObject {
        let mut components: Vec<Component> = self
            .components
            .iter()
            .map(|c| Component::new(canonical_connection_series(&c.series), c.jordan))
            .collect();
        components.sort_by(component_cmp);
        ConnectionObject {
            point: self.point.clone(),
            components,
        }
    }
}

impl DiffOpObject {
    pub fn new(components: Vec<Component>) -> Self {
        let components = components
            .into_iter()
            .map(|c| Component::new(c.series.with_var(Var::Theta), c.jordan))
            .collect();
        DiffOpObject { components }
    }

    pub fn single(g: PuiseuxSeries) -> Self {
        DiffOpObject::new(vec![Component::simple(g)])
    }

    pub fn canonicalize(&self) -> Result<DiffOpObject> {
        let mut components = self
            .components
            .iter()
            .map(|c| Ok(Component::new(canonical_diffop_series(&c.series)?, c.jordan)))
            .collect::<Result<Vec<_>>>()?;
        components.sort_by(component_cmp);
        Ok(DiffOpObject { components })
    }
}

impl Object {
    pub fn flavor(&self) -> Flavor {
        match self {
            Object::Connection(_) => Flavor::Connection,
            Object::DiffOp(_) => Flavor::DiffOp,
        }
    }

    pub fn components(&self) -> &[Component] {
        match self {
            Object::Connection(c) => &c.components,
            Object::DiffOp(d) => &d.components,
        }
    }

    pub fn canonicalize(&self) -> Result<Object> {
        Ok(match self {
            Object::Connection(c) => Object::Connection(c.canonicalize()),
            Object::DiffOp(d) => Object::DiffOp(d.canonicalize()?),
        })
    }

    pub fn to_json(&self) -> ObjectJson {
        let (kind, point) = match self {
            Object::Connection(c) => ("connection", c.point.tag()),
            Object::DiffOp(_) => ("diffop", "infinity".to_string()),
        };
        ObjectJson {
            kind: kind.into(),
            point,
            components: self
                .components()
                .iter()
                .map(|c| ComponentJson {
                    series: c.series.to_json(),
                    jordan: c.jordan,
                })
                .collect(),
        }
    }

    pub fn from_json(j: &ObjectJson, cfg: &FieldConfig) -> Result<Object> {
        let mut comps = Vec::with_capacity(j.components.len());
        for c in &j.components {
            if c.jordan == 0 {
                return Err(Error::syntax(0, "jordan size must be positive"));
            }
            comps.push(Component::new(PuiseuxSeries::from_json(&c.series, cfg)?, c.jordan));
        }
        match j.kind.as_str() {
            "connection" => Ok(Object::Connection(ConnectionObject::new(
                Point::parse(&j.point, cfg)?,
                comps,
            ))),
            "diffop" => Ok(Object::DiffOp(DiffOpObject::new(comps))),
            k => Err(Error::syntax(0, format!("unknown object kind '{}'", k))),
        }
    }
}

impl fmt::Display for Object {
    /// One component per line; Jordan sizes above 1 are appended.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let comps = self.components();
        if comps.is_empty() {
            return write!(f, "(empty)");
        }
        for (i, c) in comps.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", c.series)?;
            if c.jordan > 1 {
                write!(f, " (jordan {})", c.jordan)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for DiffOpObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Object::DiffOp(self.clone()))
    }
}

impl fmt::Display for ConnectionObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Object::Connection(self.clone()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentJson {
    pub series: SeriesJson,
    pub jordan: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectJson {
    pub kind: String,
    pub point: String,
    pub components: Vec<ComponentJson>,
}

/// Class representative of `f` in `R_q`: positive exponents dropped, the
/// constant reduced into `[0, 1/q)`.
pub fn canonical_connection_series(f: &PuiseuxSeries) -> PuiseuxSeries {
    let q = f.ram();
    let terms = f.terms().iter().filter(|(k, _)| **k <= 0).map(|(k, c)| {
        if *k == 0 {
            (0, c.reduce_mod_inv(q))
        } else {
            (*k, c.clone())
        }
    });
    let trunc = f.trunc().filter(|t| *t <= 0);
    PuiseuxSeries::new(f.var(), q, terms, trunc).normalize_ram()
}

/// Class representative of `g` in `S_q`: exponents above `ord(g) + 1`
/// dropped, `a_q / a_0` reduced into `[0, 1/q)`.
pub fn canonical_diffop_series(g: &PuiseuxSeries) -> Result<PuiseuxSeries> {
    let (k0, a0) = g.leading().ok_or(Error::ZeroLeading)?;
    let q = g.ram();
    let top = k0 + q;
    let known_top = g.trunc().map_or(true, |t| t > top);
    let mut terms: Vec<(i64, Coefficient)> = g
        .terms()
        .iter()
        .filter(|(k, _)| **k < top)
        .map(|(k, c)| (*k, c.clone()))
        .collect();
    if known_top {
        let aq = g.coeff(top).cloned().unwrap_or_else(Coefficient::zero);
        let ratio = aq.checked_div(a0)?.reduce_mod_inv(q);
        terms.push((top, &ratio * a0));
    }
    let trunc = if known_top { None } else { g.trunc() };
    Ok(PuiseuxSeries::new(g.var(), q, terms, trunc).normalize_ram())
}

/// Field configuration matching the coefficients of the given series.
pub fn field_of(series: &[&PuiseuxSeries]) -> FieldConfig {
    for s in series {
        for c in s.terms().values() {
            if let Some((prec, tol)) = c.approx_params() {
                return FieldConfig {
                    mode: crate::field::FieldMode::Approx,
                    precision_bits: prec,
                    tolerance: tol,
                };
            }
        }
    }
    FieldConfig::exact()
}

/// Galois action `var^(1/q) -> zeta_q^j var^(1/q)` with `q = ram(a)`.
pub fn galois_act(a: &PuiseuxSeries, j: i64) -> Result<PuiseuxSeries> {
    let cfg = field_of(&[a]);
    let q = a.ram();
    let mut terms = Vec::with_capacity(a.terms().len());
    for (k, c) in a.terms() {
        match root_of_unity_factor(&cfg, q, j.rem_euclid(q), *k) {
            UnitFactor::Value(u) => terms.push((*k, c * &u)),
            UnitFactor::NonRationalUnit => return Err(Error::NonRationalUnit),
        }
    }
    Ok(PuiseuxSeries::new(a.var(), q, terms, a.trunc()))
}

/// Returns the smallest `j` with `b = act_j(a)`, if any.
pub fn galois_equivalent(a: &PuiseuxSeries, b: &PuiseuxSeries) -> Result<Option<i64>> {
    if a.ram() != b.ram() {
        return Err(Error::RamMismatch(a.ram(), b.ram()));
    }
    if a.var() != b.var() || a.trunc() != b.trunc() {
        return Ok(None);
    }
    let q = a.ram();
    let cfg = field_of(&[a, b]);
    let keys: std::collections::BTreeSet<i64> =
        a.terms().keys().chain(b.terms().keys()).copied().collect();
    let zero = Coefficient::zero();
    'outer: for j in 0..q {
        for k in &keys {
            let ak = a.coeff(*k).unwrap_or(&zero);
            let bk = b.coeff(*k).unwrap_or(&zero);
            match root_of_unity_factor(&cfg, q, j, *k) {
                UnitFactor::Value(u) => {
                    if &(ak * &u) != bk {
                        continue 'outer;
                    }
                }
                // An irrational unit times a nonzero rational is never rational.
                UnitFactor::NonRationalUnit => {
                    if !ak.is_zero() || !bk.is_zero() {
                        continue 'outer;
                    }
                }
            }
        }
        return Ok(Some(j));
    }
    Ok(None)
}

/// Whether the Galois group of `K_q / K` acts freely on the class of `a`.
///
/// `act_j` fixes the class exactly when `zeta_q^(jk) = 1` for every
/// exponent numerator `k` in the support (the leading coefficient, and
/// hence the reduced `a_q / a_0` ratio, must be fixed too), so freeness is
/// `gcd(q, support) = 1`. The flavor does not change the criterion.
pub fn is_primitive(a: &PuiseuxSeries, q: i64, _flavor: Flavor) -> Result<bool> {
    if q % a.ram() != 0 {
        return Err(Error::RamMismatch(a.ram(), q));
    }
    let lifted = a.lift(q);
    let mut g = q;
    for k in lifted.terms().keys() {
        g = num_integer::gcd(g, *k);
    }
    Ok(g == 1)
}

/// Isomorphism of objects: matching `(q, m)` and Galois-equivalent
/// canonical series, component by component.
pub fn iso_equivalent(o1: &Object, o2: &Object) -> Result<bool> {
    Ok(iso_witness(o1, o2)?.is_some())
}

/// A matching `(i, k, j)` of canonical components: component `i` of `o1`
/// equals `act_j` of component `k` of `o2`. `None` when not isomorphic.
pub fn iso_witness(o1: &Object, o2: &Object) -> Result<Option<Vec<(usize, usize, i64)>>> {
    if o1.flavor() != o2.flavor() {
        return Err(Error::KindMismatch);
    }
    if let (Object::Connection(a), Object::Connection(b)) = (o1, o2) {
        if a.point != b.point {
            return Ok(None);
        }
    }
    let c1 = o1.canonicalize()?;
    let c2 = o2.canonicalize()?;
    let (a, b) = (c1.components(), c2.components());
    if a.len() != b.len() {
        return Ok(None);
    }
    // Galois equivalence is an equivalence relation, so greedy matching is
    // complete.
    let mut used = vec![false; b.len()];
    let mut witness = Vec::with_capacity(a.len());
    for (ia, x) in a.iter().enumerate() {
        let mut found = false;
        for (i, y) in b.iter().enumerate() {
            if used[i] || x.jordan != y.jordan || x.q() != y.q() {
                continue;
            }
            if let Some(j) = galois_equivalent(&y.series, &x.series)? {
                used[i] = true;
                found = true;
                witness.push((ia, i, j));
                break;
            }
        }
        if !found {
            return Ok(None);
        }
    }
    Ok(Some(witness))
}

/// Concatenates the components of two objects of the same kind and point.
pub fn direct_sum(o1: &Object, o2: &Object) -> Result<Object> {
    match (o1, o2) {
        (Object::Connection(a), Object::Connection(b)) => {
            if a.point != b.point {
                return Err(Error::KindMismatch);
            }
            let mut comps = a.components.clone();
            comps.extend(b.components.iter().cloned());
            comps.sort_by(component_cmp);
            Ok(Object::Connection(ConnectionObject::new(a.point.clone(), comps)))
        }
        (Object::DiffOp(a), Object::DiffOp(b)) => {
            let mut comps = a.components.clone();
            comps.extend(b.components.iter().cloned());
            comps.sort_by(component_cmp);
            Ok(Object::DiffOp(DiffOpObject::new(comps)))
        }
        _ => Err(Error::KindMismatch),
    }
}

/// Sort key: `(ord, q, m, coefficient sequence)`; the zero series first.
pub fn component_cmp(a: &Component, b: &Component) -> Ordering {
    let oa = a.series.ord();
    let ob = b.series.ord();
    oa.cmp(&ob)
        .then_with(|| a.q().cmp(&b.q()))
        .then_with(|| a.jordan.cmp(&b.jordan))
        .then_with(|| series_cmp(&a.series, &b.series))
}

fn series_cmp(a: &PuiseuxSeries, b: &PuiseuxSeries) -> Ordering {
    let mut ia = a.terms().iter();
    let mut ib = b.terms().iter();
    loop {
        match (ia.next(), ib.next()) {
            (None, None) => return a.trunc().cmp(&b.trunc()),
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some((ka, ca)), Some((kb, cb))) => {
                let o = ka.cmp(kb).then_with(|| ca.total_cmp(cb));
                if o != Ordering::Equal {
                    return o;
                }
            }
        }
    }
}

/// Operator expressions whose orders have closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderExpr {
    Nabla,
    ZNabla,
    ZNablaInverse,
    Phi,
    ThetaPhiInverse,
}

impl OrderExpr {
    pub fn parse(s: &str) -> Result<OrderExpr> {
        match s {
            "nabla" => Ok(OrderExpr::Nabla),
            "znabla" => Ok(OrderExpr::ZNabla),
            "znabla-inv" => Ok(OrderExpr::ZNablaInverse),
            "phi" => Ok(OrderExpr::Phi),
            "thetaphi-inv" => Ok(OrderExpr::ThetaPhiInverse),
            _ => Err(Error::syntax(0, format!("unknown operator expression '{}'", s))),
        }
    }
}

/// `eps^order`, kept symbolic when the order is fractional.
#[derive(Clone, Debug, PartialEq)]
pub struct Norm {
    pub eps: BigRational,
    pub order: Exp,
}

impl Norm {
    /// Exact value when the order is an integer.
    pub fn exact_value(&self) -> Option<BigRational> {
        if !self.order.is_integer() {
            return None;
        }
        let n = self.order.to_integer();
        let base = if n < 0 { self.eps.recip() } else { self.eps.clone() };
        Some(num_traits::pow(base, n.unsigned_abs() as usize))
    }

    pub fn value_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        let e = self.eps.to_f64().unwrap_or(f64::NAN);
        e.powf(*self.order.numer() as f64 / *self.order.denom() as f64)
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact_value() {
            Some(v) => write!(f, "{}", v),
            None => write!(f, "({})^({})", self.eps, self.order),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderReport {
    pub expr: OrderExpr,
    pub orders: Vec<Exp>,
    pub norms: Option<Vec<Norm>>,
}

/// Orders (and optionally norms `eps^order`) of an operator expression on
/// each component.
pub fn order_report(o: &Object, expr: OrderExpr, eps: Option<&BigRational>) -> Result<OrderReport> {
    if let Some(e) = eps {
        if !(e.is_positive() && *e < BigRational::one()) {
            return Err(Error::InvalidEpsilon(format!("{} is not in (0, 1)", e)));
        }
    }
    let canon = o.canonicalize()?;
    let mut orders = Vec::new();
    match &canon {
        Object::Connection(c) => {
            for comp in &c.components {
                let of = comp.series.ord().ok_or(Error::HorizontalSection)?;
                let one = Exp::from_integer(1);
                let ord = match (&c.point, expr) {
                    (Point::Finite(_), OrderExpr::Nabla | OrderExpr::ZNabla) => of - one,
                    (Point::Finite(_), OrderExpr::ZNablaInverse) => one - of,
                    (_, OrderExpr::Nabla) => of - one,
                    (_, OrderExpr::ZNabla) => of,
                    (_, OrderExpr::ZNablaInverse) => -of,
                    _ => return Err(Error::KindMismatch),
                };
                orders.push(ord);
            }
        }
        Object::DiffOp(d) => {
            for comp in &d.components {
                let og = comp.series.ord().ok_or(Error::ZeroLeading)?;
                let ord = match expr {
                    OrderExpr::Phi => og,
                    OrderExpr::ThetaPhiInverse => -og - Exp::from_integer(1),
                    _ => return Err(Error::KindMismatch),
                };
                orders.push(ord);
            }
        }
    }
    let norms = eps.map(|e| {
        orders
            .iter()
            .map(|o| Norm {
                eps: e.clone(),
                order: *o,
            })
            .collect()
    });
    Ok(OrderReport { expr, orders, norms })
}

/// Exact rational `p/q` helper for tests and examples.
pub fn rational(p: i64, q: i64) -> BigRational {
    if q == 0 {
        return BigRational::zero();
    }
    BigRational::new(p.into(), q.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(p: i64, q: i64) -> Coefficient {
        Coefficient::from_ratio(p, q)
    }

    fn s(var: Var, ram: i64, terms: &[(i64, i64, i64)]) -> PuiseuxSeries {
        PuiseuxSeries::new(var, ram, terms.iter().map(|&(k, p, q)| (k, c(p, q))), None)
    }

    #[test]
    fn connection_canon() {
        let f = s(Var::Z, 1, &[(-1, 1, 1), (0, 3, 2), (1, 1, 1)]);
        assert_eq!(canonical_connection_series(&f), s(Var::Z, 1, &[(-1, 1, 1), (0, 1, 2)]));
        assert!(canonical_connection_series(&s(Var::Z, 1, &[(0, 5, 1)])).is_zero());
        let h = s(Var::Z, 2, &[(-1, 1, 1), (1, 1, 1)]);
        assert_eq!(canonical_connection_series(&h), s(Var::Z, 2, &[(-1, 1, 1)]));
    }

    #[test]
    fn diffop_canon() {
        let g = s(Var::Theta, 1, &[(1, 1, 1), (2, -1, 1)]);
        assert_eq!(canonical_diffop_series(&g).unwrap(), s(Var::Theta, 1, &[(1, 1, 1)]));
        let g = s(Var::Theta, 1, &[(1, 2, 1), (2, 1, 1)]);
        assert_eq!(canonical_diffop_series(&g).unwrap(), g);
        // The theta^1 term is dropped, then a_q / a_0 = 1 reduces to 0.
        let g = s(Var::Theta, 1, &[(-1, 1, 1), (0, 1, 1), (1, 1, 1)]);
        assert_eq!(canonical_diffop_series(&g).unwrap(), s(Var::Theta, 1, &[(-1, 1, 1)]));
        let g = s(Var::Theta, 1, &[(-1, 2, 1), (0, 1, 1), (1, 1, 1)]);
        assert_eq!(canonical_diffop_series(&g).unwrap(), s(Var::Theta, 1, &[(-1, 2, 1), (0, 1, 1)]));
    }

    #[test]
    fn galois() {
        let a = s(Var::Z, 2, &[(-1, 1, 1)]);
        let b = s(Var::Z, 2, &[(-1, -1, 1)]);
        assert_eq!(galois_equivalent(&a, &b).unwrap(), Some(1));
        let b2 = s(Var::Z, 2, &[(-1, 2, 1)]);
        assert_eq!(galois_equivalent(&a, &b2).unwrap(), None);
        assert_eq!(galois_equivalent(&a, &a).unwrap(), Some(0));
        let t = s(Var::Z, 3, &[(-1, 1, 1)]);
        assert_eq!(galois_equivalent(&t, &t).unwrap(), Some(0));
        assert_eq!(galois_equivalent(&t, &s(Var::Z, 3, &[(-1, 2, 1)])).unwrap(), None);
    }

    #[test]
    fn primitivity() {
        assert!(is_primitive(&s(Var::Z, 2, &[(-1, 1, 1)]), 2, Flavor::Connection).unwrap());
        assert!(!is_primitive(&s(Var::Z, 1, &[(-1, 1, 1)]), 2, Flavor::Connection).unwrap());
        let g = s(Var::Theta, 2, &[(1, 1, 1), (3, -3, 4)]);
        assert!(is_primitive(&g, 2, Flavor::DiffOp).unwrap());
    }

    #[test]
    fn iso() {
        let e1 = Object::Connection(ConnectionObject::single(Point::Zero, s(Var::Z, 2, &[(-1, 1, 1)])));
        let e2 = Object::Connection(ConnectionObject::single(Point::Zero, s(Var::Z, 2, &[(-1, -1, 1)])));
        assert!(iso_equivalent(&e1, &e2).unwrap());
        let d1 = Object::DiffOp(DiffOpObject::single(s(Var::Theta, 1, &[(1, 1, 1), (2, -1, 1)])));
        let d2 = Object::DiffOp(DiffOpObject::single(s(Var::Theta, 1, &[(1, 1, 1)])));
        assert!(iso_equivalent(&d1, &d2).unwrap());
        let f = s(Var::Z, 1, &[(-1, 1, 1)]);
        let j2 = Object::Connection(ConnectionObject::new(Point::Zero, vec![Component::new(f.clone(), 2)]));
        let ff = Object::Connection(ConnectionObject::new(
            Point::Zero,
            vec![Component::simple(f.clone()), Component::simple(f)],
        ));
        assert!(!iso_equivalent(&j2, &ff).unwrap());
        assert_eq!(iso_equivalent(&e1, &d1), Err(Error::KindMismatch));
    }

    #[test]
    fn orders() {
        let e = Object::Connection(ConnectionObject::single(Point::Zero, s(Var::Z, 1, &[(-2, 1, 1)])));
        let r = order_report(&e, OrderExpr::Nabla, None).unwrap();
        assert_eq!(r.orders, vec![Exp::from_integer(-3)]);
        let r = order_report(&e, OrderExpr::ZNablaInverse, Some(&rational(1, 2))).unwrap();
        assert_eq!(r.orders, vec![Exp::from_integer(2)]);
        assert_eq!(r.norms.unwrap()[0].exact_value(), Some(rational(1, 4)));
        let d = Object::DiffOp(DiffOpObject::single(s(Var::Theta, 2, &[(1, 1, 1)])));
        assert_eq!(order_report(&d, OrderExpr::Phi, None).unwrap().orders, vec![Exp::new(1, 2)]);
        assert_eq!(
            order_report(&d, OrderExpr::ThetaPhiInverse, None).unwrap().orders,
            vec![Exp::new(-3, 2)]
        );
        let flat = Object::Connection(ConnectionObject::single(Point::Zero, s(Var::Z, 1, &[(0, 2, 1)])));
        assert_eq!(order_report(&flat, OrderExpr::Nabla, None), Err(Error::HorizontalSection));
    }

    #[test]
    fn sums() {
        let f = s(Var::Z, 1, &[(-1, 1, 1)]);
        let a = Object::Connection(ConnectionObject::new(Point::Zero, vec![Component::new(f.clone(), 2)]));
        let b = Object::Connection(ConnectionObject::single(Point::Zero, f.clone()));
        let sum = direct_sum(&a, &b).unwrap();
        let m: Vec<u32> = sum.components().iter().map(|c| c.jordan).collect();
        assert_eq!(m, vec![1, 2]);
        let empty = Object::Connection(ConnectionObject::new(Point::Zero, vec![]));
        assert_eq!(direct_sum(&b, &empty).unwrap(), b);
    }
}
