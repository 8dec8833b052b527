//! The global Mellin map from `k[z, 1/z]<D>` (with `[D, z] = 1`) to
//! `k[n]<P, 1/P>` (with `[P, n] = P`), on normal forms.
//!
//! Domain terms are stored as `z^i D^j`, target terms as `n^i P^j`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::Coefficient;

fn binom(n: u32, k: u32) -> i64 {
    let mut b: i64 = 1;
    for i in 0..k as i64 {
        b = b * (n as i64 - i) / (i + 1);
    }
    b
}

/// `c (c - 1) ... (c - t + 1)`.
fn falling(c: i64, t: u32) -> i64 {
    (0..t as i64).map(|i| c - i).product()
}

fn insert(map: &mut BTreeMap<(i64, i64), Coefficient>, key: (i64, i64), c: Coefficient) {
    if c.is_zero() {
        return;
    }
    let v = match map.remove(&key) {
        Some(old) => &old + &c,
        None => c,
    };
    if !v.is_zero() {
        map.insert(key, v);
    }
}

/// Element of `k[z, 1/z]<D>` as a sum of `c z^i D^j`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct DomainElement {
    terms: BTreeMap<(i64, i64), Coefficient>,
}

/// Element of `k[n]<P, 1/P>` as a sum of `c n^i P^j`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TargetElement {
    terms: BTreeMap<(i64, i64), Coefficient>,
}

impl DomainElement {
    pub fn zero() -> Self {
        DomainElement::default()
    }

    pub fn term(c: Coefficient, z_pow: i64, d_pow: u32) -> Self {
        let mut terms = BTreeMap::new();
        insert(&mut terms, (z_pow, d_pow as i64), c);
        DomainElement { terms }
    }

    pub fn scalar(c: Coefficient) -> Self {
        DomainElement::term(c, 0, 0)
    }

    pub fn z() -> Self {
        DomainElement::term(Coefficient::one(), 1, 0)
    }

    pub fn z_inv() -> Self {
        DomainElement::term(Coefficient::one(), -1, 0)
    }

    pub fn nabla() -> Self {
        DomainElement::term(Coefficient::one(), 0, 1)
    }

    /// Terms `(z power, D power, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (i64, u32, &Coefficient)> {
        self.terms.iter().map(|((i, j), c)| (*i, *j as u32, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (k, c) in &o.terms {
            insert(&mut terms, *k, c.clone());
        }
        DomainElement { terms }
    }

    pub fn neg(&self) -> Self {
        DomainElement {
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// Product in normal form via `D^b z^c = sum_t C(b,t) c^(t falling) z^(c-t) D^(b-t)`.
    pub fn mul(&self, o: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for ((a, b), c1) in &self.terms {
            for ((c, d), c2) in &o.terms {
                let prod = c1 * c2;
                for t in 0..=(*b as u32) {
                    let f = binom(*b as u32, t) * falling(*c, t);
                    if f == 0 {
                        continue;
                    }
                    insert(
                        &mut terms,
                        (a + c - t as i64, b - t as i64 + d),
                        prod.scale(f, 1),
                    );
                }
            }
        }
        DomainElement { terms }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = DomainElement::scalar(Coefficient::one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }
}

impl TargetElement {
    pub fn zero() -> Self {
        TargetElement::default()
    }

    pub fn term(c: Coefficient, n_pow: u32, p_pow: i64) -> Self {
        let mut terms = BTreeMap::new();
        insert(&mut terms, (n_pow as i64, p_pow), c);
        TargetElement { terms }
    }

    pub fn scalar(c: Coefficient) -> Self {
        TargetElement::term(c, 0, 0)
    }

    pub fn eta() -> Self {
        TargetElement::term(Coefficient::one(), 1, 0)
    }

    pub fn phi() -> Self {
        TargetElement::term(Coefficient::one(), 0, 1)
    }

    pub fn phi_inv() -> Self {
        TargetElement::term(Coefficient::one(), 0, -1)
    }

    /// Terms `(n power, P power, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (u32, i64, &Coefficient)> {
        self.terms.iter().map(|((i, j), c)| (*i as u32, *j, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (k, c) in &o.terms {
            insert(&mut terms, *k, c.clone());
        }
        TargetElement { terms }
    }

    pub fn neg(&self) -> Self {
        TargetElement {
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// Product in normal form via `P^b n^c = (n + b)^c P^b`.
    pub fn mul(&self, o: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for ((a, b), c1) in &self.terms {
            for ((c, d), c2) in &o.terms {
                let prod = c1 * c2;
                let cu = *c as u32;
                for t in 0..=cu {
                    let f = Coefficient::from_int(binom(cu, t)) * Coefficient::from_int(*b).pow((cu - t) as i64).expect("integer power");
                    if f.is_zero() {
                        continue;
                    }
                    insert(&mut terms, (a + t as i64, b + d), &prod * &f);
                }
            }
        }
        TargetElement { terms }
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }
}

/// The homomorphism `z -> P`, `1/z -> 1/P`, `D -> -(1/P) n`.
pub fn global_mellin(e: &DomainElement) -> TargetElement {
    let nabla_image = TargetElement::phi_inv().mul(&TargetElement::eta()).neg();
    let mut out = TargetElement::zero();
    for (i, j, c) in e.terms() {
        let mut t = TargetElement::term(c.clone(), 0, i);
        for _ in 0..j {
            t = t.mul(&nabla_image);
        }
        out = out.add(&t);
    }
    out
}

fn write_terms<'a>(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (String, &'a Coefficient)>,
) -> fmt::Result {
    let mut first = true;
    for (mono, c) in terms {
        let (neg, mag) = match c.as_rational() {
            Some(r) if *r < num_rational::BigRational::from_integer(0.into()) => (true, -c),
            _ => (false, c.clone()),
        };
        let cs = match &mag {
            Coefficient::Approx(_) => format!("({})", mag),
            _ => mag.to_string(),
        };
        let body = if mono.is_empty() {
            cs
        } else if cs == "1" {
            mono
        } else {
            format!("{}*{}", cs, mono)
        };
        match (first, neg) {
            (true, true) => write!(f, "-{}", body)?,
            (true, false) => write!(f, "{}", body)?,
            (false, true) => write!(f, " - {}", body)?,
            (false, false) => write!(f, " + {}", body)?,
        }
        first = false;
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

fn power(name: &str, e: i64) -> Option<String> {
    match e {
        0 => None,
        1 => Some(name.to_string()),
        e if e > 0 => Some(format!("{}^{}", name, e)),
        e => Some(format!("{}^({})", name, e)),
    }
}

fn monomial(a: (&str, i64), b: (&str, i64)) -> String {
    [power(a.0, a.1), power(b.0, b.1)]
        .into_iter()
        .flatten()
        .collect::<Vec<_>>()
        .join("*")
}

impl fmt::Display for DomainElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(
            f,
            self.terms
                .iter()
                .rev()
                .map(|((i, j), c)| (monomial(("z", *i), ("D", *j)), c)),
        )
    }
}

impl fmt::Display for TargetElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(
            f,
            self.terms
                .iter()
                .rev()
                .map(|((i, j), c)| (monomial(("n", *i), ("P", *j)), c)),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(i64),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() {
            let st = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[st..i].iter().collect();
            let n = text
                .parse()
                .map_err(|_| Error::syntax(st, "integer literal too large"))?;
            out.push((st, Tok::Num(n)));
        } else if ch.is_ascii_alphabetic() {
            let st = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((st, Tok::Ident(chars[st..i].iter().collect())));
        } else if "+-*/^()".contains(ch) {
            out.push((i, Tok::Op(ch)));
            i += 1;
        } else {
            return Err(Error::syntax(i, format!("unexpected character '{}'", ch)));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn at(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<DomainElement> {
        let mut acc = if self.eat('-') {
            self.term()?.neg()
        } else {
            self.term()?
        };
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<DomainElement> {
        let mut acc = self.factor()?;
        while self.eat('*') {
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn int_exponent(&mut self) -> Result<i64> {
        let at = self.at();
        let paren = self.eat('(');
        let neg = self.eat('-');
        let n = match self.peek() {
            Some(Tok::Num(n)) => *n,
            _ => return Err(Error::syntax(at, "expected an integer exponent")),
        };
        self.pos += 1;
        if paren && !self.eat(')') {
            return Err(Error::syntax(self.at(), "expected ')'"));
        }
        Ok(if neg { -n } else { n })
    }

    fn factor(&mut self) -> Result<DomainElement> {
        let at = self.at();
        if self.eat('-') {
            return Ok(self.factor()?.neg());
        }
        let (base, invertible_monomial) = match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                let c = if self.eat('/') {
                    let at = self.at();
                    match self.peek() {
                        Some(Tok::Num(d)) if *d != 0 => {
                            let d = *d;
                            self.pos += 1;
                            Coefficient::from_ratio(n, d)
                        }
                        _ => return Err(Error::syntax(at, "expected a nonzero denominator")),
                    }
                } else {
                    Coefficient::from_int(n)
                };
                (DomainElement::scalar(c), false)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "z" => (DomainElement::z(), true),
                    "D" => (DomainElement::nabla(), false),
                    _ => return Err(Error::syntax(at, format!("unknown identifier '{}'", name))),
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::syntax(self.at(), "expected ')'"));
                }
                (e, false)
            }
            _ => return Err(Error::syntax(at, "expected a term")),
        };
        if self.eat('^') {
            let at = self.at();
            let e = self.int_exponent()?;
            if e < 0 {
                if !invertible_monomial {
                    return Err(Error::syntax(at, "negative powers are allowed on z only"));
                }
                return Ok(DomainElement::term(Coefficient::one(), e, 0));
            }
            return Ok(base.pow(e as u32));
        }
        Ok(base)
    }
}

/// Parses a domain expression over `z`, `D`, integers, `p/q`, `+ - * ^`
/// and parentheses. Negative powers are allowed on `z`.
pub fn parse_domain(text: &str) -> Result<DomainElement> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::syntax(p.at(), "unexpected trailing input"));
    }
    Ok(e)
}
