//! Text grammar for Puiseux series.
//!
//! Terms are built from literals (`3`, `3/2`, and in the complex field
//! `1.25`, `2i`, `(0.5-1.5i)`), one variable (`z`, `zx`, `zeta`, `theta`),
//! `^` with integer or `(p/q)` exponents, `* / + -`, parentheses, and
//! `O(var^e)` truncation markers. The output of `Display` for
//! `PuiseuxSeries` parses back to the same series.

use crate::error::{Error, Result};
use crate::field::{parse_literal, Coefficient, FieldConfig};
use crate::puiseux::{Exp, PuiseuxSeries, Var};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Literal(Coefficient),
    Ident(String),
    Op(char),
}

fn is_literal_text(s: &str) -> bool {
    s.chars().any(|c| c.is_ascii_digit() || c == 'i')
        && s.chars().all(|c| c.is_ascii_digit() || " .eE+-/i".contains(c))
}

fn tokenize(text: &str, cfg: &FieldConfig) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch == '(' {
            // A parenthesized complex literal such as `(1.5-2i)`.
            if let Some(len) = chars[i + 1..].iter().position(|&c| c == ')' || c == '(') {
                if chars[i + 1 + len] == ')' {
                    let inner: String = chars[i + 1..i + 1 + len].iter().collect();
                    if is_literal_text(&inner) && inner.contains(['.', 'i', 'e', 'E']) {
                        if let Ok(c) = parse_literal(&inner, cfg) {
                            out.push((i, Tok::Literal(c)));
                            i += len + 2;
                            continue;
                        }
                    }
                }
            }
            out.push((i, Tok::Op('(')));
            i += 1;
        } else if ch.is_ascii_digit() || (ch == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())) {
            let st = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            if i < chars.len() && chars[i] == 'i' && !chars.get(i + 1).is_some_and(|c| c.is_ascii_alphanumeric()) {
                i += 1;
            }
            out.push((st, Tok::Num(chars[st..i].iter().collect())));
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let st = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((st, Tok::Ident(chars[st..i].iter().collect())));
        } else if "+-*/^)".contains(ch) {
            out.push((i, Tok::Op(ch)));
            i += 1;
        } else {
            return Err(Error::syntax(i, format!("unexpected character '{}'", ch)));
        }
    }
    Ok(out)
}

/// Finds the single variable used in the text, if any.
fn detect_var(toks: &[(usize, Tok)]) -> Result<Option<Var>> {
    let mut var: Option<Var> = None;
    for (pos, t) in toks {
        if let Tok::Ident(name) = t {
            if name == "O" || name == "i" {
                continue;
            }
            let v = Var::from_name(name).ok_or_else(|| Error::syntax(*pos, format!("unknown identifier '{}'", name)))?;
            match var {
                Some(old) if old != v => {
                    return Err(Error::MixedVariables(old.name().into(), v.name().into()));
                }
                _ => var = Some(v),
            }
        }
    }
    Ok(var)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    var: Var,
    cfg: &'a FieldConfig,
}

impl Parser<'_> {
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

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::syntax(self.at(), format!("expected '{}'", c)))
        }
    }

    fn expr(&mut self) -> Result<PuiseuxSeries> {
        let mut acc = if self.eat('-') {
            -self.term()?
        } else {
            self.eat('+');
            self.term()?
        };
        loop {
            if self.eat('+') {
                acc = acc.checked_add(&self.term()?)?;
            } else if self.eat('-') {
                acc = acc.checked_sub(&self.term()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<PuiseuxSeries> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.checked_mul(&self.unary()?)?;
            } else if self.peek() == Some(&Tok::Op('/')) {
                let at = self.at();
                self.pos += 1;
                let d = self.unary()?;
                if !(d.is_exact() && d.is_monomial()) {
                    return Err(Error::syntax(at, "division is only by a nonzero constant or monomial"));
                }
                acc = acc.checked_mul(&d.invert()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<PuiseuxSeries> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn int(&mut self) -> Result<i64> {
        let at = self.at();
        match self.peek().cloned() {
            Some(Tok::Num(s)) => {
                self.pos += 1;
                s.parse().map_err(|_| Error::syntax(at, format!("expected an integer, got '{}'", s)))
            }
            _ => Err(Error::syntax(at, "expected an integer")),
        }
    }

    fn exponent(&mut self) -> Result<Exp> {
        if self.eat('(') {
            let neg = self.eat('-');
            let n = self.int()?;
            let at = self.at();
            let d = if self.eat('/') { self.int()? } else { 1 };
            if d == 0 {
                return Err(Error::syntax(at, "zero denominator in exponent"));
            }
            self.expect(')')?;
            Ok(Exp::new(if neg { -n } else { n }, d))
        } else {
            let neg = self.eat('-');
            let n = self.int()?;
            Ok(Exp::from_integer(if neg { -n } else { n }))
        }
    }

    fn power(&mut self) -> Result<PuiseuxSeries> {
        let at = self.at();
        let (base, is_var) = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let e = self.exponent()?;
        if is_var {
            return Ok(PuiseuxSeries::monomial_exp(self.var, Coefficient::one(), e));
        }
        if e.is_integer() {
            return base.pow_int(*e.numer());
        }
        if base.is_zero() {
            return Err(Error::syntax(at, "fractional power of zero"));
        }
        base.pow_rational(e, 0)
    }

    fn constant(&self, c: Coefficient) -> PuiseuxSeries {
        PuiseuxSeries::constant(self.var, c)
    }

    fn atom(&mut self) -> Result<(PuiseuxSeries, bool)> {
        let at = self.at();
        match self.peek().cloned() {
            Some(Tok::Num(s)) => {
                self.pos += 1;
                let c = parse_literal(&s, self.cfg).map_err(|e| match e {
                    Error::Syntax { msg, .. } => Error::syntax(at, msg),
                    e => e,
                })?;
                Ok((self.constant(self.cfg.embed(&c)), false))
            }
            Some(Tok::Literal(c)) => {
                self.pos += 1;
                Ok((self.constant(self.cfg.embed(&c)), false))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "i" => {
                        let c = parse_literal("i", self.cfg).map_err(|_| Error::syntax(at, "the imaginary unit needs the complex field"))?;
                        Ok((self.constant(c), false))
                    }
                    "O" => {
                        self.expect('(')?;
                        let inner = self.expr()?;
                        self.expect(')')?;
                        let e = match inner.leading() {
                            Some((k, c)) if inner.is_exact() && inner.is_monomial() && c.is_one() => Exp::new(k, inner.ram()),
                            _ => return Err(Error::syntax(at, "O(...) takes a monomial var^e")),
                        };
                        Ok((PuiseuxSeries::big_o(self.var, e), false))
                    }
                    _ => Ok((PuiseuxSeries::monomial(self.var, Coefficient::one(), 1, 1), true)),
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok((e, false))
            }
            _ => Err(Error::syntax(at, "expected a term")),
        }
    }
}

/// Parses a series; constants without a variable get `default_var`.
pub fn parse_series(text: &str, cfg: &FieldConfig, default_var: Var) -> Result<PuiseuxSeries> {
    let toks = tokenize(text, cfg)?;
    if toks.is_empty() {
        return Err(Error::syntax(0, "empty series"));
    }
    let var = detect_var(&toks)?.unwrap_or(default_var);
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.chars().count(),
        var,
        cfg,
    };
    let s = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::syntax(p.at(), "unexpected trailing input"));
    }
    Ok(s.normalize_ram())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(p: i64, q: i64) -> Coefficient {
        Coefficient::from_ratio(p, q)
    }

    #[test]
    fn examples() {
        let cfg = FieldConfig::exact();
        let s = parse_series("-z^(-2) + 3/2*z^(-1/2)", &cfg, Var::Z).unwrap();
        assert_eq!(s.ram(), 2);
        assert_eq!(s, PuiseuxSeries::new(Var::Z, 2, [(-4, c(-1, 1)), (-1, c(3, 2))], None));
        let t = parse_series("theta", &cfg, Var::Z).unwrap();
        assert_eq!(t, PuiseuxSeries::monomial(Var::Theta, c(1, 1), 1, 1));
        assert!(matches!(parse_series("z + w", &cfg, Var::Z), Err(Error::Syntax { .. })));
        assert!(matches!(parse_series("z + theta", &cfg, Var::Z), Err(Error::MixedVariables(..))));
        assert!(matches!(parse_series("1.5*z", &cfg, Var::Z), Err(Error::Syntax { pos: 0, .. })));
        assert!(matches!(parse_series("z +", &cfg, Var::Z), Err(Error::Syntax { pos: 3, .. })));
    }

    #[test]
    fn truncation_and_roundtrip() {
        let cfg = FieldConfig::exact();
        let s = parse_series("z^(-1) - 2*z^(1/3) + O(z^(2/3))", &cfg, Var::Z).unwrap();
        assert_eq!(s.ram(), 3);
        assert_eq!(s.trunc(), Some(2));
        assert_eq!(parse_series(&s.to_string(), &cfg, Var::Z).unwrap(), s);
        let o = parse_series("O(zeta^0)", &cfg, Var::Z).unwrap();
        assert_eq!(o.to_string(), "O(zeta^0)");
        let p = parse_series("(1 + z)^2 - 1/z", &cfg, Var::Z).unwrap();
        assert_eq!(p.to_string(), "-z^(-1) + 1 + 2*z + z^2");
    }

    #[test]
    fn approx_literals() {
        let cfg = FieldConfig::approx();
        let s = parse_series("(0.5-1.5i)*z^(-1) + 2i + 1.25", &cfg, Var::Z).unwrap();
        let back = parse_series(&s.to_string(), &cfg, Var::Z).unwrap();
        assert_eq!(back, s);
        assert!(parse_series("2i", &FieldConfig::exact(), Var::Z).is_err());
    }
}
