//! Polynomial text forms: a recursive-descent parser and the canonical
//! graded-lex printer. `parse(format(f)) == f` for every polynomial.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' uint)?
//! atom   := uint ('/' uint)? | ident | '(' expr ')'
//! ```
//!
//! Multiplication is always explicit; juxtaposition is a syntax error.
//! Rational literals `p/q` are accepted so that printed coefficients
//! round-trip.

use crate::poly::{ContextRef, Monomial, Polynomial};
use crate::series::TruncatedSeries;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: expected {expected}, found {found}")]
    Syntax {
        pos: usize,
        expected: String,
        found: String,
    },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("exponent {value} at byte {pos} exceeds the degree cap {cap}")]
    ExponentOverflow { pos: usize, value: String, cap: u32 },
    #[error("division by zero in literal at byte {pos}")]
    ZeroDenominator { pos: usize },
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ctx: ContextRef,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, ctx: &ContextRef) -> Self {
        Parser {
            src: src.as_bytes(),
            pos: 0,
            ctx: ctx.clone(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn found_here(&self) -> String {
        match self.src.get(self.pos) {
            Some(&b) => format!("'{}'", b as char),
            None => "end of input".to_string(),
        }
    }

    fn syntax(&self, expected: &str) -> ParseError {
        ParseError::Syntax {
            pos: self.pos,
            expected: expected.to_string(),
            found: self.found_here(),
        }
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn uint(&mut self, what: &str) -> Result<(BigInt, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.syntax(what));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok((text.parse::<BigInt>().unwrap(), start))
    }

    fn exponent(&mut self) -> Result<u32, ParseError> {
        let (n, start) = self.uint("a nonnegative integer exponent")?;
        let cap = self.ctx.degree_cap();
        let as_u32: Option<u32> = {
            use num_traits::ToPrimitive;
            n.to_u32()
        };
        match as_u32 {
            Some(e) if e <= cap => Ok(e),
            _ => Err(ParseError::ExponentOverflow {
                pos: start,
                value: n.to_string(),
                cap,
            }),
        }
    }

    fn ident(&mut self) -> Result<(String, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len()
            || !(self.src[self.pos].is_ascii_alphabetic() || self.src[self.pos] == b'_')
        {
            return Err(self.syntax("an identifier"));
        }
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        Ok((
            std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .to_string(),
            start,
        ))
    }

    fn atom(&mut self) -> Result<Polynomial, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax("')'"));
                }
                Ok(e)
            }
            Some(b) if b.is_ascii_digit() => {
                let (num, _) = self.uint("an integer")?;
                if self.eat(b'/') {
                    let (den, dpos) = self.uint("a denominator")?;
                    if den.is_zero() {
                        return Err(ParseError::ZeroDenominator { pos: dpos });
                    }
                    Ok(Polynomial::constant(&self.ctx, BigRational::new(num, den)))
                } else {
                    Ok(Polynomial::constant(
                        &self.ctx,
                        BigRational::from_integer(num),
                    ))
                }
            }
            Some(b) if b.is_ascii_alphabetic() || b == b'_' => {
                let (name, pos) = self.ident()?;
                match self.ctx.index_of(&name) {
                    Some(i) => Ok(Polynomial::variable(&self.ctx, i)),
                    None => Err(ParseError::UnknownIdentifier { pos, name }),
                }
            }
            _ => Err(self.syntax("a number, a variable, or '('")),
        }
    }

    fn factor(&mut self) -> Result<Polynomial, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.exponent()?;
            base.pow(e).map_err(|_| ParseError::ExponentOverflow {
                pos: self.pos,
                value: e.to_string(),
                cap: self.ctx.degree_cap(),
            })
        } else {
            Ok(base)
        }
    }

    fn term(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            let f = self.factor()?;
            acc = acc
                .checked_mul(&f)
                .map_err(|_| ParseError::ExponentOverflow {
                    pos: self.pos,
                    value: "product".to_string(),
                    cap: self.ctx.degree_cap(),
                })?;
        }
        Ok(acc)
    }

    fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = if self.eat(b'-') {
            self.term()?.neg()
        } else {
            self.term()?
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.checked_add(&t).expect("same context");
                }
                Some(b'-') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.checked_sub(&t).expect("same context");
                }
                _ => break,
            }
        }
        Ok(acc)
    }
}

/// Parse a polynomial over the given context.
pub fn parse_polynomial(text: &str, ctx: &ContextRef) -> Result<Polynomial, ParseError> {
    let mut p = Parser::new(text, ctx);
    let poly = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.syntax("end of input, '+', '-', or '*'"));
    }
    Ok(poly)
}

fn write_rational(f: &mut fmt::Formatter<'_>, r: &BigRational) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

fn write_monomial_body(
    f: &mut fmt::Formatter<'_>,
    names: &[String],
    mono: &Monomial,
    lead_star: bool,
) -> fmt::Result {
    let mut first = !lead_star;
    for (i, &e) in mono.0.iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            write!(f, "*")?;
        }
        first = false;
        write!(f, "{}", names[i])?;
        if e > 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

impl fmt::Display for Polynomial {
    /// Canonical form: terms in descending graded-lex order, explicit `*`,
    /// coefficients as integers or `p/q`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let names = self.context().names();
        for (k, (mono, coeff)) in self.terms().collect::<Vec<_>>().into_iter().rev().enumerate()
        {
            let mag = coeff.abs();
            if k == 0 {
                if coeff.is_negative() {
                    write!(f, "-")?;
                }
            } else if coeff.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if mono.is_unit() {
                write_rational(f, &mag)?;
            } else if mag.is_one() {
                write_monomial_body(f, names, mono, false)?;
            } else {
                write_rational(f, &mag)?;
                write_monomial_body(f, names, mono, true)?;
            }
        }
        Ok(())
    }
}

/// Canonical text form of a polynomial.
pub fn format_polynomial(p: &Polynomial) -> String {
    p.to_string()
}

impl fmt::Display for TruncatedSeries {
    /// `a*s^j + ... + O(s^N)` in ascending powers; the parameter prints as `s`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (&e, c) in self.coefficients() {
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = c.abs();
            if e == 0 {
                write_rational(f, &mag)?;
            } else {
                if !mag.is_one() {
                    write_rational(f, &mag)?;
                    write!(f, "*")?;
                }
                write!(f, "s")?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        if !first {
            write!(f, " + ")?;
        }
        write!(f, "O(s^{})", self.order())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Context;
    use crate::qi;

    fn ctx() -> ContextRef {
        Context::new(vec!["x", "y", "z"], vec!["t"]).unwrap()
    }

    #[test]
    fn parses_briancon_speder_polynomial() {
        let c = ctx();
        let f = parse_polynomial("z^5 + t*y^6*z + y^7*x + x^15", &c).unwrap();
        assert_eq!(f.term_count(), 4);
        assert_eq!(f.to_string(), "x^15 + x*y^7 + y^6*z*t + z^5");
    }

    #[test]
    fn zero_and_constants() {
        let c = ctx();
        assert!(parse_polynomial("0", &c).unwrap().is_zero());
        assert_eq!(parse_polynomial("0", &c).unwrap().to_string(), "0");
        let f = parse_polynomial("x^2 - 2*x + 1", &c).unwrap();
        assert_eq!(f.to_string(), "x^2 - 2*x + 1");
        assert_eq!(f.eval_rational(&[qi(1), qi(0), qi(0), qi(0)]), qi(0));
    }

    #[test]
    fn rational_literals_round_trip() {
        let c = ctx();
        let f = parse_polynomial("3/2*x - 5/7", &c).unwrap();
        assert_eq!(f.to_string(), "3/2*x - 5/7");
        assert_eq!(parse_polynomial(&f.to_string(), &c).unwrap(), f);
    }

    #[test]
    fn reports_position_and_expectation() {
        let c = ctx();
        match parse_polynomial("x^2 + * y", &c) {
            Err(ParseError::Syntax { pos, expected, .. }) => {
                assert_eq!(pos, 6);
                assert!(expected.contains("number"), "{expected}");
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_identifier_and_juxtaposition() {
        let c = ctx();
        match parse_polynomial("x + w", &c) {
            Err(ParseError::UnknownIdentifier { name, .. }) => assert_eq!(name, "w"),
            other => panic!("expected unknown identifier, got {other:?}"),
        }
        assert!(parse_polynomial("2 x", &c).is_err());
    }

    #[test]
    fn rejects_oversized_exponent() {
        let c = Context::with_degree_cap(vec!["x"], vec![], 100).unwrap();
        match parse_polynomial("x^101", &c) {
            Err(ParseError::ExponentOverflow { value, cap, .. }) => {
                assert_eq!(value, "101");
                assert_eq!(cap, 100);
            }
            other => panic!("expected exponent overflow, got {other:?}"),
        }
    }

    #[test]
    fn parenthesised_powers() {
        let c = ctx();
        let f = parse_polynomial("(x + y)^2", &c).unwrap();
        assert_eq!(f, parse_polynomial("x^2 + 2*x*y + y^2", &c).unwrap());
    }

    #[test]
    fn gradient_component_round_trips() {
        let c = ctx();
        let f = parse_polynomial("y^7+15*x^14", &c).unwrap();
        let printed = f.to_string();
        assert_eq!(parse_polynomial(&printed, &c).unwrap(), f);
    }
}
