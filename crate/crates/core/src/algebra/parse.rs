//! Recursive-descent parser for the polynomial text format.
//!
//! ```text
//! expr   := sign? term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' integer)?
//! atom   := integer ('/' integer)? | 'sqrt(' integer ')' | variable | '(' expr ')'
//! ```

use std::sync::Arc;

use num_bigint::BigInt;

use super::{AlgebraError, Coefficient, Monomial, Polynomial, Rat, Var, VarTable};

pub(super) fn parse_polynomial<C: Coefficient>(
    vars: Arc<VarTable>,
    text: &str,
) -> Result<Polynomial<C>, AlgebraError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        text,
        vars,
    };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    text: &'a str,
    vars: Arc<VarTable>,
}

impl<'a> Parser<'a> {
    fn error(&self, what: &str) -> AlgebraError {
        AlgebraError::Parse(format!("{what} at byte {} in `{}`", self.pos, self.text))
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), AlgebraError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", c as char)))
        }
    }

    fn expr<C: Coefficient>(&mut self) -> Result<Polynomial<C>, AlgebraError> {
        let negate = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let first = self.term()?;
        let mut acc = if negate { first.negated() } else { first };
        loop {
            if self.eat(b'+') {
                acc = acc.checked_add(&self.term()?)?;
            } else if self.eat(b'-') {
                acc = acc.checked_sub(&self.term()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term<C: Coefficient>(&mut self) -> Result<Polynomial<C>, AlgebraError> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = acc.checked_mul(&self.factor()?)?;
        }
        Ok(acc)
    }

    fn factor<C: Coefficient>(&mut self) -> Result<Polynomial<C>, AlgebraError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.integer()?;
            let e: u32 = e.try_into().map_err(|_| self.error("exponent too large"))?;
            return base.pow(e);
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt, AlgebraError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected integer"));
        }
        Ok(self.text[start..self.pos].parse().expect("ascii digits"))
    }

    fn atom<C: Coefficient>(&mut self) -> Result<Polynomial<C>, AlgebraError> {
        let vars = self.vars.clone();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                let value = if self.eat(b'/') {
                    let d = self.integer()?;
                    if d == BigInt::from(0) {
                        return Err(self.error("zero denominator"));
                    }
                    Rat::new(n, d)
                } else {
                    Rat::from_integer(n)
                };
                Ok(Polynomial::constant(vars, C::from_rat(value)))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = &self.text[start..self.pos];
                if name == "sqrt" {
                    self.expect(b'(')?;
                    let d = self.integer()?;
                    self.expect(b')')?;
                    let d: u64 = d.try_into().map_err(|_| self.error("radicand too large"))?;
                    return Ok(Polynomial::constant(vars, C::sqrt_of(d)?));
                }
                self.expect(b'[')?;
                while self.pos < self.src.len() && self.src[self.pos] != b']' {
                    self.pos += 1;
                }
                self.expect(b']')?;
                let var: Var = self.text[start..self.pos].parse()?;
                let idx = vars
                    .index_of(var)
                    .ok_or_else(|| self.error(&format!("variable {var} not in this ring")))?;
                Ok(Polynomial::monomial(vars, Monomial::var(idx), C::one()))
            }
            _ => Err(self.error("expected a number, variable or `(`")),
        }
    }
}
