//! Text grammar for moment polynomials.
//!
//! A polynomial is a signed sum of terms; a term is a product of factors
//! joined by `*`; a factor is a rational coefficient `p` or `p/q`, a
//! variable power `x3^2`, or a moment symbol power `m[1,0,2]^3`.
//! Whitespace is ignored. This grammar is the interchange format for
//! certificate and problem files.

use super::{AlgebraError, MomentMonomial, MomentPolynomial, MomentSymbol, Rat};
use num::{BigInt, One};
use std::str::FromStr;

impl MomentPolynomial {
    /// Parses a polynomial over `n` variables from the text grammar.
    pub fn parse(input: &str, n: usize) -> Result<Self, AlgebraError> {
        Parser {
            chars: input.chars().collect(),
            pos: 0,
            n,
        }
        .parse_polynomial()
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    n: usize,
}

impl Parser {
    fn err(&self, msg: &str) -> AlgebraError {
        AlgebraError::Parse(format!("{msg} at offset {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        self.skip_ws();
        let c = self.chars.get(self.pos).copied();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn parse_uint(&mut self) -> Result<BigInt, AlgebraError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected an integer"));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        BigInt::from_str(&s).map_err(|e| self.err(&format!("bad integer: {e}")))
    }

    fn parse_small_uint(&mut self) -> Result<u32, AlgebraError> {
        let v = self.parse_uint()?;
        u32::try_from(&v).map_err(|_| self.err("exponent too large"))
    }

    fn parse_exponent(&mut self) -> Result<u32, AlgebraError> {
        if self.peek() == Some('^') {
            self.bump();
            self.parse_small_uint()
        } else {
            Ok(1)
        }
    }

    /// factor := rational | 'x' INT ['^' INT] | 'm[' INT,… ']' ['^' INT]
    fn parse_factor(&mut self) -> Result<(MomentMonomial, Rat), AlgebraError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let numer = self.parse_uint()?;
                let denom = if self.peek() == Some('/') {
                    self.bump();
                    self.parse_uint()?
                } else {
                    BigInt::one()
                };
                if denom == BigInt::from(0) {
                    return Err(self.err("zero denominator"));
                }
                Ok((MomentMonomial::one(self.n), Rat::new(numer, denom)))
            }
            Some('x') => {
                self.bump();
                let idx = self.parse_small_uint()? as usize;
                if idx == 0 || idx > self.n {
                    return Err(AlgebraError::VariableIndex(idx, self.n));
                }
                let e = self.parse_exponent()?;
                let mut exps = vec![0; self.n];
                exps[idx - 1] = e;
                Ok((MomentMonomial::from_x(exps), Rat::one()))
            }
            Some('m') => {
                self.bump();
                if self.bump() != Some('[') {
                    return Err(self.err("expected '[' after m"));
                }
                let mut exps = Vec::new();
                loop {
                    exps.push(self.parse_small_uint()?);
                    match self.bump() {
                        Some(',') => continue,
                        Some(']') => break,
                        _ => return Err(self.err("expected ',' or ']' in moment symbol")),
                    }
                }
                if exps.len() != self.n {
                    return Err(AlgebraError::DimensionMismatch(exps.len(), self.n));
                }
                let e = self.parse_exponent()?;
                if exps.iter().all(|&v| v == 0) {
                    // m[0,…,0] is the constant 1
                    return Ok((MomentMonomial::one(self.n), Rat::one()));
                }
                let sym = MomentSymbol::new(exps)?;
                let mono = MomentMonomial::new(vec![0; self.n], vec![(sym, e)])?;
                Ok((mono, Rat::one()))
            }
            _ => Err(self.err("expected a coefficient, variable, or moment symbol")),
        }
    }

    /// term := factor ('*' factor)*
    fn parse_term(&mut self) -> Result<(MomentMonomial, Rat), AlgebraError> {
        let (mut mono, mut coeff) = self.parse_factor()?;
        while self.peek() == Some('*') {
            self.bump();
            let (m, c) = self.parse_factor()?;
            mono = mono.mul(&m)?;
            coeff *= c;
        }
        Ok((mono, coeff))
    }

    /// polynomial := ['+'|'-'] term (('+'|'-') term)*
    fn parse_polynomial(&mut self) -> Result<MomentPolynomial, AlgebraError> {
        if self.n == 0 {
            return Err(AlgebraError::ZeroVariables);
        }
        let mut out = MomentPolynomial::zero(self.n);
        let mut sign = Rat::one();
        match self.peek() {
            Some('-') => {
                self.bump();
                sign = -sign;
            }
            Some('+') => {
                self.bump();
            }
            _ => {}
        }
        loop {
            let (mono, coeff) = self.parse_term()?;
            out.add_term(mono, coeff * &sign);
            match self.peek() {
                Some('+') => {
                    self.bump();
                    sign = Rat::one();
                }
                Some('-') => {
                    self.bump();
                    sign = -Rat::one();
                }
                None => return Ok(out),
                Some(c) => return Err(self.err(&format!("unexpected character '{c}'"))),
            }
        }
    }
}
