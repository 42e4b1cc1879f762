//! Moment polynomial algebra: monomials, polynomials, the formal moment
//! map, canonical ordering, and rule-based reduction.

mod basis;
mod parse;
mod rules;

pub use basis::{exponent_vectors_upto, monomial_basis, pure_monomial_basis, x_monomial_basis};
pub use rules::{MomentRule, MomentRuleFile, RuleSet, RuleSetFile, XRule, XRuleFile};

use num::{BigRational, One, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Exact rational scalar used throughout the symbolic layer.
pub type Rat = BigRational;

/// Errors raised by the symbolic algebra.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("dimension mismatch: {0} variables vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("the all-zero moment symbol is not representable; it equals the constant 1")]
    ZeroSymbol,
    #[error("the variable count must be at least 1")]
    ZeroVariables,
    #[error("variable index {0} out of range 1..={1}")]
    VariableIndex(usize, usize),
    #[error("rule reduction did not reach a fixpoint within {0} passes")]
    NonTerminatingRules(usize),
    #[error("invalid rule: {0}")]
    InvalidRule(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// A formal moment symbol m[i₁,…,iₙ] with a nonzero exponent vector.
///
/// The all-zero symbol is identified with the constant 1 and is never
/// materialized; constructors reject it.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MomentSymbol {
    exponents: Vec<u32>,
}

impl MomentSymbol {
    pub fn new(exponents: Vec<u32>) -> Result<Self, AlgebraError> {
        if exponents.is_empty() {
            return Err(AlgebraError::ZeroVariables);
        }
        if exponents.iter().all(|&e| e == 0) {
            return Err(AlgebraError::ZeroSymbol);
        }
        Ok(MomentSymbol { exponents })
    }

    pub fn n(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

impl Ord for MomentSymbol {
    /// Degree-lex with x₁ > … > xₙ: higher total degree is greater; ties
    /// break lexicographically on the exponent vector.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.exponents.cmp(&other.exponents))
    }
}

impl PartialOrd for MomentSymbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MomentSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m[")?;
        for (k, e) in self.exponents.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "]")
    }
}

/// A monomial of the moment polynomial ring: an x-exponent vector times a
/// multiset of moment symbols.
///
/// Symbols are stored as (symbol, multiplicity) pairs sorted in decreasing
/// symbol order with positive multiplicities.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MomentMonomial {
    x_exponents: Vec<u32>,
    symbols: Vec<(MomentSymbol, u32)>,
}

impl MomentMonomial {
    /// The unit monomial over n variables.
    pub fn one(n: usize) -> Self {
        MomentMonomial {
            x_exponents: vec![0; n],
            symbols: Vec::new(),
        }
    }

    /// The variable x_j (1-based index).
    pub fn var(n: usize, j: usize) -> Result<Self, AlgebraError> {
        if j == 0 || j > n {
            return Err(AlgebraError::VariableIndex(j, n));
        }
        let mut e = vec![0; n];
        e[j - 1] = 1;
        Ok(MomentMonomial {
            x_exponents: e,
            symbols: Vec::new(),
        })
    }

    /// A monomial with the given x-exponents and no symbols.
    pub fn from_x(x_exponents: Vec<u32>) -> Self {
        MomentMonomial {
            x_exponents,
            symbols: Vec::new(),
        }
    }

    /// The monomial consisting of one moment symbol.
    pub fn from_symbol(sym: MomentSymbol) -> Self {
        let n = sym.n();
        MomentMonomial {
            x_exponents: vec![0; n],
            symbols: vec![(sym, 1)],
        }
    }

    /// Builds a monomial from parts, canonicalizing the symbol multiset.
    pub fn new(x_exponents: Vec<u32>, symbols: Vec<(MomentSymbol, u32)>) -> Result<Self, AlgebraError> {
        let n = x_exponents.len();
        if n == 0 {
            return Err(AlgebraError::ZeroVariables);
        }
        let mut map: BTreeMap<MomentSymbol, u32> = BTreeMap::new();
        for (s, m) in symbols {
            if s.n() != n {
                return Err(AlgebraError::DimensionMismatch(s.n(), n));
            }
            if m > 0 {
                *map.entry(s).or_insert(0) += m;
            }
        }
        let symbols: Vec<(MomentSymbol, u32)> = map.into_iter().rev().collect();
        Ok(MomentMonomial {
            x_exponents,
            symbols,
        })
    }

    pub fn n(&self) -> usize {
        self.x_exponents.len()
    }

    pub fn x_exponents(&self) -> &[u32] {
        &self.x_exponents
    }

    /// Symbols with multiplicities, largest symbol first.
    pub fn symbols(&self) -> &[(MomentSymbol, u32)] {
        &self.symbols
    }

    pub fn x_degree(&self) -> u32 {
        self.x_exponents.iter().sum()
    }

    pub fn degree(&self) -> u32 {
        self.x_degree()
            + self
                .symbols
                .iter()
                .map(|(s, m)| s.degree() * m)
                .sum::<u32>()
    }

    /// True when the monomial has no free x part.
    pub fn is_pure(&self) -> bool {
        self.x_exponents.iter().all(|&e| e == 0)
    }

    /// True when the monomial has no moment symbols.
    pub fn is_x_only(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.is_pure() && self.symbols.is_empty()
    }

    /// Commutative product of monomials.
    pub fn mul(&self, other: &MomentMonomial) -> Result<MomentMonomial, AlgebraError> {
        if self.n() != other.n() {
            return Err(AlgebraError::DimensionMismatch(self.n(), other.n()));
        }
        let x_exponents = self
            .x_exponents
            .iter()
            .zip(&other.x_exponents)
            .map(|(a, b)| a + b)
            .collect();
        let mut symbols = self.symbols.clone();
        symbols.extend(other.symbols.iter().cloned());
        MomentMonomial::new(x_exponents, symbols)
    }

    /// Exact division: the quotient monomial when `other` divides `self`.
    pub fn try_div(&self, other: &MomentMonomial) -> Option<MomentMonomial> {
        if self.n() != other.n() {
            return None;
        }
        let mut x_exponents = Vec::with_capacity(self.n());
        for (a, b) in self.x_exponents.iter().zip(&other.x_exponents) {
            x_exponents.push(a.checked_sub(*b)?);
        }
        let mut symbols = self.symbols.clone();
        for (s, m) in &other.symbols {
            let pos = symbols.iter().position(|(t, _)| t == s)?;
            if symbols[pos].1 < *m {
                return None;
            }
            symbols[pos].1 -= m;
        }
        symbols.retain(|(_, m)| *m > 0);
        Some(MomentMonomial {
            x_exponents,
            symbols,
        })
    }

    /// Iterates the symbols with repetition, largest first.
    fn symbol_seq(&self) -> impl Iterator<Item = &MomentSymbol> {
        self.symbols
            .iter()
            .flat_map(|(s, m)| std::iter::repeat(s).take(*m as usize))
    }

    /// Deglex comparison of the x parts (x₁ > … > xₙ).
    fn cmp_x(&self, other: &Self) -> Ordering {
        self.x_degree()
            .cmp(&other.x_degree())
            .then_with(|| self.x_exponents.cmp(&other.x_exponents))
    }
}

impl Ord for MomentMonomial {
    /// Canonical basis order: ascending total degree; within a degree,
    /// monomials with a deglex-larger x part come first, and for equal
    /// x parts the symbol multisets compare lexicographically (largest
    /// symbol first). Sorting ascending by this order lists a degree-lex
    /// basis such as [1, x₁, m₁, x₁², x₁m₁, m₁², m₂] for n=1, r=2.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.cmp_x(self))
            .then_with(|| self.symbol_seq().cmp(other.symbol_seq()))
    }
}

impl PartialOrd for MomentMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MomentMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut factors: Vec<String> = Vec::new();
        for (j, e) in self.x_exponents.iter().enumerate() {
            match e {
                0 => {}
                1 => factors.push(format!("x{}", j + 1)),
                _ => factors.push(format!("x{}^{}", j + 1, e)),
            }
        }
        for (s, m) in &self.symbols {
            if *m == 1 {
                factors.push(s.to_string());
            } else {
                factors.push(format!("{s}^{m}"));
            }
        }
        if factors.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", factors.join("*"))
        }
    }
}

/// Commutative product of two monomials over the same variable count.
pub fn mono_mul(a: &MomentMonomial, b: &MomentMonomial) -> Result<MomentMonomial, AlgebraError> {
    a.mul(b)
}

/// A moment polynomial: a finite map from canonical monomials to nonzero
/// rational coefficients. The empty map is the zero polynomial.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MomentPolynomial {
    n: usize,
    terms: BTreeMap<MomentMonomial, Rat>,
}

impl MomentPolynomial {
    pub fn zero(n: usize) -> Self {
        MomentPolynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, Rat::one())
    }

    pub fn constant(n: usize, c: Rat) -> Self {
        let mut p = Self::zero(n);
        if !c.is_zero() {
            p.terms.insert(MomentMonomial::one(n), c);
        }
        p
    }

    /// The variable x_j (1-based).
    pub fn var(n: usize, j: usize) -> Result<Self, AlgebraError> {
        Ok(Self::from_monomial(MomentMonomial::var(n, j)?, Rat::one()))
    }

    /// The pure polynomial consisting of the single symbol m[i₁,…,iₙ].
    pub fn symbol(exponents: Vec<u32>) -> Result<Self, AlgebraError> {
        let sym = MomentSymbol::new(exponents)?;
        Ok(Self::from_monomial(
            MomentMonomial::from_symbol(sym),
            Rat::one(),
        ))
    }

    pub fn from_monomial(mono: MomentMonomial, coeff: Rat) -> Self {
        let mut p = Self::zero(mono.n());
        if !coeff.is_zero() {
            p.terms.insert(mono, coeff);
        }
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Term iterator in ascending canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&MomentMonomial, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, mono: &MomentMonomial) -> Rat {
        self.terms.get(mono).cloned().unwrap_or_else(Rat::zero)
    }

    /// Adds `coeff * mono` in place, dropping the term if it cancels.
    pub fn add_term(&mut self, mono: MomentMonomial, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Total degree; `None` for the zero polynomial, whose degree is
    /// undefined.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    /// True when every monomial is free of x variables (the polynomial
    /// lies in the moment subring).
    pub fn is_pure(&self) -> bool {
        self.terms.keys().all(|m| m.is_pure())
    }

    /// True when no moment symbols occur.
    pub fn is_x_only(&self) -> bool {
        self.terms.keys().all(|m| m.is_x_only())
    }

    /// Coefficient 1-norm.
    pub fn coeff_l1(&self) -> Rat {
        let mut s = Rat::zero();
        for c in self.terms.values() {
            s += if c < &Rat::zero() { -c.clone() } else { c.clone() };
        }
        s
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        if self.n != other.n {
            return Err(AlgebraError::DimensionMismatch(self.n, other.n));
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.try_add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        MomentPolynomial {
            n: self.n,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        MomentPolynomial {
            n: self.n,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        if self.n != other.n {
            return Err(AlgebraError::DimensionMismatch(self.n, other.n));
        }
        let mut out = Self::zero(self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb)?, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one(self.n);
        for _ in 0..e {
            out = out.try_mul(self).expect("same dimension");
        }
        out
    }

    /// The formal moment map: unital and linear over the pure subring.
    /// Each monomial's pure factor passes through, and the x part
    /// x₁^{i₁}⋯xₙ^{iₙ} becomes the symbol m[i₁,…,iₙ] (or 1 when the x
    /// part is trivial). The result is pure.
    pub fn formal_moment(&self) -> Self {
        let mut out = Self::zero(self.n);
        for (m, c) in &self.terms {
            let mut symbols = m.symbols.clone();
            if !m.is_pure() {
                let sym = MomentSymbol::new(m.x_exponents.clone()).expect("nonzero x part");
                symbols.push((sym, 1));
            }
            let mono = MomentMonomial::new(vec![0; self.n], symbols).expect("valid parts");
            out.add_term(mono, c.clone());
        }
        out
    }

    /// Image under the power-substitution homomorphism sending the single
    /// variable x₁ to the monomial x^i and each symbol m[k] to m[k·i].
    /// Defined for univariate polynomials; the image lives over `i.len()`
    /// variables.
    pub fn power_substitution(&self, i: &[u32]) -> Result<Self, AlgebraError> {
        if self.n != 1 {
            return Err(AlgebraError::DimensionMismatch(self.n, 1));
        }
        if i.is_empty() {
            return Err(AlgebraError::ZeroVariables);
        }
        if i.iter().all(|&e| e == 0) {
            return Err(AlgebraError::ZeroSymbol);
        }
        let n = i.len();
        let mut out = Self::zero(n);
        for (m, c) in &self.terms {
            let a = m.x_exponents[0];
            let x_exponents: Vec<u32> = i.iter().map(|&e| e * a).collect();
            let mut symbols = Vec::new();
            for (s, mult) in &m.symbols {
                let k = s.exponents[0];
                let img = MomentSymbol::new(i.iter().map(|&e| e * k).collect())?;
                symbols.push((img, *mult));
            }
            out.add_term(MomentMonomial::new(x_exponents, symbols)?, c.clone());
        }
        Ok(out)
    }
}

/// Distributive product of two polynomials over the same variable count.
pub fn poly_mul(f: &MomentPolynomial, g: &MomentPolynomial) -> Result<MomentPolynomial, AlgebraError> {
    f.try_mul(g)
}

impl std::ops::Add for &MomentPolynomial {
    type Output = MomentPolynomial;
    fn add(self, rhs: &MomentPolynomial) -> MomentPolynomial {
        self.try_add(rhs).expect("dimension mismatch in +")
    }
}

impl std::ops::Sub for &MomentPolynomial {
    type Output = MomentPolynomial;
    fn sub(self, rhs: &MomentPolynomial) -> MomentPolynomial {
        self.try_sub(rhs).expect("dimension mismatch in -")
    }
}

impl std::ops::Mul for &MomentPolynomial {
    type Output = MomentPolynomial;
    fn mul(self, rhs: &MomentPolynomial) -> MomentPolynomial {
        self.try_mul(rhs).expect("dimension mismatch in *")
    }
}

impl std::ops::Neg for &MomentPolynomial {
    type Output = MomentPolynomial;
    fn neg(self) -> MomentPolynomial {
        MomentPolynomial::neg(self)
    }
}

impl fmt::Display for MomentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c < &Rat::zero();
            let abs = if neg { -c } else { c.clone() };
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{abs}*{m}")?;
            }
        }
        Ok(())
    }
}
