//! Truncated linear functionals on the polynomial ring, their Hankel
//! matrices (symbolic and numeric), positive-definite degree extension,
//! convex perturbation towards box moments, and the degree-6 bivariate
//! counterexample where pseudo-moment products escape every measure.

use crate::algebra::{
    exponent_vectors_upto, AlgebraError, MomentMonomial, MomentPolynomial, Rat,
};
use crate::linalg::{exact_psd_check, LinalgError, PsdStatus};
use crate::measures::FiniteMeasure;
use num::{BigInt, One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::str::FromStr;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum PseudoMomentError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("no value stored for exponent vector {0:?}")]
    MissingValue(Vec<u32>),
    #[error("exponent vector {0:?} exceeds the degree bound {1}")]
    DegreeTooLarge(Vec<u32>, u32),
    #[error("exponent vector has length {0}, expected {1}")]
    BadExponentLength(usize, usize),
    #[error("the polynomial must be pure (no free x variables)")]
    NotPure,
    #[error("the degree bound must be even, got {0}")]
    OddDegreeBound(u32),
    #[error("the functional must be normalized with value 1 at the constant, got {0}")]
    NotNormalized(String),
    #[error("the Hankel matrix is not positive definite, so no positive definite extension exists")]
    NotExtendable,
    #[error("perturbation weight {0} is outside [0,1]")]
    BadPerturbation(String),
    #[error("cannot parse rational '{0}'")]
    BadRational(String),
}

/// A linear functional on polynomials of degree ≤ max_degree, stored as
/// its values on the monomial basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedFunctional {
    n: usize,
    max_degree: u32,
    values: BTreeMap<Vec<u32>, Rat>,
}

impl TruncatedFunctional {
    /// Builds a functional from explicit monomial values. Every exponent
    /// vector of degree ≤ max_degree must be present, and the value at
    /// the constant must be 1.
    pub fn new(
        n: usize,
        max_degree: u32,
        values: BTreeMap<Vec<u32>, Rat>,
    ) -> Result<Self, PseudoMomentError> {
        for w in values.keys() {
            if w.len() != n {
                return Err(PseudoMomentError::BadExponentLength(w.len(), n));
            }
            let d: u32 = w.iter().sum();
            if d > max_degree {
                return Err(PseudoMomentError::DegreeTooLarge(w.clone(), max_degree));
            }
        }
        for w in exponent_vectors_upto(n, max_degree) {
            if !values.contains_key(&w) {
                return Err(PseudoMomentError::MissingValue(w));
            }
        }
        let one = values.get(&vec![0u32; n]).expect("checked above");
        if !one.is_one() {
            return Err(PseudoMomentError::NotNormalized(one.to_string()));
        }
        Ok(TruncatedFunctional {
            n,
            max_degree,
            values,
        })
    }

    /// The truncated moment functional of a finitely supported measure.
    pub fn from_measure(mu: &FiniteMeasure, max_degree: u32) -> Self {
        let n = mu.n();
        let values = exponent_vectors_upto(n, max_degree)
            .into_iter()
            .map(|w| {
                let v = mu.moment(&w);
                (w, v)
            })
            .collect();
        TruncatedFunctional {
            n,
            max_degree,
            values,
        }
    }

    /// The moment functional of the uniform measure on the box [0,1]ⁿ:
    /// x^w ↦ ∏ 1/(w_j + 1).
    pub fn box_moments(n: usize, max_degree: u32) -> Self {
        let values = exponent_vectors_upto(n, max_degree)
            .into_iter()
            .map(|w| {
                let mut v = Rat::one();
                for &e in &w {
                    v /= Rat::from_integer(BigInt::from(e + 1));
                }
                (w, v)
            })
            .collect();
        TruncatedFunctional {
            n,
            max_degree,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// The value on the monomial x^w.
    pub fn value(&self, w: &[u32]) -> Result<Rat, PseudoMomentError> {
        if w.len() != self.n {
            return Err(PseudoMomentError::BadExponentLength(w.len(), self.n));
        }
        self.values
            .get(w)
            .cloned()
            .ok_or_else(|| PseudoMomentError::DegreeTooLarge(w.to_vec(), self.max_degree))
    }

    /// Linear evaluation on an x-only polynomial.
    pub fn apply(&self, f: &MomentPolynomial) -> Result<Rat, PseudoMomentError> {
        if !f.is_x_only() {
            return Err(PseudoMomentError::NotPure);
        }
        let mut s = Rat::zero();
        for (m, c) in f.terms() {
            s += c * &self.value(m.x_exponents())?;
        }
        Ok(s)
    }

    /// Multiplicative pseudo-moment evaluation of a pure polynomial: each
    /// symbol m[w] becomes the stored value and products multiply.
    pub fn pseudo_value(&self, f: &MomentPolynomial) -> Result<Rat, PseudoMomentError> {
        if !f.is_pure() {
            return Err(PseudoMomentError::NotPure);
        }
        let mut s = Rat::zero();
        for (m, c) in f.terms() {
            let mut p = c.clone();
            for (sym, mult) in m.symbols() {
                let v = self.value(sym.exponents())?;
                for _ in 0..*mult {
                    p *= &v;
                }
            }
            s += p;
        }
        Ok(s)
    }
}

/// A Hankel matrix with formal moment entries: rows and columns are the
/// x-monomials of degree ≤ d and the (u,v) entry is m(u·v).
#[derive(Clone, Debug)]
pub struct SymbolicHankel {
    pub basis: Vec<MomentMonomial>,
    pub entries: Vec<Vec<MomentPolynomial>>,
}

/// Builds the symbolic Hankel matrix of order d over n variables.
pub fn symbolic_hankel(n: usize, d: u32) -> Result<SymbolicHankel, AlgebraError> {
    let basis: Vec<MomentMonomial> = exponent_vectors_upto(n, d)
        .into_iter()
        .map(MomentMonomial::from_x)
        .collect::<Vec<_>>();
    let mut basis = basis;
    basis.sort();
    let k = basis.len();
    let mut entries = vec![Vec::with_capacity(k); k];
    for i in 0..k {
        for j in 0..k {
            let prod = MomentPolynomial::from_monomial(basis[i].mul(&basis[j])?, Rat::one());
            entries[i].push(prod.formal_moment());
        }
    }
    Ok(SymbolicHankel { basis, entries })
}

/// The numeric Hankel matrix of order d under a functional: the (u,v)
/// entry is L(x^{u+v}). Requires 2d ≤ the functional's degree bound.
pub fn hankel_apply(
    l: &TruncatedFunctional,
    d: u32,
) -> Result<(Vec<MomentMonomial>, Vec<Vec<Rat>>), PseudoMomentError> {
    let sym = symbolic_hankel(l.n(), d)?;
    let k = sym.basis.len();
    let mut out = vec![Vec::with_capacity(k); k];
    for i in 0..k {
        for j in 0..k {
            let mut e = Vec::with_capacity(l.n());
            for (a, b) in sym.basis[i]
                .x_exponents()
                .iter()
                .zip(sym.basis[j].x_exponents())
            {
                e.push(a + b);
            }
            out[i].push(l.value(&e)?);
        }
    }
    Ok((sym.basis, out))
}

/// Extends a functional with a positive definite Hankel matrix by one
/// Hankel order (two degrees). New odd-degree values and new top-degree
/// values with an odd exponent are zero; top-degree values with all-even
/// exponents are α·∏ 1/(w_j+1), and α is doubled from 1 until the
/// extended Hankel matrix is exactly positive definite.
pub fn extend_functional(
    l: &TruncatedFunctional,
) -> Result<TruncatedFunctional, PseudoMomentError> {
    if l.max_degree % 2 != 0 {
        return Err(PseudoMomentError::OddDegreeBound(l.max_degree));
    }
    let d = l.max_degree / 2;
    let (_, h) = hankel_apply(l, d)?;
    match exact_psd_check(&h)? {
        PsdStatus::PositiveDefinite => {}
        _ => return Err(PseudoMomentError::NotExtendable),
    }
    let n = l.n;
    let mut alpha = Rat::one();
    loop {
        let mut values = l.values.clone();
        for w in exponent_vectors_upto(n, l.max_degree + 2) {
            let deg: u32 = w.iter().sum();
            if deg <= l.max_degree {
                continue;
            }
            let v = if deg == l.max_degree + 2 && w.iter().all(|&e| e % 2 == 0) {
                let mut v = alpha.clone();
                for &e in &w {
                    v /= Rat::from_integer(BigInt::from(e + 1));
                }
                v
            } else {
                Rat::zero()
            };
            values.insert(w, v);
        }
        let candidate = TruncatedFunctional {
            n,
            max_degree: l.max_degree + 2,
            values,
        };
        let (_, h) = hankel_apply(&candidate, d + 1)?;
        if matches!(exact_psd_check(&h)?, PsdStatus::PositiveDefinite) {
            return Ok(candidate);
        }
        alpha *= Rat::from_integer(BigInt::from(2));
    }
}

/// The convex combination (1−δ)L + δL₀ with L₀ the uniform box moments
/// on [0,1]ⁿ; δ must lie in [0,1].
pub fn perturb_functional(
    l: &TruncatedFunctional,
    delta: &Rat,
) -> Result<TruncatedFunctional, PseudoMomentError> {
    if delta < &Rat::zero() || delta > &Rat::one() {
        return Err(PseudoMomentError::BadPerturbation(delta.to_string()));
    }
    let l0 = TruncatedFunctional::box_moments(l.n, l.max_degree);
    let values = l
        .values
        .iter()
        .map(|(w, v)| {
            let base = l0.values.get(w).expect("same support");
            (
                w.clone(),
                v * (Rat::one() - delta) + base * delta,
            )
        })
        .collect();
    Ok(TruncatedFunctional {
        n: l.n,
        max_degree: l.max_degree,
        values,
    })
}

/// The counterexample report: a functional with a PSD Hankel matrix of
/// order 3 whose pseudo-moment value on m[4,2]m[2,4] − m[2,2]³ is
/// negative, so no moment functional of a measure can agree with it.
#[derive(Clone, Debug)]
pub struct H17Report {
    pub basis: Vec<MomentMonomial>,
    pub hankel: Vec<Vec<Rat>>,
    pub hankel_status: PsdStatus,
    pub witness_polynomial: MomentPolynomial,
    pub pseudo_value: Rat,
}

/// Builds the report for the built-in degree-6 bivariate functional.
pub fn h17_counterexample_report() -> Result<H17Report, PseudoMomentError> {
    let l = crate::catalog::h17_functional();
    let (basis, hankel) = hankel_apply(&l, 3)?;
    let hankel_status = exact_psd_check(&hankel)?;
    let m42 = MomentPolynomial::symbol(vec![4, 2])?;
    let m24 = MomentPolynomial::symbol(vec![2, 4])?;
    let m22 = MomentPolynomial::symbol(vec![2, 2])?;
    let witness_polynomial = m42.try_mul(&m24)?.try_sub(&m22.pow(3))?;
    let pseudo_value = l.pseudo_value(&witness_polynomial)?;
    Ok(H17Report {
        basis,
        hankel,
        hankel_status,
        witness_polynomial,
        pseudo_value,
    })
}

/// JSON-facing form of a truncated functional.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionalFile {
    pub n: usize,
    pub max_degree: u32,
    pub values: Vec<FunctionalEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionalEntry {
    pub exponents: Vec<u32>,
    pub value: String,
}

impl FunctionalFile {
    pub fn from_functional(l: &TruncatedFunctional) -> Self {
        FunctionalFile {
            n: l.n,
            max_degree: l.max_degree,
            values: l
                .values
                .iter()
                .map(|(w, v)| FunctionalEntry {
                    exponents: w.clone(),
                    value: v.to_string(),
                })
                .collect(),
        }
    }

    pub fn to_functional(&self) -> Result<TruncatedFunctional, PseudoMomentError> {
        let mut values = BTreeMap::new();
        for e in &self.values {
            let v = Rat::from_str(&e.value)
                .map_err(|_| PseudoMomentError::BadRational(e.value.clone()))?;
            values.insert(e.exponents.clone(), v);
        }
        TruncatedFunctional::new(self.n, self.max_degree, values)
    }
}
