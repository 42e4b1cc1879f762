//! Exact rational linear algebra: pivoted LDLᵀ positive semidefiniteness
//! classification with certified witnesses, and dense Gaussian
//! elimination for small systems.

use crate::algebra::Rat;
use num::Zero;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix is not symmetric at entry ({0},{1})")]
    NotSymmetric(usize, usize),
    #[error("matrix is not square: row {0} has length {1}, expected {2}")]
    NotSquare(usize, usize, usize),
}

/// Outcome of the exact PSD classification.
///
/// `NotPsd` carries a rational vector w with wᵀGw < 0, checkable by the
/// caller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PsdStatus {
    PositiveDefinite,
    PositiveSemidefinite { rank: usize },
    NotPsd { witness: Vec<Rat> },
}

fn require_symmetric(g: &[Vec<Rat>]) -> Result<(), LinalgError> {
    let n = g.len();
    for (i, row) in g.iter().enumerate() {
        if row.len() != n {
            return Err(LinalgError::NotSquare(i, row.len(), n));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if g[i][j] != g[j][i] {
                return Err(LinalgError::NotSymmetric(i, j));
            }
        }
    }
    Ok(())
}

/// Recursive pivoted LDLᵀ: returns the positive pivots, or a local
/// witness vector with negative quadratic form.
fn ldlt_rec(mut m: Vec<Vec<Rat>>) -> Result<Vec<Rat>, Vec<Rat>> {
    let k = m.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    // choose the largest diagonal entry as pivot
    let mut p = 0;
    for i in 1..k {
        if m[i][i] > m[p][p] {
            p = i;
        }
    }
    if m[p][p] > Rat::zero() {
        // symmetric swap of rows/columns 0 and p
        m.swap(0, p);
        for row in m.iter_mut() {
            row.swap(0, p);
        }
        let d = m[0][0].clone();
        let col: Vec<Rat> = (1..k).map(|i| m[i][0].clone()).collect();
        let mut schur = vec![vec![Rat::zero(); k - 1]; k - 1];
        for i in 0..k - 1 {
            for j in 0..k - 1 {
                schur[i][j] = &m[i + 1][j + 1] - &(&col[i] * &col[j] / &d);
            }
        }
        match ldlt_rec(schur) {
            Ok(mut pivots) => {
                pivots.insert(0, d);
                Ok(pivots)
            }
            Err(w) => {
                // lift: v₀ = −(colᵀw)/d preserves the negative value
                let mut dot = Rat::zero();
                for (ci, wi) in col.iter().zip(&w) {
                    dot += ci * wi;
                }
                let mut v = Vec::with_capacity(k);
                v.push(-dot / d);
                v.extend(w);
                v.swap(0, p);
                Err(v)
            }
        }
    } else {
        // no positive diagonal entry remains
        for i in 0..k {
            if m[i][i] < Rat::zero() {
                let mut v = vec![Rat::zero(); k];
                v[i] = Rat::from_integer(1.into());
                return Err(v);
            }
        }
        // all diagonals zero: PSD only if the whole block vanishes
        for i in 0..k {
            for j in 0..k {
                if !m[i][j].is_zero() {
                    // vᵀMv = 2 t m_ij with t = −m_ij gives −2 m_ij²
                    let mut v = vec![Rat::zero(); k];
                    v[i] = -m[i][j].clone();
                    v[j] += Rat::from_integer(1.into());
                    return Err(v);
                }
            }
        }
        Ok(Vec::new())
    }
}

/// Classifies a symmetric rational matrix exactly.
///
/// PD iff the pivoted elimination produces a positive pivot at every
/// step; PSD with the given rank when elimination stops at an all-zero
/// remainder; otherwise a witness w with wᵀGw < 0 is returned.
pub fn exact_psd_check(g: &[Vec<Rat>]) -> Result<PsdStatus, LinalgError> {
    require_symmetric(g)?;
    let n = g.len();
    match ldlt_rec(g.to_vec()) {
        Ok(pivots) => {
            if pivots.len() == n {
                Ok(PsdStatus::PositiveDefinite)
            } else {
                Ok(PsdStatus::PositiveSemidefinite { rank: pivots.len() })
            }
        }
        Err(witness) => Ok(PsdStatus::NotPsd { witness }),
    }
}

/// The positive LDLᵀ pivots of a PSD matrix (`None` when not PSD). The
/// minimum pivot of a rank-deficient PSD matrix is taken to be 0.
pub fn ldlt_pivots(g: &[Vec<Rat>]) -> Result<Option<Vec<Rat>>, LinalgError> {
    require_symmetric(g)?;
    Ok(ldlt_rec(g.to_vec()).ok())
}

/// Evaluates the quadratic form wᵀGw exactly.
pub fn quadratic_form(g: &[Vec<Rat>], w: &[Rat]) -> Rat {
    let mut s = Rat::zero();
    for (i, row) in g.iter().enumerate() {
        for (j, gij) in row.iter().enumerate() {
            s += &w[i] * &w[j] * gij;
        }
    }
    s
}

/// Solves A·x = b by Gaussian elimination with partial pivoting.
/// Returns `None` when A is singular.
pub fn solve_linear(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let n = a.len();
    let mut m: Vec<Vec<Rat>> = a.to_vec();
    let mut rhs: Vec<Rat> = b.to_vec();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let d = m[col][col].clone();
        for r in (col + 1)..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &d;
            for c in col..n {
                let sub = &factor * &m[col][c];
                m[r][c] -= sub;
            }
            let sub = &factor * &rhs[col];
            rhs[r] -= sub;
        }
    }
    let mut x = vec![Rat::zero(); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row].clone();
        for c in (row + 1)..n {
            acc -= &m[row][c] * &x[c];
        }
        x[row] = acc / &m[row][row];
    }
    Some(x)
}
