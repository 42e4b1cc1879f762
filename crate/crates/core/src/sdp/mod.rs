//! Assembled semidefinite programs and their solvers.
//!
//! An [`SdpProblem`] stores one primal-dual pair in exact rational data.
//! The Gram side is
//!
//! ```text
//! max Σ_b ⟨F0_b, Y_b⟩ + gᵀs   s.t.  Σ_b ⟨F_kb, Y_b⟩ + h_kᵀ s = rhs_k,  Y_b ⪰ 0,  s free,
//! ```
//!
//! with one equality row per reduced monomial; the moment side is its
//! conic dual
//!
//! ```text
//! min rhsᵀx   s.t.  Σ_k x_k F_kb − F0_b ⪰ 0 for every block b,  Hᵀx = g.
//! ```
//!
//! Membership programs read their bound off the Gram side (the Y blocks
//! are the Gram matrices), moment relaxations off the moment side (the
//! x vector is the pseudo-moment vector). The embedded interior-point
//! method in [`ipm`] solves both sides at once; [`sdpa`] exports the
//! problem in the sparse SDPA format for external solvers.

pub mod ipm;
pub mod sdpa;

use nalgebra::DMatrix;
use num::{ToPrimitive, Zero};

use crate::algebra::Rat;

/// Sparse symmetric matrix stored as upper-triangular entries (i ≤ j);
/// an entry (i, j, v) with i < j stands for both mirror positions.
pub type SparseSym = Vec<(usize, usize, Rat)>;

/// Dimension record for one positive semidefinite block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SdpBlockInfo {
    pub label: String,
    pub dim: usize,
}

/// One equality row, indexed by a canonical reduced monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SdpRow {
    /// Display form of the indexing monomial.
    pub label: String,
    /// Coefficient matrices, one per block, upper-triangular sparse.
    pub mats: Vec<SparseSym>,
    /// Coefficients of the free scalar variables.
    pub free: Vec<Rat>,
    /// Right-hand side (objective coefficient on the moment side).
    pub rhs: Rat,
}

/// Which side of the pair carries the bound the caller is after.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ReportSide {
    /// Report the Gram-side objective (membership bounds, ε minima).
    Gram,
    /// Report the moment-side objective (moment relaxation duals).
    Moment,
}

/// An assembled primal-dual SDP pair with exact rational data.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub blocks: Vec<SdpBlockInfo>,
    /// Names of the free scalar variables on the Gram side.
    pub scalar_vars: Vec<String>,
    /// Gram-side objective coefficients of the free scalars.
    pub free_obj: Vec<Rat>,
    /// Constant objective matrices per block (Gram side maximizes
    /// Σ ⟨F0, Y⟩ + gᵀs).
    pub f0: Vec<SparseSym>,
    pub rows: Vec<SdpRow>,
    /// Which side's optimum the reported bound comes from.
    pub report: ReportSide,
    /// Reported bound = obj_sign · side objective + obj_shift.
    pub obj_sign: Rat,
    pub obj_shift: Rat,
}

/// Structural size summary used in run reports.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SizeReport {
    /// Number of equality rows (distinct reduced monomials).
    pub rows: usize,
    /// Block dimensions, largest first.
    pub block_dims: Vec<usize>,
    /// Total scalar entries across all Gram blocks.
    pub gram_entries: usize,
    /// Number of free scalar variables.
    pub free_scalars: usize,
    /// Dimension of the affine Gram variety: entries − rows + scalars.
    pub affine_unknowns: i64,
}

/// Termination status of a solve.
#[derive(Copy, Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIter,
    NumericalFailure,
}

/// Floating-point solution of both sides of an [`SdpProblem`].
#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SolveStatus,
    /// The reported bound per `report`, `obj_sign`, `obj_shift`.
    pub objective: f64,
    /// Gram-side objective Σ ⟨F0, Y⟩ + gᵀs.
    pub gram_objective: f64,
    /// Moment-side objective rhsᵀx.
    pub moment_objective: f64,
    /// Moment-side variables, one per row.
    pub x: Vec<f64>,
    /// Gram-side block matrices.
    pub y_blocks: Vec<DMatrix<f64>>,
    /// Free scalar values.
    pub scalars: Vec<f64>,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
}

/// Residuals of a candidate solution recomputed against the exact
/// problem data, independent of any solver claims.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ResidualReport {
    /// Max violation of the Gram-side equality rows by (Y, s).
    pub gram_equality: f64,
    /// Max violation of the moment-side PSD constraints: most negative
    /// eigenvalue estimate of Σ x_k F_k − F0 across blocks (0 if PSD).
    pub moment_psd: f64,
    /// Most negative eigenvalue estimate across the Y blocks.
    pub gram_psd: f64,
    /// Max violation of the free-scalar equalities Hᵀx = g.
    pub free_equality: f64,
    /// |Gram objective − moment objective| (duality gap).
    pub gap: f64,
    /// Recomputed Gram-side objective.
    pub gram_objective: f64,
    /// Recomputed moment-side objective.
    pub moment_objective: f64,
}

pub(crate) fn rat_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back through a reduced approximation for huge numerators.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

impl SdpProblem {
    pub fn size_report(&self) -> SizeReport {
        let mut dims: Vec<usize> = self.blocks.iter().map(|b| b.dim).collect();
        dims.sort_unstable_by(|a, b| b.cmp(a));
        let entries: usize = dims.iter().map(|d| d * (d + 1) / 2).sum();
        SizeReport {
            rows: self.rows.len(),
            block_dims: dims,
            gram_entries: entries,
            free_scalars: self.scalar_vars.len(),
            affine_unknowns: entries as i64 - self.rows.len() as i64
                + self.scalar_vars.len() as i64,
        }
    }

    /// Drops rows that are identically zero with zero right-hand side.
    /// Returns false when a structurally infeasible row (all-zero left
    /// side, nonzero right-hand side) is present.
    pub fn drop_zero_rows(&mut self) -> bool {
        let mut feasible = true;
        self.rows.retain(|row| {
            let zero_left =
                row.mats.iter().all(|m| m.is_empty()) && row.free.iter().all(|c| c.is_zero());
            if zero_left && !row.rhs.is_zero() {
                feasible = false;
            }
            !(zero_left && row.rhs.is_zero())
        });
        feasible
    }

    /// Dense f64 copy of the constant matrix of one block.
    pub(crate) fn f0_dense(&self, b: usize) -> DMatrix<f64> {
        let d = self.blocks[b].dim;
        let mut m = DMatrix::zeros(d, d);
        for (i, j, v) in &self.f0[b] {
            let x = rat_f64(v);
            m[(*i, *j)] = x;
            m[(*j, *i)] = x;
        }
        m
    }

    /// Applies the reporting convention to a raw side objective.
    pub fn reported_bound(&self, side_objective: f64) -> f64 {
        rat_f64(&self.obj_sign) * side_objective + rat_f64(&self.obj_shift)
    }
}

/// Recomputes all residuals of a floating solution against the exact
/// problem data.
pub fn recompute_residuals(p: &SdpProblem, sol: &SdpSolution) -> ResidualReport {
    let nb = p.blocks.len();
    // Gram-side equality rows.
    let mut gram_eq = 0f64;
    for (k, row) in p.rows.iter().enumerate() {
        let mut lhs = 0f64;
        for (b, mat) in row.mats.iter().enumerate() {
            let y = &sol.y_blocks[b];
            for (i, j, v) in mat {
                let c = rat_f64(v);
                lhs += if i == j {
                    c * y[(*i, *j)]
                } else {
                    2.0 * c * y[(*i, *j)]
                };
            }
        }
        for (fidx, h) in row.free.iter().enumerate() {
            lhs += rat_f64(h) * sol.scalars[fidx];
        }
        let _ = k;
        gram_eq = gram_eq.max((lhs - rat_f64(&row.rhs)).abs());
    }
    // Moment-side PSD blocks and Gram-side PSD blocks.
    let mut moment_psd = 0f64;
    let mut gram_psd = 0f64;
    for b in 0..nb {
        let d = p.blocks[b].dim;
        let mut s = -p.f0_dense(b);
        for (k, row) in p.rows.iter().enumerate() {
            for (i, j, v) in &row.mats[b] {
                let c = rat_f64(v) * sol.x[k];
                s[(*i, *j)] += c;
                if i != j {
                    s[(*j, *i)] += c;
                }
            }
        }
        moment_psd = moment_psd.max(-min_eig_estimate(&s));
        gram_psd = gram_psd.max(-min_eig_estimate(&sol.y_blocks[b]));
        let _ = d;
    }
    // Free equalities Hᵀx = g.
    let mut free_eq = 0f64;
    for (fidx, g) in p.free_obj.iter().enumerate() {
        let mut lhs = 0f64;
        for (k, row) in p.rows.iter().enumerate() {
            lhs += rat_f64(&row.free[fidx]) * sol.x[k];
        }
        free_eq = free_eq.max((lhs - rat_f64(g)).abs());
    }
    // Objectives.
    let mut gram_obj = 0f64;
    for b in 0..nb {
        for (i, j, v) in &p.f0[b] {
            let c = rat_f64(v);
            gram_obj += if i == j {
                c * sol.y_blocks[b][(*i, *j)]
            } else {
                2.0 * c * sol.y_blocks[b][(*i, *j)]
            };
        }
    }
    for (fidx, g) in p.free_obj.iter().enumerate() {
        gram_obj += rat_f64(g) * sol.scalars[fidx];
    }
    let moment_obj: f64 = p
        .rows
        .iter()
        .zip(&sol.x)
        .map(|(row, x)| rat_f64(&row.rhs) * x)
        .sum();
    ResidualReport {
        gram_equality: gram_eq,
        moment_psd,
        gram_psd,
        free_equality: free_eq,
        gap: (gram_obj - moment_obj).abs(),
        gram_objective: gram_obj,
        moment_objective: moment_obj,
    }
}

/// Smallest-eigenvalue estimate of a symmetric matrix via LDLᵀ with
/// diagonal shifts: returns a value λ with λ ≤ λ_min ≤ λ + tol·scale.
pub(crate) fn min_eig_estimate(m: &DMatrix<f64>) -> f64 {
    let d = m.nrows();
    if d == 0 {
        return 0.0;
    }
    let scale = m.amax().max(1.0);
    // Bisection on the shift: M − λI positive definite ⇔ λ < λ_min.
    let mut lo = -scale * (d as f64);
    let mut hi = scale * (d as f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if chol_ok(m, -mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * scale {
            break;
        }
    }
    lo
}

fn chol_ok(m: &DMatrix<f64>, shift: f64) -> bool {
    let d = m.nrows();
    let mut a = m.clone();
    for i in 0..d {
        a[(i, i)] += shift;
    }
    a.cholesky().is_some()
}
