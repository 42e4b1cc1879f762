//! Embedded dense primal-dual interior-point solver.
//!
//! Solves the pair stored in an [`SdpProblem`] with an infeasible-start
//! predictor-corrector method. The Newton direction uses the
//! X-linearized complementarity equation; its Schur complement
//! S_kj = Σ_b tr(F_kb X_b⁻¹ F_jb Y_b) is symmetric positive definite
//! for symmetric data and is factored by Cholesky with a small jitter
//! fallback. Free scalar variables enter through an augmented system
//! solved by block elimination. The iteration schedule is fixed and
//! deterministic: identical inputs give identical outputs.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num::Zero;
use rayon::prelude::*;

use super::{rat_f64, SdpProblem, SdpSolution, SolveStatus};

/// Largest total block dimension the dense method accepts.
pub const DEFAULT_DIM_CAP: usize = 500;

/// Fraction of the maximal feasible step actually taken.
const STEP_FRACTION: f64 = 0.95;

/// Objective magnitude treated as divergence to infinity.
const DIVERGENCE: f64 = 1e10;

struct Data {
    /// Retained row indices into the original problem.
    retained: Vec<usize>,
    /// Expanded (both-mirror) entries per retained row per block.
    rows: Vec<Vec<Vec<(usize, usize, f64)>>>,
    c: Vec<f64>,
    h: DMatrix<f64>,
    g: DVector<f64>,
    f0: Vec<DMatrix<f64>>,
    dims: Vec<usize>,
    m: usize,
    p: usize,
    n_total: usize,
}

fn expand(entries: &[(usize, usize, num::BigRational)]) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::with_capacity(entries.len() * 2);
    for (i, j, v) in entries {
        let x = rat_f64(v);
        out.push((*i, *j, x));
        if i != j {
            out.push((*j, *i, x));
        }
    }
    out
}

fn prepare(p: &SdpProblem) -> Result<Data, SolveStatus> {
    let dims: Vec<usize> = p.blocks.iter().map(|b| b.dim).collect();
    let mut retained = Vec::new();
    for (k, row) in p.rows.iter().enumerate() {
        let zero_left =
            row.mats.iter().all(|m| m.is_empty()) && row.free.iter().all(|c| c.is_zero());
        if zero_left {
            if !row.rhs.is_zero() {
                return Err(SolveStatus::Infeasible);
            }
        } else {
            retained.push(k);
        }
    }
    let m = retained.len();
    let np = p.scalar_vars.len();
    let mut rows = Vec::with_capacity(m);
    let mut c = Vec::with_capacity(m);
    let mut h = DMatrix::zeros(m, np);
    for (ri, &k) in retained.iter().enumerate() {
        let row = &p.rows[k];
        rows.push(row.mats.iter().map(|mat| expand(mat)).collect::<Vec<_>>());
        c.push(rat_f64(&row.rhs));
        for (fi, v) in row.free.iter().enumerate() {
            h[(ri, fi)] = rat_f64(v);
        }
    }
    let g = DVector::from_iterator(np, p.free_obj.iter().map(rat_f64));
    let f0: Vec<DMatrix<f64>> = (0..dims.len()).map(|b| p.f0_dense(b)).collect();
    Ok(Data {
        retained,
        rows,
        c,
        h,
        g,
        f0,
        n_total: dims.iter().sum(),
        dims,
        m,
        p: np,
    })
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// tr(F A) for an expanded sparse F and dense A.
fn tr_sparse(f: &[(usize, usize, f64)], a: &DMatrix<f64>) -> f64 {
    f.iter().map(|(i, j, v)| v * a[(*j, *i)]).sum()
}

fn chol_with_jitter(mat: &DMatrix<f64>) -> Option<(Cholesky<f64, nalgebra::Dyn>, f64)> {
    let d = mat.nrows();
    if let Some(ch) = mat.clone().cholesky() {
        return Some((ch, 0.0));
    }
    let scale = mat.diagonal().amax().max(1.0);
    let mut jitter = 1e-12 * scale;
    for _ in 0..8 {
        let mut a = mat.clone();
        for i in 0..d {
            a[(i, i)] += jitter;
        }
        if let Some(ch) = a.cholesky() {
            return Some((ch, jitter));
        }
        jitter *= 100.0;
    }
    None
}

/// Largest α with M + α·D ⪰ 0, given the Cholesky factor of M.
fn max_step(chol: &Cholesky<f64, nalgebra::Dyn>, d: &DMatrix<f64>) -> f64 {
    let l = chol.l();
    // B = L⁻¹ D L⁻ᵀ; α_max = −1/λ_min(B) when λ_min < 0.
    let mut b = d.clone();
    let _ = l.solve_lower_triangular_mut(&mut b);
    let mut bt = b.transpose();
    let _ = l.solve_lower_triangular_mut(&mut bt);
    let eig = SymmetricEigen::new(sym(&bt.transpose()));
    let lam_min = eig.eigenvalues.min();
    if lam_min >= -1e-14 {
        f64::INFINITY
    } else {
        -1.0 / lam_min
    }
}

/// Shrinks `alpha` until every block M + α·D stays inside the cone up to
/// a tiny diagonal slack, guarding against the eigenvalue-based step
/// bound being optimistic without freezing once a block turns
/// numerically singular at the optimum.
fn safeguard_step(mats: &[DMatrix<f64>], dirs: &[DMatrix<f64>], mut alpha: f64) -> f64 {
    let ok_at = |alpha: f64| {
        mats.iter().zip(dirs).all(|(m, d)| {
            let mut cand = sym(&(m + d * alpha));
            let slack = 1e-9 * cand.diagonal().amax().max(1.0);
            for i in 0..cand.nrows() {
                cand[(i, i)] += slack;
            }
            cand.cholesky().is_some()
        })
    };
    if !ok_at(0.0) {
        // The current iterate is already outside the slack; gating on it
        // would freeze the step at zero, so trust the eigenvalue bound.
        return alpha;
    }
    for _ in 0..40 {
        if ok_at(alpha) {
            return alpha;
        }
        alpha *= 0.8;
    }
    0.0
}

fn failure(p: &SdpProblem, status: SolveStatus, iterations: usize) -> SdpSolution {
    SdpSolution {
        status,
        objective: f64::NAN,
        gram_objective: f64::NAN,
        moment_objective: f64::NAN,
        x: vec![0.0; p.rows.len()],
        y_blocks: p.blocks.iter().map(|b| DMatrix::zeros(b.dim, b.dim)).collect(),
        scalars: vec![0.0; p.scalar_vars.len()],
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
        gap: f64::NAN,
        iterations,
    }
}

/// Solves the problem pair with tolerance `tol` (default 1e-8) and an
/// iteration cap.
pub fn solve_ipm(p: &SdpProblem, tol: f64, max_iter: usize) -> SdpSolution {
    let data = match prepare(p) {
        Ok(d) => d,
        Err(status) => return failure(p, status, 0),
    };
    if data.n_total > DEFAULT_DIM_CAP {
        return failure(p, SolveStatus::NumericalFailure, 0);
    }
    if data.m == 0 && data.p == 0 {
        let mut sol = failure(p, SolveStatus::Optimal, 0);
        sol.objective = p.reported_bound(0.0);
        sol.gram_objective = 0.0;
        sol.moment_objective = 0.0;
        sol.primal_residual = 0.0;
        sol.dual_residual = 0.0;
        sol.gap = 0.0;
        return sol;
    }

    let nb = data.dims.len();
    let n_total = data.n_total.max(1) as f64;
    let data_scale = data
        .c
        .iter()
        .map(|v| v.abs())
        .chain(data.f0.iter().map(|m| m.amax()))
        .chain(
            data.rows
                .iter()
                .flatten()
                .flatten()
                .map(|(_, _, v)| v.abs()),
        )
        .fold(1.0f64, f64::max);

    let xi = 10.0 * data_scale;
    let mut x = DVector::<f64>::zeros(data.m);
    let mut s = DVector::<f64>::zeros(data.p);
    let mut xb: Vec<DMatrix<f64>> = data.dims.iter().map(|&d| DMatrix::identity(d, d) * xi).collect();
    let mut yb: Vec<DMatrix<f64>> = data.dims.iter().map(|&d| DMatrix::identity(d, d) * xi).collect();

    let c_norm = data.c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let g_norm = data.g.amax();

    // Cholesky factor of the constraint Gram matrix ⟨F_k,F_j⟩ + h_kᵀh_j,
    // built lazily for the dual refinement step below.
    let mut gram_chol: Option<Option<Cholesky<f64, nalgebra::Dyn>>> = None;
    let mut best_worst = f64::INFINITY;
    let mut prev_dual_worst = f64::INFINITY;
    let mut best_frontier = f64::INFINITY;
    let mut stall = 0usize;
    #[allow(clippy::type_complexity)]
    let mut best: Option<(
        DVector<f64>,
        DVector<f64>,
        Vec<DMatrix<f64>>,
        Vec<DMatrix<f64>>,
        f64,
        f64,
        f64,
        f64,
        usize,
    )> = None;

    for iter in 0..max_iter {
        // Dual refinement: the constraints on (Y, s) are linear, so once
        // the iterate is nearly dual-feasible, project it back onto the
        // affine subspace. Forming dY through X⁻¹ leaves a noise floor in
        // the dual residual when complementarity runs ahead of
        // feasibility; this projection is well conditioned regardless.
        if data.m > 0 {
            let rres: Vec<f64> = (0..data.m)
                .map(|k| {
                    let mut v = data.c[k];
                    for b in 0..nb {
                        v -= tr_sparse(&data.rows[k][b], &yb[b]);
                    }
                    for fi in 0..data.p {
                        v -= data.h[(k, fi)] * s[fi];
                    }
                    v
                })
                .collect();
            let worst = rres.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let stagnant = worst > 0.25 * prev_dual_worst;
            prev_dual_worst = worst;
            if worst > 0.0 && worst < 1e-5 * (1.0 + c_norm) && stagnant {
                let gch = gram_chol.get_or_insert_with(|| {
                    let mut g = DMatrix::<f64>::zeros(data.m, data.m);
                    for k in 0..data.m {
                        for j in k..data.m {
                            let mut v = 0.0;
                            for b in 0..nb {
                                for (a1, b1, v1) in &data.rows[k][b] {
                                    for (a2, b2, v2) in &data.rows[j][b] {
                                        if b1 == a2 && b2 == a1 {
                                            v += v1 * v2;
                                        }
                                    }
                                }
                            }
                            for fi in 0..data.p {
                                v += data.h[(k, fi)] * data.h[(j, fi)];
                            }
                            g[(k, j)] = v;
                            g[(j, k)] = v;
                        }
                    }
                    chol_with_jitter(&g).map(|(ch, _)| ch)
                });
                if let Some(gch) = gch {
                    let lam = gch.solve(&DVector::from_row_slice(&rres));
                    for b in 0..nb {
                        for (k, row) in data.rows.iter().enumerate() {
                            for (i, j, v) in &row[b] {
                                yb[b][(*i, *j)] += v * lam[k];
                            }
                        }
                    }
                    for fi in 0..data.p {
                        for k in 0..data.m {
                            s[fi] += data.h[(k, fi)] * lam[k];
                        }
                    }
                }
            }
        }

        // Block factorizations and inverses.
        let mut xinv = Vec::with_capacity(nb);
        let mut xchol = Vec::with_capacity(nb);
        let mut ychol = Vec::with_capacity(nb);
        let mut ok = true;
        for b in 0..nb {
            match (chol_with_jitter(&xb[b]), chol_with_jitter(&yb[b])) {
                (Some((cx, _)), Some((cy, _))) => {
                    xinv.push(cx.inverse());
                    xchol.push(cx);
                    ychol.push(cy);
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            return failure(p, SolveStatus::NumericalFailure, iter);
        }

        let mu = (0..nb)
            .map(|b| (&xb[b] * &yb[b]).trace())
            .sum::<f64>()
            / n_total;

        // Residuals.
        let pres: Vec<DMatrix<f64>> = (0..nb)
            .map(|b| {
                let mut m = -data.f0[b].clone() - &xb[b];
                for (k, row) in data.rows.iter().enumerate() {
                    for (i, j, v) in &row[b] {
                        m[(*i, *j)] += v * x[k];
                    }
                }
                m
            })
            .collect();
        let dres: Vec<f64> = (0..data.m)
            .map(|k| {
                let mut v = data.c[k];
                for b in 0..nb {
                    v -= tr_sparse(&data.rows[k][b], &yb[b]);
                }
                for fi in 0..data.p {
                    v -= data.h[(k, fi)] * s[fi];
                }
                v
            })
            .collect();
        let eres = &data.g - data.h.transpose() * &x;

        let pobj: f64 = data.c.iter().zip(x.iter()).map(|(c, x)| c * x).sum();
        let mut dobj: f64 = data.g.dot(&s);
        for b in 0..nb {
            dobj += (&data.f0[b] * &yb[b]).trace();
        }

        let rel_p = pres
            .iter()
            .zip(&xb)
            .map(|(r, x)| r.amax() / (1.0 + x.amax()))
            .fold(0.0f64, f64::max);
        let rel_d = dres.iter().fold(0.0f64, |a, v| a.max(v.abs())) / (1.0 + c_norm);
        let rel_e = if data.p > 0 {
            eres.amax() / (1.0 + g_norm)
        } else {
            0.0
        };
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());

        if std::env::var_os("MOMPOLY_IPM_TRACE").is_some() {
            eprintln!(
                "iter {iter}: mu={mu:.3e} rel_p={rel_p:.3e} rel_d={rel_d:.3e} rel_e={rel_e:.3e} gap={rel_gap:.3e} pobj={pobj:.9} dobj={dobj:.9}"
            );
        }
        if rel_p <= tol && rel_d <= tol && rel_e <= tol && rel_gap <= tol {
            return finish(p, &data, SolveStatus::Optimal, x, s, xb, yb, pobj, dobj, rel_p, rel_d, iter);
        }
        if pobj < -DIVERGENCE || dobj > DIVERGENCE {
            return failure(p, SolveStatus::Infeasible, iter);
        }
        if !pobj.is_finite() || !dobj.is_finite() || !mu.is_finite() {
            return failure(p, SolveStatus::NumericalFailure, iter);
        }
        // Keep the best iterate seen: late steps can degrade the gap once
        // blocks become numerically singular. Stop when the worst
        // residual stops improving; the fallback after the loop reports
        // the snapshot honestly as MaxIter.
        let worst_rel = rel_p.max(rel_d).max(rel_e).max(rel_gap);
        if worst_rel < best_worst {
            best_worst = worst_rel;
            best = Some((
                x.clone(),
                s.clone(),
                xb.clone(),
                yb.clone(),
                pobj,
                dobj,
                rel_p,
                rel_d,
                iter,
            ));
        }
        if worst_rel < 0.99 * best_frontier {
            best_frontier = worst_rel;
            stall = 0;
        } else {
            stall += 1;
            if stall > 40 {
                break;
            }
        }

        // Schur complement S_kj = Σ_b tr(F_k X⁻¹ F_j Y).
        let mut schur = DMatrix::<f64>::zeros(data.m, data.m);
        let cols: Vec<Vec<f64>> = (0..data.m)
            .into_par_iter()
            .map(|k| {
                let mut row = vec![0.0; data.m];
                for j in k..data.m {
                    let mut v = 0.0;
                    for b in 0..nb {
                        let fk = &data.rows[k][b];
                        let fj = &data.rows[j][b];
                        if fk.is_empty() || fj.is_empty() {
                            continue;
                        }
                        let xi_ = &xinv[b];
                        let y = &yb[b];
                        for (a1, b1, v1) in fk {
                            for (a2, b2, v2) in fj {
                                v += v1 * v2 * xi_[(*b1, *a2)] * y[(*b2, *a1)];
                            }
                        }
                    }
                    row[j] = v;
                }
                row
            })
            .collect();
        for k in 0..data.m {
            for j in k..data.m {
                let v = cols[k][j];
                schur[(k, j)] = v;
                schur[(j, k)] = v;
            }
        }
        let schur_chol = match chol_with_jitter(&schur) {
            Some((ch, _)) => ch,
            None => return failure(p, SolveStatus::NumericalFailure, iter),
        };
        let schur_solve = |rhs: &DVector<f64>| -> DVector<f64> { schur_chol.solve(rhs) };

        // Shared pieces of the right-hand side: T_b = X⁻¹ P Y.
        let tmats: Vec<DMatrix<f64>> = (0..nb)
            .map(|b| &xinv[b] * &pres[b] * &yb[b])
            .collect();
        let base_rhs: Vec<f64> = (0..data.m)
            .map(|k| {
                let mut v = -data.c[k];
                for fi in 0..data.p {
                    v += data.h[(k, fi)] * s[fi];
                }
                for b in 0..nb {
                    v -= tr_sparse(&data.rows[k][b], &tmats[b]);
                }
                v
            })
            .collect();

        let solve_direction = |kmats: Option<&Vec<DMatrix<f64>>>| -> (DVector<f64>, DVector<f64>, Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) {
            // rhs_k = base + Σ_b tr(F_k X⁻¹ K)
            let mut rhs = DVector::from_row_slice(&base_rhs);
            let xk: Option<Vec<DMatrix<f64>>> =
                kmats.map(|ks| (0..nb).map(|b| &xinv[b] * &ks[b]).collect());
            if let Some(xk) = &xk {
                for k in 0..data.m {
                    for b in 0..nb {
                        rhs[k] += tr_sparse(&data.rows[k][b], &xk[b]);
                    }
                }
            }
            // Augmented solve for free scalars.
            let (dx, ds) = if data.p == 0 {
                (schur_solve(&rhs), DVector::zeros(0))
            } else {
                let sinv_rhs = schur_solve(&rhs);
                let mut u = data.h.clone();
                for mut col in u.column_iter_mut() {
                    let solved = schur_solve(&col.clone_owned());
                    col.copy_from(&solved);
                }
                let msmall = data.h.transpose() * &u;
                let rhs_s = &eres - data.h.transpose() * &sinv_rhs;
                let ds = msmall
                    .clone()
                    .lu()
                    .solve(&rhs_s)
                    .unwrap_or_else(|| DVector::zeros(data.p));
                let dx = schur_solve(&(&rhs + &data.h * &ds));
                (dx, ds)
            };
            // dX = Σ dx F + P; dY = X⁻¹(K − XY) − X⁻¹ dX Y, symmetrized.
            let dxm: Vec<DMatrix<f64>> = (0..nb)
                .map(|b| {
                    let mut m = pres[b].clone();
                    for (k, row) in data.rows.iter().enumerate() {
                        for (i, j, v) in &row[b] {
                            m[(*i, *j)] += v * dx[k];
                        }
                    }
                    m
                })
                .collect();
            let dym: Vec<DMatrix<f64>> = (0..nb)
                .map(|b| {
                    let mut m = -&yb[b] - &xinv[b] * &dxm[b] * &yb[b];
                    if let Some(xk) = &xk {
                        m += &xk[b];
                    }
                    sym(&m)
                })
                .collect();
            (dx, ds, dxm, dym)
        };

        // Predictor.
        let (_dx_a, _ds_a, dxm_a, dym_a) = solve_direction(None);
        let alpha_pa = (0..nb)
            .map(|b| max_step(&xchol[b], &dxm_a[b]))
            .fold(f64::INFINITY, f64::min)
            .min(1.0 / STEP_FRACTION)
            * STEP_FRACTION;
        let alpha_da = (0..nb)
            .map(|b| max_step(&ychol[b], &dym_a[b]))
            .fold(f64::INFINITY, f64::min)
            .min(1.0 / STEP_FRACTION)
            * STEP_FRACTION;
        let mu_aff = (0..nb)
            .map(|b| {
                ((&xb[b] + &dxm_a[b] * alpha_pa) * (&yb[b] + &dym_a[b] * alpha_da)).trace()
            })
            .sum::<f64>()
            .max(0.0)
            / n_total;
        let sigma = ((mu_aff / mu).powi(3)).clamp(1e-10, 1.0);

        // Corrector.
        let kmats: Vec<DMatrix<f64>> = (0..nb)
            .map(|b| {
                let d = data.dims[b];
                DMatrix::identity(d, d) * (sigma * mu) - &dxm_a[b] * &dym_a[b]
            })
            .collect();
        let (dx, ds, dxm, dym) = solve_direction(Some(&kmats));
        let alpha_p = safeguard_step(
            &xb,
            &dxm,
            (0..nb)
                .map(|b| max_step(&xchol[b], &dxm[b]))
                .fold(f64::INFINITY, f64::min)
                .min(1.0 / STEP_FRACTION)
                * STEP_FRACTION,
        );
        let alpha_d = safeguard_step(
            &yb,
            &dym,
            (0..nb)
                .map(|b| max_step(&ychol[b], &dym[b]))
                .fold(f64::INFINITY, f64::min)
                .min(1.0 / STEP_FRACTION)
                * STEP_FRACTION,
        );

        x += &dx * alpha_p;
        s += &ds * alpha_d;
        for b in 0..nb {
            xb[b] = sym(&(&xb[b] + &dxm[b] * alpha_p));
            yb[b] = sym(&(&yb[b] + &dym[b] * alpha_d));
        }
    }
    // Report the best iterate seen even without convergence.
    if let Some((bx, bs, bxb, byb, pobj, dobj, rel_p, rel_d, iter)) = best {
        return finish(
            p,
            &data,
            SolveStatus::MaxIter,
            bx,
            bs,
            bxb,
            byb,
            pobj,
            dobj,
            rel_p,
            rel_d,
            iter,
        );
    }
    let mut sol = failure(p, SolveStatus::MaxIter, max_iter);
    let pobj: f64 = data.c.iter().zip(x.iter()).map(|(c, x)| c * x).sum();
    let mut dobj: f64 = data.g.dot(&s);
    for b in 0..nb {
        dobj += (&data.f0[b] * &yb[b]).trace();
    }
    sol.moment_objective = pobj;
    sol.gram_objective = dobj;
    sol.objective = match p.report {
        super::ReportSide::Gram => p.reported_bound(dobj),
        super::ReportSide::Moment => p.reported_bound(pobj),
    };
    for (ri, &k) in data.retained.iter().enumerate() {
        sol.x[k] = x[ri];
    }
    sol.y_blocks = yb;
    sol.scalars = s.iter().copied().collect();
    sol
}

#[allow(clippy::too_many_arguments)]
fn finish(
    p: &SdpProblem,
    data: &Data,
    status: SolveStatus,
    x: DVector<f64>,
    s: DVector<f64>,
    _xb: Vec<DMatrix<f64>>,
    yb: Vec<DMatrix<f64>>,
    pobj: f64,
    dobj: f64,
    rel_p: f64,
    rel_d: f64,
    iterations: usize,
) -> SdpSolution {
    let mut full_x = vec![0.0; p.rows.len()];
    for (ri, &k) in data.retained.iter().enumerate() {
        full_x[k] = x[ri];
    }
    let side = match p.report {
        super::ReportSide::Gram => dobj,
        super::ReportSide::Moment => pobj,
    };
    SdpSolution {
        status,
        objective: p.reported_bound(side),
        gram_objective: dobj,
        moment_objective: pobj,
        x: full_x,
        y_blocks: yb,
        scalars: s.iter().copied().collect(),
        primal_residual: rel_p,
        dual_residual: rel_d,
        gap: (pobj - dobj).abs(),
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Rat;
    use crate::sdp::{recompute_residuals, ReportSide, SdpBlockInfo, SdpRow};
    use num::One;

    fn rat(p: i64, q: i64) -> Rat {
        Rat::new(p.into(), q.into())
    }

    /// min x s.t. [[x, 1], [1, x]] ⪰ 0, expected optimum 1.
    /// Moment side: variables x₁ = x with F₁ = I₂, F0 = −offdiag(1).
    fn two_by_two() -> SdpProblem {
        SdpProblem {
            blocks: vec![SdpBlockInfo {
                label: "b".into(),
                dim: 2,
            }],
            scalar_vars: vec![],
            free_obj: vec![],
            f0: vec![vec![(0, 1, rat(-1, 1))]],
            rows: vec![SdpRow {
                label: "x".into(),
                mats: vec![vec![(0, 0, Rat::one()), (1, 1, Rat::one())]],
                free: vec![],
                rhs: rat(2, 1),
            }],
            report: ReportSide::Moment,
            obj_sign: rat(1, 2),
            obj_shift: Rat::zero(),
        }
    }

    #[test]
    fn psd_boundary_two_by_two() {
        // X(x) = x·I − F0 = [[x, 1], [1, x]]; min 2x/2 = x subject to PSD.
        let p = two_by_two();
        let sol = solve_ipm(&p, 1e-8, 100);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-6, "objective {}", sol.objective);
        let rep = recompute_residuals(&p, &sol);
        assert!(rep.gram_equality < 1e-6);
        assert!(rep.moment_psd < 1e-6);
    }

    #[test]
    fn structurally_infeasible_row() {
        let mut p = two_by_two();
        p.rows.push(SdpRow {
            label: "bad".into(),
            mats: vec![vec![]],
            free: vec![],
            rhs: Rat::one(),
        });
        let sol = solve_ipm(&p, 1e-8, 50);
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }
}
