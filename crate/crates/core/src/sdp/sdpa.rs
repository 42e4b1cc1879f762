//! Sparse SDPA (`.dat-s`) export and solution import.
//!
//! The written problem is the moment side of the pair:
//! min cᵀx subject to Σ_k x_k F_k − F0 ⪰ 0. Free Gram-side scalars are
//! encoded as pairs of 1×1 blocks carrying the column with opposite
//! signs, so the external solver's dual recovers them as a difference.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use nalgebra::DMatrix;

use super::{rat_f64, recompute_residuals, SdpProblem, SdpSolution, SolveStatus};

#[derive(thiserror::Error, Debug)]
pub enum SdpaError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed solution file: {0}")]
    Malformed(String),
}

/// The block layout of the exported file: problem blocks followed by a
/// (+, −) pair of 1×1 blocks per free scalar. Diagonal (1×1) blocks get
/// negative sizes per the format.
pub fn export_block_sizes(p: &SdpProblem) -> Vec<i64> {
    let mut sizes: Vec<i64> = p
        .blocks
        .iter()
        .map(|b| {
            if b.dim == 1 {
                -1
            } else {
                b.dim as i64
            }
        })
        .collect();
    for _ in &p.scalar_vars {
        sizes.push(-1);
        sizes.push(-1);
    }
    sizes
}

fn fmt_val(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders the problem in sparse SDPA format.
pub fn render_sdpa(p: &SdpProblem) -> String {
    let sizes = export_block_sizes(p);
    let m = p.rows.len();
    let mut out = String::new();
    let _ = writeln!(out, "{m}");
    let _ = writeln!(out, "{}", sizes.len());
    let size_line: Vec<String> = sizes.iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "{}", size_line.join(" "));
    let c_line: Vec<String> = p.rows.iter().map(|r| fmt_val(rat_f64(&r.rhs))).collect();
    let _ = writeln!(out, "{}", c_line.join(" "));
    let nb = p.blocks.len();
    // Constant matrix F0.
    for (b, mat) in p.f0.iter().enumerate() {
        for (i, j, v) in mat {
            let _ = writeln!(out, "0 {} {} {} {}", b + 1, i + 1, j + 1, fmt_val(rat_f64(v)));
        }
    }
    for (fi, g) in p.free_obj.iter().enumerate() {
        let gv = rat_f64(g);
        if gv != 0.0 {
            let _ = writeln!(out, "0 {} 1 1 {}", nb + 2 * fi + 1, fmt_val(gv));
            let _ = writeln!(out, "0 {} 1 1 {}", nb + 2 * fi + 2, fmt_val(-gv));
        }
    }
    // Constraint matrices F_k.
    for (k, row) in p.rows.iter().enumerate() {
        for (b, mat) in row.mats.iter().enumerate() {
            for (i, j, v) in mat {
                let _ = writeln!(
                    out,
                    "{} {} {} {} {}",
                    k + 1,
                    b + 1,
                    i + 1,
                    j + 1,
                    fmt_val(rat_f64(v))
                );
            }
        }
        for (fi, h) in row.free.iter().enumerate() {
            let hv = rat_f64(h);
            if hv != 0.0 {
                let _ = writeln!(out, "{} {} 1 1 {}", k + 1, nb + 2 * fi + 1, fmt_val(hv));
                let _ = writeln!(out, "{} {} 1 1 {}", k + 1, nb + 2 * fi + 2, fmt_val(-hv));
            }
        }
    }
    out
}

/// Writes the problem to a `.dat-s` file.
pub fn write_sdpa(p: &SdpProblem, path: &Path) -> Result<(), SdpaError> {
    fs::write(path, render_sdpa(p))?;
    Ok(())
}

/// A parsed sparse SDPA problem file, used for round-trip checks.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedSdpa {
    pub m: usize,
    pub block_sizes: Vec<i64>,
    pub c: Vec<f64>,
    /// (matno, blkno, i, j, value), all 1-based as in the file.
    pub entries: Vec<(usize, usize, usize, usize, f64)>,
}

/// Parses a sparse SDPA problem file.
pub fn parse_sdpa(text: &str) -> Result<ParsedSdpa, SdpaError> {
    let mut lines = text
        .lines()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty() && !l.starts_with('"') && !l.starts_with('*'));
    let m: usize = lines
        .next()
        .ok_or_else(|| SdpaError::Malformed("missing m".into()))?
        .split_whitespace()
        .next()
        .unwrap_or("")
        .parse()
        .map_err(|_| SdpaError::Malformed("bad m".into()))?;
    let nblocks: usize = lines
        .next()
        .ok_or_else(|| SdpaError::Malformed("missing block count".into()))?
        .split_whitespace()
        .next()
        .unwrap_or("")
        .parse()
        .map_err(|_| SdpaError::Malformed("bad block count".into()))?;
    let sizes_line = if nblocks == 0 {
        ""
    } else {
        lines
            .next()
            .ok_or_else(|| SdpaError::Malformed("missing block sizes".into()))?
    };
    let block_sizes: Vec<i64> = sizes_line
        .split(|c: char| c.is_whitespace() || c == ',' || c == '(' || c == ')' || c == '{' || c == '}')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| SdpaError::Malformed("bad block size".into())))
        .collect::<Result<_, _>>()?;
    if block_sizes.len() != nblocks {
        return Err(SdpaError::Malformed(format!(
            "expected {nblocks} block sizes, got {}",
            block_sizes.len()
        )));
    }
    let c_line = if m == 0 {
        ""
    } else {
        lines
            .next()
            .ok_or_else(|| SdpaError::Malformed("missing objective vector".into()))?
    };
    let c: Vec<f64> = c_line
        .split(|c: char| c.is_whitespace() || c == ',' || c == '{' || c == '}')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| SdpaError::Malformed("bad objective entry".into())))
        .collect::<Result<_, _>>()?;
    if c.len() != m {
        return Err(SdpaError::Malformed(format!(
            "expected {m} objective entries, got {}",
            c.len()
        )));
    }
    let mut entries = Vec::new();
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(SdpaError::Malformed(format!("bad entry line {line:?}")));
        }
        let parse_idx = |t: &str| -> Result<usize, SdpaError> {
            t.parse().map_err(|_| SdpaError::Malformed(format!("bad index {t:?}")))
        };
        entries.push((
            parse_idx(toks[0])?,
            parse_idx(toks[1])?,
            parse_idx(toks[2])?,
            parse_idx(toks[3])?,
            toks[4]
                .parse()
                .map_err(|_| SdpaError::Malformed(format!("bad value {:?}", toks[4])))?,
        ));
    }
    Ok(ParsedSdpa {
        m,
        block_sizes,
        c,
        entries,
    })
}

/// The parsed form the writer would produce, for round-trip comparison.
pub fn to_parsed(p: &SdpProblem) -> ParsedSdpa {
    parse_sdpa(&render_sdpa(p)).expect("writer output parses")
}

fn number_tokens(text: &str) -> Vec<f64> {
    text.split(|c: char| !(c.is_ascii_digit() || "+-.eE".contains(c)))
        .filter(|t| !t.is_empty() && t.chars().any(|c| c.is_ascii_digit()))
        .filter_map(|t| t.parse().ok())
        .collect()
}

/// Reads an SDPA solver output file (the layout with objective values,
/// `xVec`, `xMat`, `yMat` sections) and maps it back onto the problem,
/// recomputing all residuals against the exact data.
pub fn read_sdpa_solution(p: &SdpProblem, text: &str, tol: f64) -> Result<SdpSolution, SdpaError> {
    let find = |key: &str| -> Option<usize> { text.find(key) };
    let section = |start_key: &str, end_keys: &[&str]| -> Option<&str> {
        let s = find(start_key)? + start_key.len();
        let mut e = text.len();
        for k in end_keys {
            if let Some(pos) = text[s..].find(k) {
                e = e.min(s + pos);
            }
        }
        Some(&text[s..e])
    };

    let m = p.rows.len();
    let xvec_text = section("xVec", &["xMat", "yMat"])
        .ok_or_else(|| SdpaError::Malformed("missing xVec section".into()))?;
    let xvals = number_tokens(xvec_text);
    if xvals.len() < m {
        return Err(SdpaError::Malformed(format!(
            "xVec has {} values, expected {m}",
            xvals.len()
        )));
    }
    let ymat_text = section("yMat", &[])
        .ok_or_else(|| SdpaError::Malformed("missing yMat section".into()))?;
    let yvals = number_tokens(ymat_text);

    let sizes = export_block_sizes(p);
    let mut expected = 0usize;
    for s in &sizes {
        expected += if *s < 0 {
            (-s) as usize
        } else {
            (*s as usize) * (*s as usize)
        };
    }
    if yvals.len() < expected {
        return Err(SdpaError::Malformed(format!(
            "yMat has {} values, expected {expected}",
            yvals.len()
        )));
    }

    let mut y_blocks = Vec::new();
    let mut scalars = vec![0.0; p.scalar_vars.len()];
    let mut pos = 0usize;
    for (bi, s) in sizes.iter().enumerate() {
        let dim = s.unsigned_abs() as usize;
        let vals = if *s < 0 { dim } else { dim * dim };
        let slice = &yvals[pos..pos + vals];
        pos += vals;
        if bi < p.blocks.len() {
            let d = p.blocks[bi].dim;
            let mat = if *s < 0 {
                DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(slice))
            } else {
                DMatrix::from_row_slice(d, d, slice)
            };
            y_blocks.push(mat);
        } else {
            // Split free-scalar blocks: s = y⁺ − y⁻.
            let fi = (bi - p.blocks.len()) / 2;
            if (bi - p.blocks.len()) % 2 == 0 {
                scalars[fi] += slice[0];
            } else {
                scalars[fi] -= slice[0];
            }
        }
    }

    let x: Vec<f64> = xvals[..m].to_vec();
    let mut sol = SdpSolution {
        status: SolveStatus::Optimal,
        objective: 0.0,
        gram_objective: 0.0,
        moment_objective: 0.0,
        x,
        y_blocks,
        scalars,
        primal_residual: 0.0,
        dual_residual: 0.0,
        gap: 0.0,
        iterations: 0,
    };
    let rep = recompute_residuals(p, &sol);
    sol.gram_objective = rep.gram_objective;
    sol.moment_objective = rep.moment_objective;
    sol.primal_residual = rep.moment_psd.max(rep.free_equality);
    sol.dual_residual = rep.gram_equality.max(rep.gram_psd);
    sol.gap = rep.gap;
    let side = match p.report {
        super::ReportSide::Gram => rep.gram_objective,
        super::ReportSide::Moment => rep.moment_objective,
    };
    sol.objective = p.reported_bound(side);
    let worst = sol
        .primal_residual
        .max(sol.dual_residual)
        .max(rep.gap / (1.0 + rep.gram_objective.abs() + rep.moment_objective.abs()));
    sol.status = if worst <= tol {
        SolveStatus::Optimal
    } else {
        SolveStatus::NumericalFailure
    };
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Rat;
    use crate::sdp::{ReportSide, SdpBlockInfo, SdpRow};
    use num::{One, Zero};

    fn two_by_two() -> SdpProblem {
        SdpProblem {
            blocks: vec![SdpBlockInfo {
                label: "b".into(),
                dim: 2,
            }],
            scalar_vars: vec![],
            free_obj: vec![],
            f0: vec![vec![(0, 1, -Rat::one())]],
            rows: vec![SdpRow {
                label: "x".into(),
                mats: vec![vec![(0, 0, Rat::one()), (1, 1, Rat::one())]],
                free: vec![],
                rhs: Rat::from_integer(2.into()),
            }],
            report: ReportSide::Moment,
            obj_sign: Rat::new(1.into(), 2.into()),
            obj_shift: Rat::zero(),
        }
    }

    #[test]
    fn empty_problem_round_trips() {
        let p = SdpProblem {
            blocks: vec![],
            scalar_vars: vec![],
            free_obj: vec![],
            f0: vec![],
            rows: vec![],
            report: ReportSide::Moment,
            obj_sign: Rat::one(),
            obj_shift: Rat::zero(),
        };
        let text = render_sdpa(&p);
        let parsed = parse_sdpa(&text).unwrap();
        assert_eq!(parsed.m, 0);
        assert!(parsed.entries.is_empty());
        assert_eq!(parsed, to_parsed(&p));
    }

    #[test]
    fn two_by_two_round_trips() {
        let p = two_by_two();
        let text = render_sdpa(&p);
        let parsed = parse_sdpa(&text).unwrap();
        assert_eq!(parsed.m, 1);
        assert_eq!(parsed.block_sizes, vec![2]);
        assert_eq!(parsed.c, vec![2.0]);
        assert_eq!(parsed.entries.len(), 3);
        assert_eq!(parsed, to_parsed(&p));
    }

    #[test]
    fn solution_import_maps_back() {
        // Hand-written output for the 2×2 problem at its optimum x = 1,
        // Y = [[1, −1], [−1, 1]].
        let p = two_by_two();
        let out = "objValPrimal = 2.0\nobjValDual = 2.0\n\
                   xVec = {1.0}\n\
                   xMat = { {1.0, 1.0}, {1.0, 1.0} }\n\
                   yMat = { {1.0, -1.0}, {-1.0, 1.0} }\n";
        let sol = read_sdpa_solution(&p, out, 1e-6).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
        assert!((sol.moment_objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn perturbed_solution_detected() {
        let p = two_by_two();
        let out = "xVec = {1.0}\n\
                   yMat = { {1.001, -1.0}, {-1.0, 1.0} }\n";
        let sol = read_sdpa_solution(&p, out, 1e-6).unwrap();
        assert_eq!(sol.status, SolveStatus::NumericalFailure);
        assert!(sol.dual_residual > 5e-4);
    }
}
