//! Built-in example problems: the covariance objective on the 6-variable
//! hypercube with its exact Gram certificate, the bilocal network bound
//! with its rule set and attaining probability space, and the degree-6
//! bivariate functional whose Hankel matrix is PSD while a pseudo-moment
//! product value goes negative.

use crate::algebra::{AlgebraError, MomentPolynomial, Rat, RuleSet};
use crate::certificates::{BlockTag, CertBlock, GramCertificate};
use crate::measures::{FiniteProbabilitySpace, MeasureError};
use crate::pseudo_moments::TruncatedFunctional;
use num::BigInt;
use std::collections::BTreeMap;

fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

fn x(n: usize, j: usize) -> MomentPolynomial {
    MomentPolynomial::var(n, j).expect("valid index")
}

/// The symbol m[e_j] over n variables.
fn m1(n: usize, j: usize) -> MomentPolynomial {
    let mut e = vec![0u32; n];
    e[j - 1] = 1;
    MomentPolynomial::symbol(e).expect("nonzero")
}

/// Covariance m(x_j x_k) − m(x_j) m(x_k).
fn cov(n: usize, j: usize, k: usize) -> MomentPolynomial {
    let prod = x(n, j).try_mul(&x(n, k)).expect("same n").formal_moment();
    prod.try_sub(&m1(n, j).try_mul(&m1(n, k)).expect("same n"))
        .expect("same n")
}

/// Rules for the covariance example: x_j² = 1 on all six variables.
pub fn cov3322_rules() -> RuleSet {
    RuleSet::hypercube(6)
}

/// The signed sum of eight covariances between the first three and the
/// last three hypercube variables.
pub fn cov3322_objective() -> MomentPolynomial {
    let n = 6;
    let mut f = MomentPolynomial::zero(n);
    for (j, k, sign) in [
        (1, 4, 1),
        (1, 5, 1),
        (1, 6, 1),
        (2, 4, 1),
        (2, 5, 1),
        (2, 6, -1),
        (3, 4, 1),
        (3, 5, -1),
    ] {
        let c = cov(n, j, k);
        f = if sign > 0 {
            f.try_add(&c).expect("same n")
        } else {
            f.try_sub(&c).expect("same n")
        };
    }
    f
}

/// The exact optimum of the covariance objective over the hypercube.
pub fn cov3322_bound() -> Rat {
    rat(9, 2)
}

/// Exact certificate of 9/2 − f as a single moment-of-square block with
/// an 8×8 positive definite Gram matrix, valid modulo x_j² = 1.
pub fn cov3322_certificate() -> (MomentPolynomial, GramCertificate) {
    let n = 6;
    let target = MomentPolynomial::constant(n, cov3322_bound())
        .try_sub(&cov3322_objective())
        .expect("same n");
    let g: Vec<Vec<Rat>> = [
        [(4, 3), (0, 1), (-1, 2), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)],
        [(0, 1), (1, 32), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)],
        [(-1, 2), (0, 1), (3, 8), (1, 16), (0, 1), (0, 1), (0, 1), (0, 1)],
        [(0, 1), (0, 1), (1, 16), (1, 8), (-1, 8), (0, 1), (3, 64), (3, 64)],
        [(0, 1), (0, 1), (0, 1), (-1, 8), (1, 4), (-1, 8), (-1, 16), (-1, 16)],
        [(0, 1), (0, 1), (0, 1), (0, 1), (-1, 8), (1, 4), (0, 1), (0, 1)],
        [(0, 1), (0, 1), (0, 1), (3, 64), (-1, 16), (0, 1), (3, 64), (0, 1)],
        [(0, 1), (0, 1), (0, 1), (3, 64), (-1, 16), (0, 1), (0, 1), (3, 64)],
    ]
    .iter()
    .map(|row| row.iter().map(|&(p, q)| rat(p, q)).collect())
    .collect();
    // The mean-sum m(x₁)+m(x₂). It vanishes at every optimal measure,
    // which forces the entries multiplying it to drop out at the optimum.
    let m12 = m1(n, 1).try_add(&m1(n, 2)).expect("same n");
    let two = MomentPolynomial::constant(n, rat(2, 1));
    let x45p = x(n, 4).try_add(&x(n, 5)).expect("same n");
    let x45m = x(n, 4).try_sub(&x(n, 5)).expect("same n");
    let x12p = x(n, 1).try_add(&x(n, 2)).expect("same n");
    let x6m1 = x(n, 6).try_mul(&m1(n, 1)).expect("same n");
    let v: Vec<MomentPolynomial> = vec![
        // x₆·m(x₁x₂)
        x(n, 6).try_mul(&m12).expect("same n"),
        // (x₁−x₂)(x₄+x₅)
        x(n, 1)
            .try_sub(&x(n, 2))
            .expect("same n")
            .try_mul(&x45p)
            .expect("same n"),
        // 1 + x₆(x₂−x₁+4m(x₁))
        MomentPolynomial::one(n)
            .try_add(
                &x(n, 6)
                    .try_mul(
                        &x(n, 2)
                            .try_sub(&x(n, 1))
                            .expect("same n")
                            .try_add(&m1(n, 1).scale(&rat(4, 1)))
                            .expect("same n"),
                    )
                    .expect("same n"),
            )
            .expect("same n"),
        // 2 − (x₁+x₂)(x₄+x₅) − 8x₆m(x₁)
        two.try_sub(&x12p.try_mul(&x45p).expect("same n"))
            .expect("same n")
            .try_sub(&x6m1.scale(&rat(8, 1)))
            .expect("same n"),
        // (x₃+2m(x₃))(x₄−x₅)
        x(n, 3)
            .try_add(&m1(n, 3).scale(&rat(2, 1)))
            .expect("same n")
            .try_mul(&x45m)
            .expect("same n"),
        // 2x₄m(x₃) − x₃x₅
        x(n, 4)
            .try_mul(&m1(n, 3))
            .expect("same n")
            .scale(&rat(2, 1))
            .try_sub(&x(n, 3).try_mul(&x(n, 5)).expect("same n"))
            .expect("same n"),
        // 2 + (x₄−x₅)(4m(x₃)−x₁−x₂) + (8/3)x₄m(x₁x₂) + 8x₆m(x₁)
        two.try_add(
            &x45m
                .try_mul(
                    &m1(n, 3)
                        .scale(&rat(4, 1))
                        .try_sub(&x12p)
                        .expect("same n"),
                )
                .expect("same n"),
        )
        .expect("same n")
        .try_add(&x(n, 4).try_mul(&m12).expect("same n").scale(&rat(8, 3)))
        .expect("same n")
        .try_add(&x6m1.scale(&rat(8, 1)))
        .expect("same n"),
        // 2 + (x₄−x₅)(4m(x₃)+x₁+x₂) + (8/3)x₅m(x₁x₂) + 8x₆m(x₁)
        two.try_add(
            &x45m
                .try_mul(
                    &m1(n, 3)
                        .scale(&rat(4, 1))
                        .try_add(&x12p)
                        .expect("same n"),
                )
                .expect("same n"),
        )
        .expect("same n")
        .try_add(&x(n, 5).try_mul(&m12).expect("same n").scale(&rat(8, 3)))
        .expect("same n")
        .try_add(&x6m1.scale(&rat(8, 1)))
        .expect("same n"),
    ];
    let cert = GramCertificate {
        n,
        rules: cov3322_rules(),
        blocks: vec![CertBlock {
            tag: BlockTag::MomentOfSquare,
            constraint: None,
            gram: g,
            v,
        }],
    };
    (target, cert)
}

/// Rules for the three-party network example over x₁…x₉ (parties A, B, C
/// measure x₁…x₃, x₄…x₆, x₇…x₉): x_j² = 1, vanishing first moments,
/// vanishing cross-party pair and degenerate triple correlators, and
/// factorization of every joint A/C moment into its marginals.
pub fn bilocal_rules() -> Result<RuleSet, AlgebraError> {
    let n = 9;
    let mut rules = RuleSet::hypercube(n);
    let unit = |j: usize| -> Vec<u32> {
        let mut e = vec![0u32; n];
        e[j - 1] = 1;
        e
    };
    for j in 1..=n {
        rules.push_vanishing(unit(j))?;
    }
    for i in 1..=3usize {
        for j in 1..=3usize {
            if i != j {
                let mut ab = unit(i);
                ab[j + 2] = 1;
                rules.push_vanishing(ab)?;
                let mut bc = unit(i + 3);
                bc[j + 5] = 1;
                rules.push_vanishing(bc)?;
            }
        }
    }
    for i in 1..=3usize {
        for j in 1..=3usize {
            for k in 1..=3usize {
                if i == j || j == k || i == k {
                    let mut e = unit(i);
                    e[j + 2] = 1;
                    e[k + 5] = 1;
                    rules.push_vanishing(e)?;
                }
            }
        }
    }
    // m(A-part · C-part) = m(A-part) m(C-part) for every nonempty pair of
    // square-free supports
    use crate::algebra::{MomentMonomial, MomentRule, MomentSymbol};
    for a_mask in 1u32..8 {
        for c_mask in 1u32..8 {
            let mut joint = vec![0u32; n];
            let mut a_part = vec![0u32; n];
            let mut c_part = vec![0u32; n];
            for b in 0..3 {
                if a_mask >> b & 1 == 1 {
                    joint[b] = 1;
                    a_part[b] = 1;
                }
                if c_mask >> b & 1 == 1 {
                    joint[b + 6] = 1;
                    c_part[b + 6] = 1;
                }
            }
            let pattern =
                MomentMonomial::from_symbol(MomentSymbol::new(joint).expect("nonzero"));
            let replacement = MomentPolynomial::symbol(a_part)?
                .try_mul(&MomentPolynomial::symbol(c_part)?)?;
            rules.push_moment_rule(MomentRule {
                pattern,
                replacement,
            })?;
        }
    }
    Ok(rules)
}

/// The network objective: (1/3)Σᵢ (m(BᵢCᵢ) − m(AᵢBᵢ)) minus the sum of
/// the six distinct-index triple correlators m(AᵢB_jC_k).
pub fn bilocal_objective() -> MomentPolynomial {
    let n = 9;
    let mut f = MomentPolynomial::zero(n);
    let third = rat(1, 3);
    for i in 1..=3usize {
        let bc = x(n, i + 3)
            .try_mul(&x(n, i + 6))
            .expect("same n")
            .formal_moment();
        let ab = x(n, i)
            .try_mul(&x(n, i + 3))
            .expect("same n")
            .formal_moment();
        f = f
            .try_add(&bc.try_sub(&ab).expect("same n").scale(&third))
            .expect("same n");
    }
    for i in 1..=3usize {
        for j in 1..=3usize {
            for k in 1..=3usize {
                if i != j && j != k && i != k {
                    let t = x(n, i)
                        .try_mul(&x(n, j + 3))
                        .expect("same n")
                        .try_mul(&x(n, k + 6))
                        .expect("same n")
                        .formal_moment();
                    f = f.try_sub(&t).expect("same n");
                }
            }
        }
    }
    f
}

/// The exact optimum of the network objective under the bilocal rules.
pub fn bilocal_bound() -> Rat {
    rat(4, 1)
}

/// A 16-point uniform probability space attaining the network bound. The
/// variables are named x1…x9; A depends only on the second coordinate,
/// C only on the first, and B flips sign on the diagonal.
pub fn bilocal_space() -> Result<FiniteProbabilitySpace, MeasureError> {
    let eta: [[i64; 4]; 4] = [
        [1, 1, 1, 1],
        [1, 1, -1, -1],
        [1, -1, 1, -1],
        [1, -1, -1, 1],
    ];
    let mut vars: BTreeMap<String, Vec<Rat>> = BTreeMap::new();
    for i in 1..=3usize {
        let mut a = Vec::with_capacity(16);
        let mut b = Vec::with_capacity(16);
        let mut c = Vec::with_capacity(16);
        for s in 0..4 {
            for t in 0..4 {
                a.push(rat(eta[i][t], 1));
                let flip = if s == t { -1 } else { 1 };
                b.push(rat(eta[i][s] * flip, 1));
                c.push(rat(eta[i][s], 1));
            }
        }
        vars.insert(format!("x{i}"), a);
        vars.insert(format!("x{}", i + 3), b);
        vars.insert(format!("x{}", i + 6), c);
    }
    let weights = vec![rat(1, 16); 16];
    FiniteProbabilitySpace::new(weights, vars)
}

/// The degree-6 bivariate functional with a PSD Hankel matrix whose
/// pseudo-moment evaluation of m[4,2]m[2,4] − m[2,2]³ is negative.
pub fn h17_functional() -> TruncatedFunctional {
    let entries: &[([u32; 2], i64)] = &[
        ([0, 0], 1),
        ([2, 0], 5),
        ([0, 2], 5),
        ([4, 0], 26),
        ([2, 2], 2),
        ([0, 4], 563),
        ([6, 0], 587),
        ([4, 2], 1),
        ([2, 4], 1),
        ([0, 6], 319642),
    ];
    let mut values: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
    for w in crate::algebra::exponent_vectors_upto(2, 6) {
        values.insert(w, Rat::from_integer(BigInt::from(0)));
    }
    for (w, v) in entries {
        values.insert(w.to_vec(), rat(*v, 1));
    }
    TruncatedFunctional::new(2, 6, values).expect("consistent data")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::verify_gram_certificate;
    use crate::measures::eval_random_vars;

    #[test]
    fn cov_certificate_is_valid() {
        let (target, cert) = cov3322_certificate();
        let outcome = verify_gram_certificate(&target, &cert).expect("well-formed");
        assert!(outcome.is_valid(), "{outcome:?}");
    }

    #[test]
    fn bilocal_space_attains_bound() {
        let space = bilocal_space().expect("valid space");
        let names: Vec<String> = (1..=9).map(|j| format!("x{j}")).collect();
        let values = eval_random_vars(&bilocal_objective(), &space, &names).expect("eval");
        // the objective is a pure polynomial, so every point carries the
        // same value: the expectation itself
        for v in &values {
            assert_eq!(v, &bilocal_bound());
        }
    }

    #[test]
    fn bilocal_rules_reduce_objective_to_itself() {
        let rules = bilocal_rules().expect("valid rules");
        let f = bilocal_objective();
        assert_eq!(rules.reduce(&f).expect("terminates"), f);
    }
}
