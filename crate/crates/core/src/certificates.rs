//! Exact Gram certificates of positivity for moment polynomials.
//!
//! A certificate presents a target polynomial as a sum of blocks of the
//! form vᵀGv, m(vᵀGv·s), or vᵀGv·s with G an exactly PSD rational matrix,
//! verified modulo a substitution rule set. The module also constructs
//! closed-form certificates: the symbolic even-moment inequality
//! m[2k] ≥ m[1]^{2k}, its multivariate image under power substitution,
//! and the weighted even-moment bound dominating m[i]².

use crate::algebra::{
    AlgebraError, MomentMonomial, MomentPolynomial, Rat, RuleSet, RuleSetFile,
};
use crate::linalg::{exact_psd_check, quadratic_form, LinalgError, PsdStatus};
use num::{BigInt, One, Zero};
use serde::{Deserialize, Serialize};
use std::str::FromStr;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum CertificateError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("block {block}: gram has {rows} rows but v has length {len}")]
    GramDimension { block: usize, rows: usize, len: usize },
    #[error("block {0}: tag requires a constraint polynomial")]
    MissingConstraint(usize),
    #[error("unknown block tag '{0}'")]
    UnknownTag(String),
    #[error("cannot parse rational '{0}'")]
    BadRational(String),
}

/// The algebraic shape of a certificate block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockTag {
    /// vᵀGv, a plain sum of squares (constraint ignored).
    Square,
    /// m(vᵀGv·s) with s the optional constraint (s = 1 when absent).
    MomentOfSquare,
    /// vᵀGv·s with s a required constraint polynomial.
    Constraint,
}

/// One block of a Gram certificate.
#[derive(Clone, Debug)]
pub struct CertBlock {
    pub tag: BlockTag,
    pub constraint: Option<MomentPolynomial>,
    pub gram: Vec<Vec<Rat>>,
    pub v: Vec<MomentPolynomial>,
}

impl CertBlock {
    /// The 1×1 block weight·m(v²).
    pub fn rank_one_moment(weight: Rat, v: MomentPolynomial) -> Self {
        CertBlock {
            tag: BlockTag::MomentOfSquare,
            constraint: None,
            gram: vec![vec![weight]],
            v: vec![v],
        }
    }

    fn check_shape(&self, block: usize) -> Result<(), CertificateError> {
        if self.gram.len() != self.v.len() {
            return Err(CertificateError::GramDimension {
                block,
                rows: self.gram.len(),
                len: self.v.len(),
            });
        }
        if matches!(self.tag, BlockTag::Constraint) && self.constraint.is_none() {
            return Err(CertificateError::MissingConstraint(block));
        }
        Ok(())
    }

    /// Expands the block into the moment polynomial it represents.
    pub fn expansion(&self) -> Result<MomentPolynomial, CertificateError> {
        self.check_shape(0)?;
        let n = match self.v.first() {
            Some(p) => p.n(),
            None => return Err(CertificateError::GramDimension { block: 0, rows: 0, len: 0 }),
        };
        let mut quad = MomentPolynomial::zero(n);
        for (i, row) in self.gram.iter().enumerate() {
            for (j, g) in row.iter().enumerate() {
                if g.is_zero() {
                    continue;
                }
                let prod = self.v[i].try_mul(&self.v[j])?;
                quad = quad.try_add(&prod.scale(g))?;
            }
        }
        let out = match self.tag {
            BlockTag::Square => quad,
            BlockTag::MomentOfSquare => {
                let inner = match &self.constraint {
                    Some(s) => quad.try_mul(s)?,
                    None => quad,
                };
                inner.formal_moment()
            }
            BlockTag::Constraint => {
                let s = self.constraint.as_ref().expect("checked above");
                quad.try_mul(s)?
            }
        };
        Ok(out)
    }
}

/// A certified decomposition of a target polynomial, valid modulo a rule
/// set: target ≡ Σ blocks with every Gram matrix PSD.
#[derive(Clone, Debug)]
pub struct GramCertificate {
    pub n: usize,
    pub rules: RuleSet,
    pub blocks: Vec<CertBlock>,
}

/// Result of exact certificate verification.
#[derive(Clone, Debug)]
pub enum VerifyOutcome {
    Valid,
    /// A Gram matrix fails the PSD check; the witness w has wᵀGw < 0.
    NotPsd { block: usize, witness: Vec<Rat> },
    /// The reduced difference target − Σ blocks is not identically zero.
    NonzeroResidual { residual: MomentPolynomial },
}

impl VerifyOutcome {
    pub fn is_valid(&self) -> bool {
        matches!(self, VerifyOutcome::Valid)
    }
}

/// Verifies a Gram certificate exactly: every block's Gram matrix must be
/// PSD (witnessed otherwise), and the target minus the block expansions
/// must reduce to zero under the certificate's rules.
pub fn verify_gram_certificate(
    target: &MomentPolynomial,
    cert: &GramCertificate,
) -> Result<VerifyOutcome, CertificateError> {
    let mut sum = MomentPolynomial::zero(cert.n);
    for (idx, block) in cert.blocks.iter().enumerate() {
        block.check_shape(idx)?;
        match exact_psd_check(&block.gram)? {
            PsdStatus::NotPsd { witness } => {
                debug_assert!(quadratic_form(&block.gram, &witness) < Rat::zero());
                return Ok(VerifyOutcome::NotPsd { block: idx, witness });
            }
            _ => {}
        }
        sum = sum.try_add(&block.expansion()?)?;
    }
    let residual = cert.rules.reduce(&target.try_sub(&sum)?)?;
    if residual.is_zero() {
        Ok(VerifyOutcome::Valid)
    } else {
        Ok(VerifyOutcome::NonzeroResidual { residual })
    }
}

fn rat_u32(v: u32) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

fn pow2(e: u32) -> Rat {
    Rat::from_integer(BigInt::from(2u32).pow(e))
}

/// Univariate monomial x₁^a·m[1]^b as a polynomial over one variable.
fn x1a_m1b(a: u32, b: u32) -> MomentPolynomial {
    let m1 = MomentPolynomial::symbol(vec![1]).expect("nonzero");
    let x1 = MomentPolynomial::var(1, 1).expect("valid");
    x1.pow(a).try_mul(&m1.pow(b)).expect("same n")
}

/// Closed-form certificate of m[2k] − m[1]^{2k} as a sum of moments of
/// squares over one variable. Returns the target and its certificate.
pub fn holder_certificate(k: u32) -> (MomentPolynomial, GramCertificate) {
    let target = if k == 0 {
        MomentPolynomial::zero(1)
    } else {
        let m2k = MomentPolynomial::symbol(vec![2 * k]).expect("nonzero");
        let m1 = MomentPolynomial::symbol(vec![1]).expect("nonzero");
        m2k.try_sub(&m1.pow(2 * k)).expect("same n")
    };
    let mut blocks = Vec::new();
    if k == 1 {
        // m[2] − m[1]² = m((m[1] − x₁)²)
        let v = x1a_m1b(0, 1).try_sub(&x1a_m1b(1, 0)).expect("same n");
        blocks.push(CertBlock::rank_one_moment(Rat::one(), v));
    } else if k >= 2 {
        // k·m((m[1]^k − x₁·m[1]^{k−1})²)
        let v = x1a_m1b(0, k).try_sub(&x1a_m1b(1, k - 1)).expect("same n");
        blocks.push(CertBlock::rank_one_moment(rat_u32(k), v));
        // halving chain a₀ = k, a_{i+1} = ⌈aᵢ/2⌉, one block per step
        let mut a = k;
        let mut weight = Rat::one();
        while a >= 2 {
            let r = a % 2;
            let v = x1a_m1b(r, k - r).try_sub(&x1a_m1b(a, k - a)).expect("same n");
            blocks.push(CertBlock::rank_one_moment(weight.clone(), v));
            a = a.div_ceil(2);
            weight *= rat_u32(2);
        }
    }
    let cert = GramCertificate {
        n: 1,
        rules: RuleSet::empty(1),
        blocks,
    };
    (target, cert)
}

/// The image of the univariate certificate under the substitution
/// x₁ ↦ x^i, m[k] ↦ m[k·i]: certifies m[2k·i] − m[i]^{2k} over
/// n = i.len() variables. The vector i must be nonzero.
pub fn holder_multivariate(
    k: u32,
    i: &[u32],
) -> Result<(MomentPolynomial, GramCertificate), AlgebraError> {
    let (target, cert) = holder_certificate(k);
    let target = if k == 0 {
        MomentPolynomial::zero(i.len().max(1))
    } else {
        target.power_substitution(i)?
    };
    let n = i.len();
    let blocks = cert
        .blocks
        .into_iter()
        .map(|b| {
            Ok(CertBlock {
                tag: b.tag,
                constraint: None,
                gram: b.gram,
                v: b
                    .v
                    .into_iter()
                    .map(|p| p.power_substitution(i))
                    .collect::<Result<Vec<_>, _>>()?,
            })
        })
        .collect::<Result<Vec<_>, AlgebraError>>()?;
    Ok((
        target,
        GramCertificate {
            n,
            rules: RuleSet::empty(n),
            blocks,
        },
    ))
}

/// The x-only monomial ∏_{j≥j0} x_{j+1}^{2·i[j−j0]·scale} over n variables
/// (j0 is 0-based).
fn tail_monomial(n: usize, i: &[u32], j0: usize, scale: u32) -> MomentPolynomial {
    let mut e = vec![0u32; n];
    for (off, &ij) in i[j0..].iter().enumerate() {
        e[j0 + off] = 2 * ij * scale;
    }
    MomentPolynomial::from_monomial(MomentMonomial::from_x(e), Rat::one())
}

/// Blocks certifying Σ_j 2^{−j} m(x_j^{2^{j+1} i_j}) + 2^{−(n−1)} m(x_n^{2^n i_n})
/// − m(x^{2i}) by the telescoping split of m(x^{2i}) against half the sum
/// of squared halves.
fn weighted_even_blocks(
    n: usize,
    i: &[u32],
    j0: usize,
    scale: u32,
    weight: Rat,
    blocks: &mut Vec<CertBlock>,
) {
    if j0 + 1 >= n {
        return;
    }
    let mut head = vec![0u32; n];
    head[j0] = 2 * i[j0] * scale;
    let head = MomentPolynomial::from_monomial(MomentMonomial::from_x(head), Rat::one());
    let tail = tail_monomial(n, i, j0 + 1, scale);
    let v = head.try_sub(&tail).expect("same n");
    if !v.is_zero() {
        blocks.push(CertBlock::rank_one_moment(weight.clone(), v));
    }
    weighted_even_blocks(n, i, j0 + 1, scale * 2, weight / rat_u32(2), blocks);
}

/// Closed-form certificate that the weighted sum of even power moments
/// Σ_{j<n} 2^{−j} m(x_j^{2^{j+1} i_j}) + 2^{−(n−1)} m(x_n^{2^n i_n})
/// dominates m[i]². Returns the target (the difference) and a
/// certificate with all blocks of the form c·m(v²).
pub fn adhoc_certificate(i: &[u32]) -> Result<(MomentPolynomial, GramCertificate), AlgebraError> {
    let n = i.len();
    if n == 0 {
        return Err(AlgebraError::ZeroVariables);
    }
    // target
    let mut target = MomentPolynomial::zero(n);
    for j in 0..n {
        let (w, e) = if j + 1 < n {
            (pow2(j as u32 + 1), 2u32.pow(j as u32 + 2) * i[j])
        } else {
            (pow2(n as u32 - 1), 2u32.pow(n as u32) * i[j])
        };
        let mut exps = vec![0u32; n];
        exps[j] = e;
        let term = MomentPolynomial::from_monomial(MomentMonomial::from_x(exps), Rat::one())
            .formal_moment();
        target = target.try_add(&term.scale(&(Rat::one() / w)))?;
    }
    if i.iter().any(|&e| e > 0) {
        let mi = MomentPolynomial::symbol(i.to_vec())?;
        target = target.try_sub(&mi.pow(2))?;
    } else {
        target = target.try_sub(&MomentPolynomial::one(n))?;
    }
    // blocks: telescoping split down to m(x^{2i}), then m(x^{2i}) − m[i]²
    let mut blocks = Vec::new();
    weighted_even_blocks(n, i, 0, 1, Rat::one() / rat_u32(2), &mut blocks);
    if i.iter().any(|&e| e > 0) {
        let (_, holder) = holder_multivariate(1, i)?;
        blocks.extend(holder.blocks);
    }
    Ok((
        target,
        GramCertificate {
            n,
            rules: RuleSet::empty(n),
            blocks,
        },
    ))
}

/// JSON-facing form of one certificate block.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertBlockFile {
    pub tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<String>,
    pub gram: Vec<Vec<String>>,
    pub v: Vec<String>,
}

/// JSON certificate file: the target polynomial, the rule set it is
/// verified against, and the blocks. Polynomials use the text grammar and
/// rationals are `p` or `p/q` strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateFile {
    pub n: usize,
    pub target: String,
    #[serde(default)]
    pub rules: RuleSetFile,
    pub blocks: Vec<CertBlockFile>,
}

fn tag_name(tag: BlockTag) -> &'static str {
    match tag {
        BlockTag::Square => "square",
        BlockTag::MomentOfSquare => "moment_of_square",
        BlockTag::Constraint => "constraint",
    }
}

fn parse_tag(s: &str) -> Result<BlockTag, CertificateError> {
    match s {
        "square" => Ok(BlockTag::Square),
        "moment_of_square" => Ok(BlockTag::MomentOfSquare),
        "constraint" => Ok(BlockTag::Constraint),
        other => Err(CertificateError::UnknownTag(other.to_string())),
    }
}

impl CertificateFile {
    pub fn from_certificate(target: &MomentPolynomial, cert: &GramCertificate) -> Self {
        CertificateFile {
            n: cert.n,
            target: target.to_string(),
            rules: RuleSetFile::from_rules(&cert.rules),
            blocks: cert
                .blocks
                .iter()
                .map(|b| CertBlockFile {
                    tag: tag_name(b.tag).to_string(),
                    constraint: b.constraint.as_ref().map(|p| p.to_string()),
                    gram: b
                        .gram
                        .iter()
                        .map(|row| row.iter().map(|r| r.to_string()).collect())
                        .collect(),
                    v: b.v.iter().map(|p| p.to_string()).collect(),
                })
                .collect(),
        }
    }

    pub fn to_certificate(
        &self,
    ) -> Result<(MomentPolynomial, GramCertificate), CertificateError> {
        let n = self.n;
        let target = MomentPolynomial::parse(&self.target, n)?;
        let rules = self.rules.to_rules(n)?;
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let tag = parse_tag(&b.tag)?;
            let constraint = b
                .constraint
                .as_ref()
                .map(|s| MomentPolynomial::parse(s, n))
                .transpose()?;
            let gram = b
                .gram
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|s| {
                            Rat::from_str(s)
                                .map_err(|_| CertificateError::BadRational(s.clone()))
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            let v = b
                .v
                .iter()
                .map(|s| MomentPolynomial::parse(s, n))
                .collect::<Result<Vec<_>, _>>()?;
            blocks.push(CertBlock {
                tag,
                constraint,
                gram,
                v,
            });
        }
        Ok((target, GramCertificate { n, rules, blocks }))
    }
}

/// Checks the two exact identities underlying the bilocal bound, reduced
/// modulo the bilocal rule set: for each party index the product identity
/// 1 − m(B_iC_i) + m(A_iB_i) = m((1 − B_iC_i)(1 + A_iB_i)), and for each
/// middle index j the square identity for the three-party correlators.
/// Returns the reduced residuals; all must vanish.
pub fn bilocal_identities_check() -> Result<Vec<MomentPolynomial>, CertificateError> {
    let rules = crate::catalog::bilocal_rules()?;
    let n = 9;
    let var = |j: usize| MomentPolynomial::var(n, j).expect("valid index");
    let a = |i: usize| var(i);
    let b = |i: usize| var(i + 3);
    let c = |i: usize| var(i + 6);
    let one = MomentPolynomial::one(n);
    let half = Rat::one() / rat_u32(2);
    let mut residuals = Vec::new();
    // 1 − m(B_iC_i) + m(A_iB_i) = m((1 − B_iC_i)(1 + A_iB_i))
    for i in 1..=3 {
        let bc = b(i).try_mul(&c(i))?;
        let ab = a(i).try_mul(&b(i))?;
        let lhs = one
            .try_sub(&bc.formal_moment())?
            .try_add(&ab.formal_moment())?;
        let rhs = one
            .try_sub(&bc)?
            .try_mul(&one.try_add(&ab)?)?
            .formal_moment();
        residuals.push(rules.reduce(&lhs.try_sub(&rhs)?)?);
    }
    // square identity: for each j, with {i,k} the other two indices,
    // 1 + m(A_iB_jC_k) + m(A_kB_jC_i)
    //   = m((½((A_iA_k + C_iC_k)B_j + A_iC_i + A_kC_k) − m(A_iA_k)B_j)²)
    for j in 1..=3usize {
        let [i, k] = match j {
            1 => [2, 3],
            2 => [1, 3],
            _ => [1, 2],
        };
        let abc1 = a(i).try_mul(&b(j))?.try_mul(&c(k))?;
        let abc2 = a(k).try_mul(&b(j))?.try_mul(&c(i))?;
        let lhs = one
            .try_add(&abc1.formal_moment())?
            .try_add(&abc2.formal_moment())?;
        let aa = a(i).try_mul(&a(k))?;
        let cc = c(i).try_mul(&c(k))?;
        let inner = aa
            .try_add(&cc)?
            .try_mul(&b(j))?
            .try_add(&a(i).try_mul(&c(i))?)?
            .try_add(&a(k).try_mul(&c(k))?)?
            .scale(&half);
        let q = inner.try_sub(&aa.formal_moment().try_mul(&b(j))?)?;
        let rhs = q.try_mul(&q)?.formal_moment();
        residuals.push(rules.reduce(&lhs.try_sub(&rhs)?)?);
    }
    Ok(residuals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn verify_ok(target: &MomentPolynomial, cert: &GramCertificate) {
        let outcome = verify_gram_certificate(target, cert).expect("well-formed");
        match &outcome {
            VerifyOutcome::Valid => {}
            VerifyOutcome::NotPsd { block, .. } => panic!("block {block} not PSD"),
            VerifyOutcome::NonzeroResidual { residual } => {
                panic!("nonzero residual: {residual}")
            }
        }
    }

    #[test]
    fn holder_small_k() {
        for k in 0..=6 {
            let (target, cert) = holder_certificate(k);
            verify_ok(&target, &cert);
        }
    }

    #[test]
    fn holder_multivariate_small() {
        for (k, i) in [(1, vec![1, 2]), (2, vec![2, 0, 1]), (3, vec![1, 1])] {
            let (target, cert) = holder_multivariate(k, &i).expect("valid");
            verify_ok(&target, &cert);
        }
    }

    #[test]
    fn adhoc_small() {
        for i in [vec![1], vec![1, 1], vec![2, 1], vec![1, 2, 1], vec![0, 1]] {
            let (target, cert) = adhoc_certificate(&i).expect("valid");
            verify_ok(&target, &cert);
        }
    }

    #[test]
    fn tampered_gram_detected() {
        let (target, mut cert) = holder_certificate(2);
        cert.blocks[0].gram[0][0] = -Rat::one();
        let outcome = verify_gram_certificate(&target, &cert).expect("well-formed");
        assert!(matches!(outcome, VerifyOutcome::NotPsd { block: 0, .. }));
    }

    #[test]
    fn tampered_target_detected() {
        let (target, cert) = holder_certificate(2);
        let target = target.try_add(&MomentPolynomial::one(1)).unwrap();
        let outcome = verify_gram_certificate(&target, &cert).expect("well-formed");
        assert!(matches!(outcome, VerifyOutcome::NonzeroResidual { .. }));
    }

    #[test]
    fn json_round_trip() {
        let (target, cert) = adhoc_certificate(&[1, 2]).expect("valid");
        let file = CertificateFile::from_certificate(&target, &cert);
        let text = serde_json::to_string_pretty(&file).expect("serialize");
        let back: CertificateFile = serde_json::from_str(&text).expect("parse");
        let (target2, cert2) = back.to_certificate().expect("convert");
        assert_eq!(target, target2);
        verify_ok(&target2, &cert2);
    }
}
