//! Assembly of semidefinite relaxations for moment polynomial
//! optimization: truncated quadratic-module membership programs, their
//! moment-relaxation duals, and exponential-perturbation variants.

use std::collections::BTreeMap;

use num::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    monomial_basis, mono_mul, pure_monomial_basis, x_monomial_basis, AlgebraError,
    MomentMonomial, MomentPolynomial, Rat, RuleSet, RuleSetFile,
};
use crate::sdp::{ReportSide, SdpBlockInfo, SdpProblem, SdpRow, SparseSym};

#[derive(thiserror::Error, Debug)]
pub enum RelaxError {
    #[error("algebra error: {0}")]
    Algebra(#[from] AlgebraError),
    #[error("constraint in S1 must contain no moment symbols: {0}")]
    NonXConstraint(String),
    #[error("constraint in S2 must be pure: {0}")]
    NonPureConstraint(String),
    #[error("relaxation order {order} too small for degree {degree}")]
    OrderTooSmall { order: u32, degree: u32 },
    #[error("the qm cone requires a pure target, got {0}")]
    NonPureObjective(String),
    #[error("invalid spec field {field}: {message}")]
    InvalidField { field: String, message: String },
}

/// Optimization direction of the original problem.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

/// Which truncated cone the relaxation is built over.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cone {
    /// Moments of squares: blocks 𝚖(v₁v₂s) plus pure blocks u₁u₂t.
    #[serde(rename = "qm")]
    Qm,
    /// SDP-representable enlargement with direct blocks v₁v₂s and mixed
    /// blocks 𝚖(u₁u₂s)·v₁v₂ over pairs of monomials.
    #[serde(rename = "QQM")]
    QQm,
}

/// Perturbation polynomial used by the ε-minimization mode.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbKind {
    /// Φ_r + Ψ_r, for general targets.
    PhiPlusPsi,
    /// 1 + Ψ_r, for pure targets.
    OnePlusPsi,
    /// 𝚖(Φ_r), for pure targets.
    MomentPhi,
}

/// Which program to assemble from a spec.
#[derive(Clone, Debug, PartialEq)]
pub enum RelaxMode {
    /// max α with f − α in the truncated cone; bound from the Gram side.
    Membership,
    /// The moment-relaxation dual of the membership program.
    Dual,
    /// min ε ≥ 0 with f + ε·(perturbation) in the cone.
    EpsMin(PerturbKind),
    /// max z with f − z in the cone plus λ·(M − Φ_r − Ψ_r), λ ≥ 0.
    /// `None` picks a default M from the coefficient norm of f.
    BigM(Option<Rat>),
    /// max z with f − z + ε·Φ_r in the cone, for a fixed ε.
    FixedEps(Rat),
}

/// A moment polynomial optimization problem plus relaxation parameters.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub n: usize,
    /// Inequality constraints on the variables (no moment symbols).
    pub s1: Vec<MomentPolynomial>,
    /// Pure inequality constraints on the moments.
    pub s2: Vec<MomentPolynomial>,
    pub objective: MomentPolynomial,
    pub sense: Sense,
    pub rules: RuleSet,
    pub order: u32,
    /// Cone requested by the spec file, if any.
    pub cone: Option<Cone>,
    /// Mode requested by the spec file, if any.
    pub mode: Option<RelaxMode>,
}

impl ProblemSpec {
    /// Checks the structural invariants: S1 x-only, S2 pure, and the
    /// order large enough for the objective and every constraint.
    pub fn validate(&self) -> Result<(), RelaxError> {
        for s in &self.s1 {
            if !s.is_x_only() {
                return Err(RelaxError::NonXConstraint(s.to_string()));
            }
        }
        for t in &self.s2 {
            if !t.is_pure() {
                return Err(RelaxError::NonPureConstraint(t.to_string()));
            }
        }
        let mut need = self.objective.degree().unwrap_or(0);
        for s in self.s1.iter().chain(&self.s2) {
            need = need.max(s.degree().unwrap_or(0));
        }
        if 2 * self.order < need {
            return Err(RelaxError::OrderTooSmall {
                order: self.order,
                degree: need,
            });
        }
        Ok(())
    }

    /// Objective in canonical minimization form (negated for Max).
    fn internal_objective(&self) -> Result<MomentPolynomial, RelaxError> {
        let f = self.rules.reduce(&self.objective)?;
        Ok(match self.sense {
            Sense::Min => f,
            Sense::Max => f.neg(),
        })
    }

    /// Sign applied to a raw side objective to recover the user bound.
    fn bound_sign(&self) -> Rat {
        match self.sense {
            Sense::Min => Rat::one(),
            Sense::Max => -Rat::one(),
        }
    }

    /// Cone to use when the spec does not pin one down: qm for pure
    /// targets, the enlarged cone otherwise.
    pub fn effective_cone(&self) -> Cone {
        self.cone.unwrap_or(if self.objective.is_pure() {
            Cone::Qm
        } else {
            Cone::QQm
        })
    }
}

/// One positive semidefinite generator block: a labelled basis together
/// with the reduced expansion of every pairwise product.
#[derive(Clone, Debug)]
pub struct GeneratorBlock {
    pub label: String,
    /// Display forms of the basis elements.
    pub basis: Vec<String>,
    pub dim: usize,
    /// Upper-triangular entries in row-major (i ≤ j) order.
    pub entries: Vec<MomentPolynomial>,
}

fn upper_len(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

fn upper_pairs(dim: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(upper_len(dim));
    for i in 0..dim {
        for j in i..dim {
            v.push((i, j));
        }
    }
    v
}

/// Degree budget for basis elements multiplying a generator s at
/// relaxation order r: deg s + 2·deg v ≤ 2r.
fn basis_budget(order: u32, s: &MomentPolynomial) -> Option<u32> {
    let ds = s.degree().unwrap_or(0);
    if ds > 2 * order {
        None
    } else {
        Some((2 * order - ds) / 2)
    }
}

fn product_block<F>(
    label: String,
    basis: Vec<MomentMonomial>,
    build: F,
) -> Result<GeneratorBlock, RelaxError>
where
    F: Fn(&MomentMonomial, &MomentMonomial) -> Result<MomentPolynomial, RelaxError> + Sync,
{
    let dim = basis.len();
    let entries = upper_pairs(dim)
        .par_iter()
        .map(|(i, j)| build(&basis[*i], &basis[*j]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GeneratorBlock {
        label,
        basis: basis.iter().map(|m| m.to_string()).collect(),
        dim,
        entries,
    })
}

/// Enumerates the positive semidefinite generator blocks of the
/// truncated cone for a spec. Every expansion is reduced by the rules
/// before indexing.
pub fn enumerate_generators(
    spec: &ProblemSpec,
    cone: Cone,
) -> Result<Vec<GeneratorBlock>, RelaxError> {
    spec.validate()?;
    let n = spec.n;
    let r = spec.order;
    let rules = &spec.rules;
    let one = MomentPolynomial::one(n);
    let mut blocks = Vec::new();

    // Moments of squares: per s in {1} ∪ S1 a block over general
    // monomials v contributing 𝚖(v₁v₂s).
    let mut moment_gens: Vec<(String, &MomentPolynomial)> = vec![("sq:1".into(), &one)];
    for (idx, s) in spec.s1.iter().enumerate() {
        moment_gens.push((format!("sq:s{}", idx + 1), s));
    }
    for (label, s) in &moment_gens {
        if let Some(budget) = basis_budget(r, s) {
            let basis = monomial_basis(n, budget, rules);
            blocks.push(product_block(label.clone(), basis, |v1, v2| {
                let prod = MomentPolynomial::from_monomial(mono_mul(v1, v2)?, Rat::one());
                let withs = prod.try_mul(s)?;
                Ok(rules.reduce(&withs.formal_moment())?)
            })?);
        }
    }

    // Pure squares against S2: per t a block over pure monomials u
    // contributing u₁u₂t.
    for (idx, t) in spec.s2.iter().enumerate() {
        if let Some(budget) = basis_budget(r, t) {
            let basis = pure_monomial_basis(n, budget, rules);
            blocks.push(product_block(
                format!("pure:t{}", idx + 1),
                basis,
                |u1, u2| {
                    let prod = MomentPolynomial::from_monomial(mono_mul(u1, u2)?, Rat::one());
                    Ok(rules.reduce(&prod.try_mul(t)?)?)
                },
            )?);
        }
    }

    if cone == Cone::QQm {
        // Direct squares: per s in S1 ∪ S2 a block over general
        // monomials v contributing v₁v₂s.
        let mut direct: Vec<(String, &MomentPolynomial)> = Vec::new();
        for (idx, s) in spec.s1.iter().enumerate() {
            direct.push((format!("direct:s{}", idx + 1), s));
        }
        for (idx, t) in spec.s2.iter().enumerate() {
            direct.push((format!("direct:t{}", idx + 1), t));
        }
        for (label, s) in direct {
            if let Some(budget) = basis_budget(r, s) {
                let basis = monomial_basis(n, budget, rules);
                blocks.push(product_block(label, basis, |v1, v2| {
                    let prod = MomentPolynomial::from_monomial(mono_mul(v1, v2)?, Rat::one());
                    Ok(rules.reduce(&prod.try_mul(s)?)?)
                })?);
            }
        }

        // Mixed blocks: per s in {1} ∪ S1, indexed by pairs (u, v) of an
        // x-monomial and a general monomial, contributing 𝚖(u₁u₂s)·v₁v₂.
        for (label, s) in &moment_gens {
            if let Some(budget) = basis_budget(r, s) {
                let us = x_monomial_basis(n, budget, rules);
                let vs = monomial_basis(n, budget, rules);
                let mut pairs: Vec<(MomentMonomial, MomentMonomial)> = Vec::new();
                for u in &us {
                    for v in &vs {
                        if u.degree() + v.degree() <= budget {
                            pairs.push((u.clone(), v.clone()));
                        }
                    }
                }
                let dim = pairs.len();
                let entries = upper_pairs(dim)
                    .par_iter()
                    .map(|(i, j)| {
                        let (u1, v1) = &pairs[*i];
                        let (u2, v2) = &pairs[*j];
                        let uu = MomentPolynomial::from_monomial(mono_mul(u1, u2)?, Rat::one());
                        let ms = uu.try_mul(s)?.formal_moment();
                        let vv = MomentPolynomial::from_monomial(mono_mul(v1, v2)?, Rat::one());
                        Ok(rules.reduce(&ms.try_mul(&vv)?)?)
                    })
                    .collect::<Result<Vec<_>, RelaxError>>()?;
                blocks.push(GeneratorBlock {
                    label: format!("mixed:{}", label.trim_start_matches("sq:")),
                    basis: pairs
                        .iter()
                        .map(|(u, v)| format!("({u}, {v})"))
                        .collect(),
                    dim,
                    entries,
                });
            }
        }
    }

    Ok(blocks)
}

/// A free scalar or sign-constrained scalar column in the assembled
/// equality system: the coefficient of the scalar in each row is the
/// coefficient of the row's monomial in `column`.
struct ScalarCol {
    label: String,
    column: MomentPolynomial,
    /// Gram-side objective coefficient.
    obj: Rat,
    /// True: free scalar; false: a 1×1 PSD block (nonnegative scalar).
    free: bool,
}

fn assemble(
    _spec: &ProblemSpec,
    blocks: Vec<GeneratorBlock>,
    target: &MomentPolynomial,
    cols: Vec<ScalarCol>,
    report: ReportSide,
    obj_sign: Rat,
    obj_shift: Rat,
) -> Result<SdpProblem, RelaxError> {
    let nb = blocks.len();
    let n_extra = cols.iter().filter(|c| !c.free).count();
    let n_free = cols.len() - n_extra;

    struct RowBuild {
        mats: Vec<SparseSym>,
        free: Vec<Rat>,
        rhs: Rat,
    }
    let mut rows: BTreeMap<MomentMonomial, RowBuild> = BTreeMap::new();
    let blank = |nb: usize, nf: usize| RowBuild {
        mats: vec![Vec::new(); nb],
        free: vec![Rat::zero(); nf],
        rhs: Rat::zero(),
    };

    let total_blocks = nb + n_extra;
    for (mono, c) in target.terms() {
        let row = rows
            .entry(mono.clone())
            .or_insert_with(|| blank(total_blocks, n_free));
        row.rhs = c.clone();
    }
    for (b, block) in blocks.iter().enumerate() {
        let pairs = upper_pairs(block.dim);
        for (idx, poly) in block.entries.iter().enumerate() {
            let (i, j) = pairs[idx];
            for (mono, c) in poly.terms() {
                let row = rows
                    .entry(mono.clone())
                    .or_insert_with(|| blank(total_blocks, n_free));
                row.mats[b].push((i, j, c.clone()));
            }
        }
    }
    let mut infos: Vec<SdpBlockInfo> = blocks
        .iter()
        .map(|b| SdpBlockInfo {
            label: b.label.clone(),
            dim: b.dim,
        })
        .collect();
    let mut f0: Vec<SparseSym> = vec![Vec::new(); nb];
    let mut scalar_vars = Vec::new();
    let mut free_obj = Vec::new();
    let mut extra_idx = nb;
    let mut free_idx = 0usize;
    for col in &cols {
        if col.free {
            for (mono, c) in col.column.terms() {
                let row = rows
                    .entry(mono.clone())
                    .or_insert_with(|| blank(total_blocks, n_free));
                row.free[free_idx] = c.clone();
            }
            scalar_vars.push(col.label.clone());
            free_obj.push(col.obj.clone());
            free_idx += 1;
        } else {
            infos.push(SdpBlockInfo {
                label: col.label.clone(),
                dim: 1,
            });
            for (mono, c) in col.column.terms() {
                let row = rows
                    .entry(mono.clone())
                    .or_insert_with(|| blank(total_blocks, n_free));
                row.mats[extra_idx].push((0, 0, c.clone()));
            }
            let mut m0 = Vec::new();
            if !col.obj.is_zero() {
                m0.push((0, 0, col.obj.clone()));
            }
            f0.push(m0);
            extra_idx += 1;
        }
    }
    let rows = rows
        .into_iter()
        .map(|(mono, rb)| SdpRow {
            label: mono.to_string(),
            mats: rb.mats,
            free: rb.free,
            rhs: rb.rhs,
        })
        .collect();
    Ok(SdpProblem {
        blocks: infos,
        scalar_vars,
        free_obj,
        f0,
        rows,
        report,
        obj_sign,
        obj_shift,
    })
}

/// Builds the membership program: maximize α with f − α in the
/// truncated cone. The bound is read off the Gram side.
pub fn build_membership_sdp(spec: &ProblemSpec, cone: Cone) -> Result<SdpProblem, RelaxError> {
    spec.validate()?;
    let f = spec.internal_objective()?;
    if cone == Cone::Qm && !f.is_pure() {
        return Err(RelaxError::NonPureObjective(spec.objective.to_string()));
    }
    let blocks = enumerate_generators(spec, cone)?;
    let cols = vec![ScalarCol {
        label: "alpha".into(),
        column: MomentPolynomial::one(spec.n),
        obj: Rat::one(),
        free: true,
    }];
    assemble(
        spec,
        blocks,
        &f,
        cols,
        ReportSide::Gram,
        spec.bound_sign(),
        Rat::zero(),
    )
}

/// Builds the moment-relaxation dual: minimize L(f) over pseudo-moment
/// vectors L with L(1) = 1 that are nonnegative on the cone generators.
/// Structurally the same program as membership; the bound is read off
/// the moment side, whose variables are the pseudo-moments.
pub fn build_dual_sdp(spec: &ProblemSpec) -> Result<SdpProblem, RelaxError> {
    let cone = spec.effective_cone();
    let mut p = build_membership_sdp(spec, cone)?;
    p.report = ReportSide::Moment;
    Ok(p)
}

fn factorial(k: u32) -> Rat {
    let mut f = Rat::one();
    for i in 2..=k {
        f *= Rat::from_integer(i.into());
    }
    f
}

/// The exponential-tail perturbation polynomials
/// Φ_r = Σ_j Σ_{k≤r} x_j^{2k}/k! and
/// Ψ_r = Σ_j Σ_{kℓ≤r, k,ℓ≥1} 𝚖(x_j^{2k})^ℓ / ((k!)^ℓ ℓ!).
pub fn phi_psi(n: usize, r: u32) -> (MomentPolynomial, MomentPolynomial) {
    let mut phi = MomentPolynomial::zero(n);
    let mut psi = MomentPolynomial::zero(n);
    for j in 0..n {
        for k in 0..=r {
            let mut e = vec![0u32; n];
            e[j] = 2 * k;
            phi.add_term(
                MomentMonomial::from_x(e),
                Rat::one() / factorial(k),
            );
        }
        for k in 1..=r {
            let mut e = vec![0u32; n];
            e[j] = 2 * k;
            let sym = MomentPolynomial::from_monomial(MomentMonomial::from_x(e), Rat::one())
                .formal_moment();
            for l in 1..=r / k {
                let coeff = Rat::one() / (factorial(k).pow(l as i32) * factorial(l));
                psi = &psi + &sym.pow(l).scale(&coeff);
            }
        }
    }
    (phi, psi)
}

/// Default big-M constant: 10·n·(ē + ē²)·(1 + |f|₁) with a rational
/// upper bound ē + ē² ≤ 10109/1000 for e + e², exceeding Φ_r + Ψ_r on
/// the unit box.
pub fn default_big_m(n: usize, f: &MomentPolynomial) -> Rat {
    let e_bound = Rat::new(10109.into(), 1000.into());
    Rat::from_integer((10 * n as i64).into()) * e_bound * (Rat::one() + f.coeff_l1())
}

/// Builds one of the perturbed programs at the spec's order.
pub fn build_perturbed_sdp(spec: &ProblemSpec, mode: &RelaxMode) -> Result<SdpProblem, RelaxError> {
    spec.validate()?;
    let n = spec.n;
    let r = spec.order;
    let f = spec.internal_objective()?;
    let (phi, psi) = phi_psi(n, r);
    match mode {
        RelaxMode::Membership => build_membership_sdp(spec, spec.effective_cone()),
        RelaxMode::Dual => build_dual_sdp(spec),
        RelaxMode::EpsMin(kind) => {
            let pert = match kind {
                PerturbKind::PhiPlusPsi => phi.try_add(&psi)?,
                PerturbKind::OnePlusPsi => MomentPolynomial::one(n).try_add(&psi)?,
                PerturbKind::MomentPhi => phi.formal_moment(),
            };
            let pert = spec.rules.reduce(&pert)?;
            let cone = match kind {
                PerturbKind::PhiPlusPsi => Cone::QQm,
                _ => {
                    if f.is_pure() {
                        spec.cone.unwrap_or(Cone::Qm)
                    } else {
                        Cone::QQm
                    }
                }
            };
            let blocks = enumerate_generators(spec, cone)?;
            // Rows: Σ⟨A_w, G⟩ − ε·p_w = f_w, i.e. cone element f + ε·p;
            // Gram side maximizes −ε.
            let cols = vec![ScalarCol {
                label: "eps".into(),
                column: pert.neg(),
                obj: -Rat::one(),
                free: false,
            }];
            assemble(
                spec,
                blocks,
                &f,
                cols,
                ReportSide::Gram,
                -Rat::one(),
                Rat::zero(),
            )
        }
        RelaxMode::BigM(m) => {
            let m = m.clone().unwrap_or_else(|| default_big_m(n, &f));
            let q = MomentPolynomial::constant(n, m)
                .try_sub(&phi)?
                .try_sub(&psi)?;
            let q = spec.rules.reduce(&q)?;
            let blocks = enumerate_generators(spec, Cone::QQm)?;
            // f − z = cone + λ·q with λ ≥ 0.
            let cols = vec![
                ScalarCol {
                    label: "bound".into(),
                    column: MomentPolynomial::one(n),
                    obj: Rat::one(),
                    free: true,
                },
                ScalarCol {
                    label: "lambda".into(),
                    column: q,
                    obj: Rat::zero(),
                    free: false,
                },
            ];
            assemble(
                spec,
                blocks,
                &f,
                cols,
                ReportSide::Gram,
                spec.bound_sign(),
                Rat::zero(),
            )
        }
        RelaxMode::FixedEps(eps) => {
            let target = f.try_add(&spec.rules.reduce(&phi)?.scale(eps))?;
            let blocks = enumerate_generators(spec, spec.effective_cone())?;
            let cols = vec![ScalarCol {
                label: "bound".into(),
                column: MomentPolynomial::one(n),
                obj: Rat::one(),
                free: true,
            }];
            assemble(
                spec,
                blocks,
                &target,
                cols,
                ReportSide::Gram,
                spec.bound_sign(),
                Rat::zero(),
            )
        }
    }
}

/// Builds the program a spec asks for, honoring explicit mode and cone
/// overrides.
pub fn build(spec: &ProblemSpec, mode: Option<&RelaxMode>) -> Result<SdpProblem, RelaxError> {
    let mode = mode
        .cloned()
        .or_else(|| spec.mode.clone())
        .unwrap_or(RelaxMode::Membership);
    match mode {
        RelaxMode::Membership => build_membership_sdp(spec, spec.effective_cone()),
        RelaxMode::Dual => build_dual_sdp(spec),
        other => build_perturbed_sdp(spec, &other),
    }
}

/// JSON-facing form of a problem spec, using the polynomial text
/// grammar for every polynomial field.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpecFile {
    pub n: usize,
    #[serde(rename = "S1", default)]
    pub s1: Vec<String>,
    #[serde(rename = "S2", default)]
    pub s2: Vec<String>,
    #[serde(default)]
    pub rules: RuleSetFile,
    pub objective: String,
    pub sense: Sense,
    pub order: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<Cone>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub big_m: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<String>,
}

/// Resolves a textual mode selection plus auxiliary parameters.
pub fn parse_mode(
    mode: &str,
    perturbation: Option<PerturbKind>,
    big_m: Option<&str>,
    eps: Option<&str>,
    objective_is_pure: bool,
) -> Result<RelaxMode, RelaxError> {
    match mode {
        "membership" => Ok(RelaxMode::Membership),
        "dual" => Ok(RelaxMode::Dual),
        "eps_min" => {
            let kind = perturbation.unwrap_or(if objective_is_pure {
                PerturbKind::OnePlusPsi
            } else {
                PerturbKind::PhiPlusPsi
            });
            Ok(RelaxMode::EpsMin(kind))
        }
        "big_m" => {
            let m = big_m
                .map(|s| {
                    s.parse::<Rat>().map_err(|e| RelaxError::InvalidField {
                        field: "big_m".into(),
                        message: e.to_string(),
                    })
                })
                .transpose()?;
            Ok(RelaxMode::BigM(m))
        }
        "fixed_eps" => {
            let e = eps
                .ok_or_else(|| RelaxError::InvalidField {
                    field: "eps".into(),
                    message: "fixed_eps mode needs an eps value".into(),
                })?
                .parse::<Rat>()
                .map_err(|e| RelaxError::InvalidField {
                    field: "eps".into(),
                    message: e.to_string(),
                })?;
            Ok(RelaxMode::FixedEps(e))
        }
        other => Err(RelaxError::InvalidField {
            field: "mode".into(),
            message: format!("unknown mode {other:?}"),
        }),
    }
}

impl ProblemSpec {
    pub fn from_file(file: &SpecFile) -> Result<Self, RelaxError> {
        let n = file.n;
        let parse_all = |items: &[String]| -> Result<Vec<MomentPolynomial>, RelaxError> {
            items
                .iter()
                .map(|s| Ok(MomentPolynomial::parse(s, n)?))
                .collect()
        };
        let objective = MomentPolynomial::parse(&file.objective, n)?;
        let mode = file
            .mode
            .as_deref()
            .map(|m| {
                parse_mode(
                    m,
                    file.perturbation,
                    file.big_m.as_deref(),
                    file.eps.as_deref(),
                    objective.is_pure(),
                )
            })
            .transpose()?;
        let spec = ProblemSpec {
            n,
            s1: parse_all(&file.s1)?,
            s2: parse_all(&file.s2)?,
            objective,
            sense: file.sense,
            rules: file.rules.to_rules(n)?,
            order: file.order,
            cone: file.cone,
            mode,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_file(&self) -> SpecFile {
        let (mode, perturbation, big_m, eps) = match &self.mode {
            None => (None, None, None, None),
            Some(RelaxMode::Membership) => (Some("membership".into()), None, None, None),
            Some(RelaxMode::Dual) => (Some("dual".into()), None, None, None),
            Some(RelaxMode::EpsMin(k)) => (Some("eps_min".into()), Some(*k), None, None),
            Some(RelaxMode::BigM(m)) => (
                Some("big_m".into()),
                None,
                m.as_ref().map(|v| v.to_string()),
                None,
            ),
            Some(RelaxMode::FixedEps(e)) => {
                (Some("fixed_eps".into()), None, None, Some(e.to_string()))
            }
        };
        SpecFile {
            n: self.n,
            s1: self.s1.iter().map(|p| p.to_string()).collect(),
            s2: self.s2.iter().map(|p| p.to_string()).collect(),
            rules: RuleSetFile::from_rules(&self.rules),
            objective: self.objective.to_string(),
            sense: self.sense,
            order: self.order,
            cone: self.cone,
            mode,
            perturbation,
            big_m,
            eps,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, RelaxError> {
        let file: SpecFile = serde_json::from_str(text).map_err(|e| RelaxError::InvalidField {
            field: "json".into(),
            message: e.to_string(),
        })?;
        ProblemSpec::from_file(&file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("spec serializes")
    }
}

/// Evaluates an assembled bound's sign convention: internal objectives
/// negate Max problems, so e.g. a membership program for a Max spec
/// reports −α.
pub fn reported_bound(spec: &ProblemSpec, raw: f64) -> f64 {
    match spec.sense {
        Sense::Min => raw,
        Sense::Max => -raw,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::ToPrimitive;

    fn simple_spec(objective: MomentPolynomial, n: usize, order: u32) -> ProblemSpec {
        ProblemSpec {
            n,
            s1: Vec::new(),
            s2: Vec::new(),
            objective,
            sense: Sense::Min,
            rules: RuleSet::empty(n),
            order,
            cone: None,
            mode: None,
        }
    }

    #[test]
    fn qm_block_for_trivial_spec() {
        let f = MomentPolynomial::symbol(vec![2]).unwrap();
        let spec = simple_spec(f, 1, 1);
        let blocks = enumerate_generators(&spec, Cone::Qm).unwrap();
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].dim, 3);
        assert_eq!(blocks[0].basis, vec!["1", "x1", "m[1]"]);
        // Entry (x1, x1), at upper-triangular index 3, is 𝚖(x1²).
        assert_eq!(blocks[0].entries[3].to_string(), "m[2]");
    }

    #[test]
    fn phi_psi_small_cases() {
        let (phi1, psi1) = phi_psi(1, 1);
        let x1sq = MomentPolynomial::from_monomial(MomentMonomial::from_x(vec![2]), Rat::one());
        let expect_phi1 = MomentPolynomial::one(1).try_add(&x1sq).unwrap();
        assert!(phi1.try_sub(&expect_phi1).unwrap().is_zero());
        assert_eq!(psi1.to_string(), "m[2]");
        let (_, psi2) = phi_psi(1, 2);
        // Ψ₂ = 𝚖(x₁²) + ½𝚖(x₁²)² + ½𝚖(x₁⁴)
        let m2 = MomentPolynomial::symbol(vec![2]).unwrap();
        let m4 = MomentPolynomial::symbol(vec![4]).unwrap();
        let half = Rat::new(1.into(), 2.into());
        let expect = m2
            .try_add(&m2.pow(2).scale(&half))
            .unwrap()
            .try_add(&m4.scale(&half))
            .unwrap();
        assert!(psi2.try_sub(&expect).unwrap().is_zero());
        let (phi21, _) = phi_psi(2, 1);
        let mut expect = MomentPolynomial::constant(2, Rat::from_integer(2.into()));
        expect.add_term(MomentMonomial::from_x(vec![2, 0]), Rat::one());
        expect.add_term(MomentMonomial::from_x(vec![0, 2]), Rat::one());
        assert!(phi21.try_sub(&expect).unwrap().is_zero());
    }

    #[test]
    fn membership_row_structure() {
        // f = 𝚖₂ − 𝚖₁², no constraints, r = 1: rows match f − α against
        // the single Gram block over [1, x1, m1].
        let m2 = MomentPolynomial::symbol(vec![2]).unwrap();
        let m1 = MomentPolynomial::symbol(vec![1]).unwrap();
        let f = m2.try_sub(&m1.pow(2)).unwrap();
        let spec = simple_spec(f, 1, 1);
        let p = build_membership_sdp(&spec, Cone::Qm).unwrap();
        assert_eq!(p.blocks.len(), 1);
        assert_eq!(p.blocks[0].dim, 3);
        assert_eq!(p.scalar_vars, vec!["alpha"]);
        // The constant row carries the free scalar with coefficient 1.
        let one_row = p.rows.iter().find(|r| r.label == "1").unwrap();
        assert!(one_row.free[0].is_one());
        let report = p.size_report();
        assert_eq!(report.block_dims, vec![3]);
        assert_eq!(report.free_scalars, 1);
    }

    #[test]
    fn spec_json_round_trip() {
        let m2 = MomentPolynomial::symbol(vec![2, 0]).unwrap();
        let m02 = MomentPolynomial::symbol(vec![0, 2]).unwrap();
        let spec = ProblemSpec {
            n: 2,
            s1: Vec::new(),
            s2: Vec::new(),
            objective: m2.try_mul(&m02).unwrap(),
            sense: Sense::Min,
            rules: RuleSet::empty(2),
            order: 2,
            cone: Some(Cone::Qm),
            mode: Some(RelaxMode::EpsMin(PerturbKind::OnePlusPsi)),
        };
        let text = spec.to_json();
        let back = ProblemSpec::from_json(&text).unwrap();
        assert_eq!(back.n, 2);
        assert_eq!(back.order, 2);
        assert_eq!(back.cone, Some(Cone::Qm));
        assert_eq!(back.mode, Some(RelaxMode::EpsMin(PerturbKind::OnePlusPsi)));
        assert!(back
            .objective
            .try_sub(&spec.objective)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn variance_membership_bound_is_zero() {
        // f = 𝚖₂ − 𝚖₁² at r = 1: max α = 0, attained by Dirac measures.
        let m2 = MomentPolynomial::symbol(vec![2]).unwrap();
        let m1 = MomentPolynomial::symbol(vec![1]).unwrap();
        let f = m2.try_sub(&m1.pow(2)).unwrap();
        let spec = simple_spec(f, 1, 1);
        let p = build_membership_sdp(&spec, Cone::Qm).unwrap();
        let sol = crate::sdp::ipm::solve_ipm(&p, 1e-8, 100);
        assert_eq!(sol.status, crate::sdp::SolveStatus::Optimal);
        assert!(sol.objective.abs() < 1e-6, "bound {}", sol.objective);
    }

    #[test]
    fn second_moment_on_interval_bound_is_zero() {
        // f = 𝚖₂ with S1 = {1 − x₁²} at r = 1: infimum 0 at δ₀.
        let m2 = MomentPolynomial::symbol(vec![2]).unwrap();
        let mut spec = simple_spec(m2, 1, 1);
        let x1sq = MomentPolynomial::from_monomial(MomentMonomial::from_x(vec![2]), Rat::one());
        spec.s1 = vec![MomentPolynomial::one(1).try_sub(&x1sq).unwrap()];
        let p = build_membership_sdp(&spec, Cone::Qm).unwrap();
        let sol = crate::sdp::ipm::solve_ipm(&p, 1e-8, 100);
        assert_eq!(sol.status, crate::sdp::SolveStatus::Optimal);
        assert!(sol.objective.abs() < 1e-6, "bound {}", sol.objective);
    }

    #[test]
    fn product_eps_min_on_quadrant() {
        // Smallest ε with 𝚖(x₁x₂) + ε𝚖(Φ₁) ∈ qm({x₁,x₂},∅) at r = 1: 0.5,
        // attained via 𝚖(x₁x₂) + ½𝚖(Φ₁) = 𝚖(½(x₁+x₂)² + 1).
        let f = MomentPolynomial::symbol(vec![1, 1]).unwrap();
        let mut spec = simple_spec(f, 2, 1);
        spec.s1 = vec![
            MomentPolynomial::var(2, 1).unwrap(),
            MomentPolynomial::var(2, 2).unwrap(),
        ];
        spec.mode = Some(RelaxMode::EpsMin(PerturbKind::MomentPhi));
        let p = build_perturbed_sdp(&spec, &RelaxMode::EpsMin(PerturbKind::MomentPhi)).unwrap();
        let sol = crate::sdp::ipm::solve_ipm(&p, 1e-8, 100);
        assert_eq!(sol.status, crate::sdp::SolveStatus::Optimal);
        assert!(
            (sol.objective - 0.5).abs() < 1e-4,
            "eps {} after {} iterations",
            sol.objective,
            sol.iterations
        );
    }

    #[test]
    fn unconstrained_product_eps_threshold() {
        // Without sign constraints the order-2 threshold for
        // 𝚖(x₁x₂) + ε𝚖(Φ₂) is (√2 − 1)/2, the pointwise optimum of
        // u / (u² + 2u + 2) over Dirac measures at (t, −t).
        let f = MomentPolynomial::symbol(vec![1, 1]).unwrap();
        let mut spec = simple_spec(f, 2, 2);
        spec.mode = Some(RelaxMode::EpsMin(PerturbKind::MomentPhi));
        let p = build_perturbed_sdp(&spec, &RelaxMode::EpsMin(PerturbKind::MomentPhi)).unwrap();
        let sol = crate::sdp::ipm::solve_ipm(&p, 1e-8, 100);
        assert_eq!(sol.status, crate::sdp::SolveStatus::Optimal);
        let expected = (2.0_f64.sqrt() - 1.0) / 2.0;
        assert!(
            (sol.objective - expected).abs() < 1e-6,
            "eps {} vs {}",
            sol.objective,
            expected
        );
    }

    #[test]
    fn pure_product_eps_min_order_two() {
        // Smallest ε with 𝚖₂₀𝚖₀₂ + ε(1 + Ψ₂) ∈ qm(∅,∅) at r = 2: 1/3.
        let m20 = MomentPolynomial::symbol(vec![2, 0]).unwrap();
        let m02 = MomentPolynomial::symbol(vec![0, 2]).unwrap();
        let f = m20.try_mul(&m02).unwrap();
        let mut spec = simple_spec(f, 2, 2);
        spec.mode = Some(RelaxMode::EpsMin(PerturbKind::OnePlusPsi));
        let p = build_perturbed_sdp(&spec, &RelaxMode::EpsMin(PerturbKind::OnePlusPsi)).unwrap();
        let sol = crate::sdp::ipm::solve_ipm(&p, 1e-8, 100);
        assert_eq!(sol.status, crate::sdp::SolveStatus::Optimal);
        assert!(
            (sol.objective - 1.0 / 3.0).abs() < 1e-4,
            "eps {}",
            sol.objective
        );
    }

    #[test]
    fn default_big_m_scales_with_coefficients() {
        let f = MomentPolynomial::symbol(vec![2]).unwrap().scale(&Rat::from_integer(3.into()));
        let m = default_big_m(1, &f);
        assert!(m.to_f64().unwrap() > 4.0 * 10.0);
    }
}
