//! Exact-rational toolkit for moment polynomials: polynomials in variables
//! x₁…xₙ together with formal moment symbols m[i₁,…,iₙ].
//!
//! The crate provides the symbolic algebra (arithmetic, the formal moment
//! map, rule-based reduction), evaluation against finitely supported
//! measures, exact Gram certificates of positivity, symbolic Hankel
//! matrices with pseudo-moment functionals, assembly of semidefinite
//! relaxations for moment polynomial optimization, and a dense
//! interior-point solver with SDPA sparse-format export.

pub mod algebra;
pub mod catalog;
pub mod certificates;
pub mod linalg;
pub mod measures;
pub mod pseudo_moments;
pub mod relaxation;
pub mod sdp;


pub use algebra::{
    mono_mul, monomial_basis, poly_mul, AlgebraError, MomentMonomial, MomentPolynomial,
    MomentRule, MomentSymbol, Rat, RuleSet, XRule,
};
pub use certificates::{BlockTag, CertBlock, GramCertificate, VerifyOutcome};
pub use linalg::PsdStatus;
pub use measures::{FiniteMeasure, FiniteProbabilitySpace};
pub use pseudo_moments::TruncatedFunctional;
pub use relaxation::{Cone, PerturbKind, ProblemSpec, RelaxMode, Sense};
pub use sdp::{SdpProblem, SdpSolution, SolveStatus};

