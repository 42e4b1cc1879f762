//! Command-line frontend: builds and solves moment polynomial
//! relaxations, verifies exact certificates, runs the shipped example
//! scenarios, rewrites programs over finitely supported measures, and
//! exposes Hankel/pseudo-moment utilities.
//!
//! Reports are JSON on stdout (`--pretty` for a human-readable view,
//! `--out` for a file copy). Exit codes: 0 success, 2 invalid problem
//! spec, 3 solver failure, 4 invalid certificate.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mompoly::algebra::{MomentPolynomial, Rat};
use num::Zero;
use mompoly::certificates::{
    adhoc_certificate, bilocal_identities_check, holder_certificate, holder_multivariate,
    verify_gram_certificate, CertificateFile, GramCertificate, VerifyOutcome,
};
use mompoly::linalg::PsdStatus;
use mompoly::measures::eval_random_vars;
use mompoly::measures::tchakaloff_reformulate;
use mompoly::pseudo_moments::{
    extend_functional, h17_counterexample_report, hankel_apply, perturb_functional,
    symbolic_hankel, FunctionalFile, TruncatedFunctional,
};
use mompoly::relaxation::{build, parse_mode, Cone, PerturbKind, ProblemSpec, RelaxMode, Sense};
use mompoly::sdp::ipm::solve_ipm;
use mompoly::sdp::sdpa::write_sdpa;
use mompoly::sdp::{recompute_residuals, SdpProblem, SdpSolution, SolveStatus};
use mompoly::catalog;

const EXIT_INVALID_SPEC: u8 = 2;
const EXIT_SOLVER_FAILURE: u8 = 3;
const EXIT_INVALID_CERTIFICATE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "mompoly",
    version,
    about = "Optimization and positivity certification for moment polynomials"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Print a human-readable summary instead of raw JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Also write the JSON report to this path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the relaxation a problem spec asks for and solve it.
    Solve(SolveArgs),
    /// Verify a certificate file or a generated built-in family.
    Verify(VerifyArgs),
    /// Run a named end-to-end example scenario.
    Examples(ExamplesArgs),
    /// Rewrite a program over measures as a classical polynomial program.
    Reformulate(ReformulateArgs),
    /// Hankel matrix and pseudo-moment functional utilities.
    Hankel(HankelArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Problem spec JSON file.
    spec: PathBuf,
    /// Override the relaxation order from the spec.
    #[arg(long)]
    order: Option<u32>,
    /// Override the cone: qm or QQM.
    #[arg(long)]
    cone: Option<String>,
    /// Override the mode: membership, dual, eps_min, big_m, fixed_eps.
    #[arg(long)]
    mode: Option<String>,
    /// Perturbation for eps_min: phi_plus_psi, one_plus_psi, moment_phi.
    #[arg(long)]
    perturbation: Option<String>,
    /// Bound constant for big_m mode (rational, e.g. 100 or 201/2).
    #[arg(long)]
    big_m: Option<String>,
    /// Perturbation size for fixed_eps mode (rational).
    #[arg(long)]
    eps: Option<String>,
    /// Backend: ipm (embedded solver) or sdpa-export. The MOMPOLY_SOLVER
    /// environment variable overrides this flag.
    #[arg(long, default_value = "ipm")]
    solver: String,
    /// Run the hierarchy over an order range, e.g. 1..4 (inclusive), and
    /// check the bounds are monotone.
    #[arg(long)]
    sweep: Option<String>,
    /// Worker pool size for sweeps.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Solver tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Solver iteration cap.
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Output path for --solver sdpa-export (defaults to the spec path
    /// with a .dat-s extension).
    #[arg(long)]
    export: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Certificate JSON path, or one of the built-in families
    /// `holder` / `adhoc`.
    target: String,
    /// Power for the built-in families (m[2k] - m[1]^2k).
    #[arg(long, default_value_t = 5)]
    k: u32,
    /// Comma-separated exponent vector for the multivariate families,
    /// e.g. 1,2,0.
    #[arg(long)]
    i: Option<String>,
}

#[derive(Args)]
struct ExamplesArgs {
    /// One of: cov3322, bilocal, h17, holder, adhoc.
    name: String,
    /// Also run the minutes-scale computations (bilocal dual bound).
    #[arg(long)]
    heavy: bool,
    /// Solver tolerance for the heavy computations.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args)]
struct ReformulateArgs {
    /// Problem spec JSON file.
    spec: PathBuf,
}

#[derive(Args)]
struct HankelArgs {
    #[command(subcommand)]
    action: HankelAction,
}

#[derive(Subcommand)]
enum HankelAction {
    /// Print the symbolic Hankel matrix of order d over n variables.
    Symbolic {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: u32,
    },
    /// Evaluate the Hankel matrix of a functional file and check it for
    /// positive semidefiniteness exactly.
    Apply {
        functional: PathBuf,
        #[arg(long)]
        d: u32,
    },
    /// Extend a functional by one Hankel order, keeping the matrix
    /// exactly positive definite.
    Extend {
        functional: PathBuf,
        /// Write the extended functional to this path.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Mix a functional with the uniform box moments: (1-delta) L + delta L0.
    Perturb {
        functional: PathBuf,
        /// Mixing weight in [0,1] (rational).
        #[arg(long)]
        delta: String,
    },
}

#[derive(Serialize, Default)]
struct RunReport {
    command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    sizes: Option<Sizes>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    status: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residuals: Option<Residuals>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<Vec<SweepEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    export_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    details: Option<serde_json::Value>,
    wall_time_ms: f64,
}

#[derive(Serialize)]
struct Sizes {
    rows: usize,
    block_dims: Vec<usize>,
    free_scalars: usize,
    affine_unknowns: i64,
}

#[derive(Serialize)]
struct Residuals {
    gram_equality: f64,
    moment_psd: f64,
    gram_psd: f64,
    gap: f64,
}

#[derive(Serialize)]
struct SweepEntry {
    order: u32,
    bound: f64,
    status: String,
    iterations: usize,
}

/// An error paired with the process exit code it maps to.
struct CmdError {
    code: u8,
    message: String,
}

impl CmdError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CmdError {
            code,
            message: message.into(),
        }
    }
}

type CmdResult = Result<RunReport, CmdError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = match &cli.command {
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Examples(args) => cmd_examples(args),
        Cmd::Reformulate(args) => cmd_reformulate(args),
        Cmd::Hankel(args) => cmd_hankel(args),
    };
    match result {
        Ok(mut report) => {
            report.wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
            emit(&cli, &report);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn emit(cli: &Cli, report: &RunReport) {
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, format!("{json}\n")) {
            eprintln!("warning: could not write {}: {e}", path.display());
        }
    }
    if cli.pretty {
        print_pretty(report);
    } else {
        println!("{json}");
    }
}

fn print_pretty(report: &RunReport) {
    println!("command    {}", report.command);
    if let Some(s) = &report.sizes {
        println!(
            "sizes      rows={} blocks={:?} free={} unknowns={}",
            s.rows, s.block_dims, s.free_scalars, s.affine_unknowns
        );
    }
    if let Some(b) = report.bound {
        println!("bound      {b:.9}");
    }
    if let Some(s) = &report.status {
        println!("status     {s}");
    }
    if let Some(r) = &report.residuals {
        println!(
            "residuals  equality={:.3e} moment_psd={:.3e} gram_psd={:.3e} gap={:.3e}",
            r.gram_equality, r.moment_psd, r.gram_psd, r.gap
        );
    }
    if let Some(entries) = &report.sweep {
        for e in entries {
            println!(
                "order {:2}   bound={:.9} status={} iterations={}",
                e.order, e.bound, e.status, e.iterations
            );
        }
    }
    if let Some(v) = &report.verdict {
        println!("verdict    {v}");
    }
    if let Some(p) = &report.export_path {
        println!("export     {p}");
    }
    if let Some(d) = &report.details {
        println!("details    {d}");
    }
    println!("wall_time  {:.1} ms", report.wall_time_ms);
}

fn invalid_spec(message: impl std::fmt::Display) -> CmdError {
    CmdError::new(EXIT_INVALID_SPEC, format!("invalid spec: {message}"))
}

fn solver_failure(message: impl std::fmt::Display) -> CmdError {
    CmdError::new(EXIT_SOLVER_FAILURE, format!("solver failure: {message}"))
}

fn invalid_certificate(message: impl std::fmt::Display) -> CmdError {
    CmdError::new(
        EXIT_INVALID_CERTIFICATE,
        format!("invalid certificate: {message}"),
    )
}

fn load_spec(args: &SolveArgs) -> Result<ProblemSpec, CmdError> {
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| invalid_spec(format!("{}: {e}", args.spec.display())))?;
    let mut spec = ProblemSpec::from_json(&text).map_err(invalid_spec)?;
    if let Some(order) = args.order {
        spec.order = order;
    }
    if let Some(cone) = &args.cone {
        spec.cone = Some(match cone.as_str() {
            "qm" => Cone::Qm,
            "QQM" => Cone::QQm,
            other => return Err(invalid_spec(format!("unknown cone {other:?}"))),
        });
    }
    if let Some(mode) = &args.mode {
        let perturbation = match args.perturbation.as_deref() {
            None => None,
            Some("phi_plus_psi") => Some(PerturbKind::PhiPlusPsi),
            Some("one_plus_psi") => Some(PerturbKind::OnePlusPsi),
            Some("moment_phi") => Some(PerturbKind::MomentPhi),
            Some(other) => return Err(invalid_spec(format!("unknown perturbation {other:?}"))),
        };
        spec.mode = Some(
            parse_mode(
                mode,
                perturbation,
                args.big_m.as_deref(),
                args.eps.as_deref(),
                spec.objective.is_pure(),
            )
            .map_err(invalid_spec)?,
        );
    }
    spec.validate().map_err(invalid_spec)?;
    Ok(spec)
}

fn sizes_of(p: &SdpProblem) -> Sizes {
    let rep = p.size_report();
    Sizes {
        rows: rep.rows,
        block_dims: rep.block_dims,
        free_scalars: rep.free_scalars,
        affine_unknowns: rep.affine_unknowns,
    }
}

fn residuals_of(p: &SdpProblem, sol: &SdpSolution) -> Residuals {
    let r = recompute_residuals(p, sol);
    Residuals {
        gram_equality: r.gram_equality,
        moment_psd: r.moment_psd,
        gram_psd: r.gram_psd,
        gap: r.gap,
    }
}

fn status_name(status: SolveStatus) -> String {
    format!("{status:?}")
}

fn solve_one(
    spec: &ProblemSpec,
    tol: f64,
    max_iter: usize,
) -> Result<(SdpProblem, SdpSolution), CmdError> {
    let p = build(spec, None).map_err(invalid_spec)?;
    let sol = solve_ipm(&p, tol, max_iter);
    Ok((p, sol))
}

fn cmd_solve(args: &SolveArgs) -> CmdResult {
    let spec = load_spec(args)?;
    let solver = std::env::var("MOMPOLY_SOLVER").unwrap_or_else(|_| args.solver.clone());

    if let Some(range) = &args.sweep {
        return cmd_sweep(args, &spec, range);
    }

    match solver.as_str() {
        "sdpa-export" => {
            let p = build(&spec, None).map_err(invalid_spec)?;
            let path = args
                .export
                .clone()
                .unwrap_or_else(|| args.spec.with_extension("dat-s"));
            write_sdpa(&p, &path).map_err(|e| solver_failure(format!("export: {e}")))?;
            Ok(RunReport {
                command: format!("solve {}", args.spec.display()),
                sizes: Some(sizes_of(&p)),
                status: Some("Exported".into()),
                export_path: Some(path.display().to_string()),
                ..Default::default()
            })
        }
        "ipm" => {
            let (p, sol) = solve_one(&spec, args.tol, args.max_iter)?;
            let report = RunReport {
                command: format!("solve {}", args.spec.display()),
                sizes: Some(sizes_of(&p)),
                bound: Some(sol.objective),
                status: Some(status_name(sol.status)),
                residuals: Some(residuals_of(&p, &sol)),
                ..Default::default()
            };
            if sol.status != SolveStatus::Optimal {
                // Surface the partial report before failing.
                let json = serde_json::to_string_pretty(&report).expect("report serializes");
                println!("{json}");
                return Err(solver_failure(format!(
                    "status {} after {} iterations",
                    status_name(sol.status),
                    sol.iterations
                )));
            }
            Ok(report)
        }
        other => Err(solver_failure(format!("unknown solver {other:?}"))),
    }
}

fn cmd_sweep(args: &SolveArgs, spec: &ProblemSpec, range: &str) -> CmdResult {
    let (lo, hi) = range
        .split_once("..")
        .and_then(|(a, b)| Some((a.parse::<u32>().ok()?, b.parse::<u32>().ok()?)))
        .filter(|(a, b)| a <= b)
        .ok_or_else(|| invalid_spec(format!("bad sweep range {range:?} (expected r1..r2)")))?;
    let orders: Vec<u32> = (lo..=hi).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .map_err(|e| solver_failure(format!("worker pool: {e}")))?;
    let results: Vec<Result<(u32, SdpSolution), CmdError>> = pool.install(|| {
        use rayon::prelude::*;
        orders
            .par_iter()
            .map(|&order| {
                let mut s = spec.clone();
                s.order = order;
                let (_, sol) = solve_one(&s, args.tol, args.max_iter)?;
                Ok((order, sol))
            })
            .collect()
    });

    let mut entries = Vec::with_capacity(results.len());
    for r in results {
        let (order, sol) = r?;
        if sol.status != SolveStatus::Optimal {
            return Err(solver_failure(format!(
                "order {order}: status {}",
                status_name(sol.status)
            )));
        }
        entries.push(SweepEntry {
            order,
            bound: sol.objective,
            status: status_name(sol.status),
            iterations: sol.iterations,
        });
    }

    // The hierarchy tightens with the order: eps_min values shrink, Min
    // bounds rise, Max bounds fall.
    let shrinking = match (&spec.mode, spec.sense) {
        (Some(RelaxMode::EpsMin(_)), _) => true,
        (_, Sense::Max) => true,
        (_, Sense::Min) => false,
    };
    let slack = 1e-6;
    for w in entries.windows(2) {
        let ok = if shrinking {
            w[1].bound <= w[0].bound + slack
        } else {
            w[1].bound >= w[0].bound - slack
        };
        if !ok {
            return Err(solver_failure(format!(
                "hierarchy not monotone: order {} gave {}, order {} gave {}",
                w[0].order, w[0].bound, w[1].order, w[1].bound
            )));
        }
    }

    Ok(RunReport {
        command: format!("solve {} --sweep {range}", args.spec.display()),
        sweep: Some(entries),
        status: Some("Optimal".into()),
        ..Default::default()
    })
}

fn parse_exponents(text: &str) -> Result<Vec<u32>, CmdError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|e| invalid_certificate(format!("bad exponent {t:?}: {e}")))
        })
        .collect()
}

fn verify_pair(
    label: &str,
    target: &MomentPolynomial,
    cert: &GramCertificate,
) -> Result<(), CmdError> {
    let outcome = verify_gram_certificate(target, cert)
        .map_err(|e| invalid_certificate(format!("{label}: {e}")))?;
    match outcome {
        VerifyOutcome::Valid => Ok(()),
        VerifyOutcome::NotPsd { block, .. } => Err(invalid_certificate(format!(
            "{label}: Gram block {block} is not positive semidefinite"
        ))),
        VerifyOutcome::NonzeroResidual { residual } => Err(invalid_certificate(format!(
            "{label}: nonzero residual {residual}"
        ))),
    }
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    match args.target.as_str() {
        "holder" => {
            let (target, cert) = match &args.i {
                None => holder_certificate(args.k),
                Some(i) => {
                    let exps = parse_exponents(i)?;
                    holder_multivariate(args.k, &exps)
                        .map_err(|e| invalid_certificate(e.to_string()))?
                }
            };
            verify_pair("holder", &target, &cert)?;
            Ok(RunReport {
                command: format!("verify holder --k {}", args.k),
                verdict: Some("Valid".into()),
                ..Default::default()
            })
        }
        "adhoc" => {
            let exps = match &args.i {
                Some(i) => parse_exponents(i)?,
                None => vec![1, 1],
            };
            let (target, cert) =
                adhoc_certificate(&exps).map_err(|e| invalid_certificate(e.to_string()))?;
            verify_pair("adhoc", &target, &cert)?;
            Ok(RunReport {
                command: format!("verify adhoc --i {exps:?}"),
                verdict: Some("Valid".into()),
                ..Default::default()
            })
        }
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| invalid_certificate(format!("{path}: {e}")))?;
            let file: CertificateFile = serde_json::from_str(&text)
                .map_err(|e| invalid_certificate(format!("{path}: {e}")))?;
            let (target, cert) = file
                .to_certificate()
                .map_err(|e| invalid_certificate(format!("{path}: {e}")))?;
            verify_pair(path, &target, &cert)?;
            Ok(RunReport {
                command: format!("verify {path}"),
                verdict: Some("Valid".into()),
                ..Default::default()
            })
        }
    }
}

fn cmd_examples(args: &ExamplesArgs) -> CmdResult {
    match args.name.as_str() {
        "cov3322" => {
            let (target, cert) = catalog::cov3322_certificate();
            verify_pair("cov3322", &target, &cert)?;
            Ok(RunReport {
                command: "examples cov3322".into(),
                verdict: Some("Valid".into()),
                details: Some(serde_json::json!({
                    "bound": catalog::cov3322_bound().to_string(),
                })),
                ..Default::default()
            })
        }
        "bilocal" => {
            let residuals = bilocal_identities_check()
                .map_err(|e| invalid_certificate(format!("identities: {e}")))?;
            let all_zero = residuals.iter().all(|r| r.is_zero());
            if !all_zero {
                return Err(invalid_certificate("identity residuals do not vanish"));
            }
            let space = catalog::bilocal_space()
                .map_err(|e| invalid_certificate(format!("space: {e}")))?;
            let names: Vec<String> = (1..=9).map(|j| format!("x{j}")).collect();
            let values = eval_random_vars(&catalog::bilocal_objective(), &space, &names)
                .map_err(|e| invalid_certificate(format!("attainment: {e}")))?;
            let attained = values.first().cloned().unwrap_or_else(Rat::zero);
            if values.iter().any(|v| v != &attained) || attained != catalog::bilocal_bound() {
                return Err(invalid_certificate(format!(
                    "attainment value {attained} differs from {}",
                    catalog::bilocal_bound()
                )));
            }
            let mut report = RunReport {
                command: "examples bilocal".into(),
                verdict: Some("Valid".into()),
                details: Some(serde_json::json!({
                    "identities_residual": "0",
                    "attainment": attained.to_string(),
                })),
                ..Default::default()
            };
            if args.heavy {
                let spec = ProblemSpec {
                    n: 9,
                    s1: Vec::new(),
                    s2: Vec::new(),
                    objective: catalog::bilocal_objective(),
                    sense: Sense::Max,
                    rules: catalog::bilocal_rules()
                        .map_err(|e| invalid_certificate(format!("rules: {e}")))?,
                    order: 3,
                    cone: None,
                    mode: Some(RelaxMode::Dual),
                };
                let (p, sol) = solve_one(&spec, args.tol, 200)?;
                if sol.status != SolveStatus::Optimal {
                    return Err(solver_failure(format!(
                        "bilocal dual: status {}",
                        status_name(sol.status)
                    )));
                }
                report.sizes = Some(sizes_of(&p));
                report.bound = Some(sol.objective);
                report.status = Some(status_name(sol.status));
                report.residuals = Some(residuals_of(&p, &sol));
            }
            Ok(report)
        }
        "h17" => {
            let r = h17_counterexample_report()
                .map_err(|e| invalid_certificate(format!("h17: {e}")))?;
            let pd = matches!(r.hankel_status, PsdStatus::PositiveDefinite);
            if !pd {
                return Err(invalid_certificate("Hankel matrix is not positive definite"));
            }
            Ok(RunReport {
                command: "examples h17".into(),
                verdict: Some("Valid".into()),
                details: Some(serde_json::json!({
                    "hankel_positive_definite": true,
                    "witness": r.witness_polynomial.to_string(),
                    "pseudo_value": r.pseudo_value.to_string(),
                })),
                ..Default::default()
            })
        }
        "holder" => {
            for k in 0..=10 {
                let (target, cert) = holder_certificate(k);
                verify_pair(&format!("holder k={k}"), &target, &cert)?;
            }
            for (k, i) in [(2u32, vec![1u32, 2]), (3, vec![2, 0, 1])] {
                let (target, cert) = holder_multivariate(k, &i)
                    .map_err(|e| invalid_certificate(e.to_string()))?;
                verify_pair(&format!("holder k={k} i={i:?}"), &target, &cert)?;
            }
            Ok(RunReport {
                command: "examples holder".into(),
                verdict: Some("Valid".into()),
                ..Default::default()
            })
        }
        "adhoc" => {
            for exps in [vec![1u32], vec![2], vec![1, 1], vec![2, 1], vec![1, 1, 2], vec![2, 2, 1, 1]] {
                let (target, cert) =
                    adhoc_certificate(&exps).map_err(|e| invalid_certificate(e.to_string()))?;
                verify_pair(&format!("adhoc i={exps:?}"), &target, &cert)?;
            }
            Ok(RunReport {
                command: "examples adhoc".into(),
                verdict: Some("Valid".into()),
                ..Default::default()
            })
        }
        other => Err(CmdError::new(
            EXIT_INVALID_SPEC,
            format!("unknown example {other:?} (expected cov3322, bilocal, h17, holder, adhoc)"),
        )),
    }
}

fn cmd_reformulate(args: &ReformulateArgs) -> CmdResult {
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| invalid_spec(format!("{}: {e}", args.spec.display())))?;
    let spec = ProblemSpec::from_json(&text).map_err(invalid_spec)?;
    let program = tchakaloff_reformulate(&spec.s1, &spec.s2, &spec.objective)
        .map_err(|e| invalid_spec(format!("reformulate: {e}")))?;
    Ok(RunReport {
        command: format!("reformulate {}", args.spec.display()),
        details: Some(serde_json::json!({
            "n": program.n,
            "degree": program.degree,
            "num_atoms": program.num_atoms,
            "num_vars": program.num_vars,
            "variable_names": program.variable_names,
            "objective": program.objective.to_string(),
            "inequalities": program.inequalities.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "equalities": program.equalities.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        })),
        ..Default::default()
    })
}

fn load_functional(path: &Path) -> Result<TruncatedFunctional, CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid_spec(format!("{}: {e}", path.display())))?;
    let file: FunctionalFile = serde_json::from_str(&text)
        .map_err(|e| invalid_spec(format!("{}: {e}", path.display())))?;
    file.to_functional()
        .map_err(|e| invalid_spec(format!("{}: {e}", path.display())))
}

fn psd_status_json(status: &PsdStatus) -> serde_json::Value {
    match status {
        PsdStatus::PositiveDefinite => serde_json::json!({"status": "positive_definite"}),
        PsdStatus::PositiveSemidefinite { rank } => {
            serde_json::json!({"status": "positive_semidefinite", "rank": rank})
        }
        PsdStatus::NotPsd { witness } => serde_json::json!({
            "status": "not_psd",
            "witness": witness.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
        }),
    }
}

fn cmd_hankel(args: &HankelArgs) -> CmdResult {
    match &args.action {
        HankelAction::Symbolic { n, d } => {
            let h = symbolic_hankel(*n, *d).map_err(|e| invalid_spec(e.to_string()))?;
            Ok(RunReport {
                command: format!("hankel symbolic --n {n} --d {d}"),
                details: Some(serde_json::json!({
                    "basis": h.basis.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                    "entries": h
                        .entries
                        .iter()
                        .map(|row| row.iter().map(|p| p.to_string()).collect::<Vec<_>>())
                        .collect::<Vec<_>>(),
                })),
                ..Default::default()
            })
        }
        HankelAction::Apply { functional, d } => {
            let l = load_functional(functional)?;
            let (basis, h) =
                hankel_apply(&l, *d).map_err(|e| invalid_spec(e.to_string()))?;
            let status = mompoly::linalg::exact_psd_check(&h)
                .map_err(|e| invalid_spec(e.to_string()))?;
            Ok(RunReport {
                command: format!("hankel apply {} --d {d}", functional.display()),
                details: Some(serde_json::json!({
                    "basis": basis.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                    "entries": h
                        .iter()
                        .map(|row| row.iter().map(|v| v.to_string()).collect::<Vec<_>>())
                        .collect::<Vec<_>>(),
                    "psd": psd_status_json(&status),
                })),
                ..Default::default()
            })
        }
        HankelAction::Extend { functional, save } => {
            let l = load_functional(functional)?;
            let extended =
                extend_functional(&l).map_err(|e| invalid_spec(e.to_string()))?;
            let file = FunctionalFile::from_functional(&extended);
            if let Some(path) = save {
                let json = serde_json::to_string_pretty(&file).expect("functional serializes");
                std::fs::write(path, format!("{json}\n"))
                    .map_err(|e| invalid_spec(format!("{}: {e}", path.display())))?;
            }
            Ok(RunReport {
                command: format!("hankel extend {}", functional.display()),
                details: Some(serde_json::json!({
                    "max_degree": extended.max_degree(),
                    "functional": serde_json::to_value(&file).expect("functional serializes"),
                })),
                ..Default::default()
            })
        }
        HankelAction::Perturb { functional, delta } => {
            let l = load_functional(functional)?;
            let delta: Rat = delta
                .parse()
                .map_err(|e| invalid_spec(format!("bad delta: {e}")))?;
            let mixed =
                perturb_functional(&l, &delta).map_err(|e| invalid_spec(e.to_string()))?;
            let file = FunctionalFile::from_functional(&mixed);
            Ok(RunReport {
                command: format!("hankel perturb {}", functional.display()),
                details: Some(
                    serde_json::to_value(&file).expect("functional serializes"),
                ),
                ..Default::default()
            })
        }
    }
}
