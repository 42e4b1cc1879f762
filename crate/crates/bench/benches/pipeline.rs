//! Benchmarks of the main pipeline stages: parsing and reduction,
//! relaxation assembly, the interior-point solver, and exact
//! certificate verification.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use mompoly::algebra::{MomentPolynomial, RuleSet};
use mompoly::catalog;
use mompoly::certificates::{holder_certificate, verify_gram_certificate};
use mompoly::relaxation::{build, PerturbKind, ProblemSpec, RelaxMode, Sense};
use mompoly::sdp::ipm::solve_ipm;

fn quadrant_spec(order: u32) -> ProblemSpec {
    ProblemSpec {
        n: 2,
        s1: vec![
            MomentPolynomial::var(2, 1).unwrap(),
            MomentPolynomial::var(2, 2).unwrap(),
        ],
        s2: Vec::new(),
        objective: MomentPolynomial::symbol(vec![1, 1]).unwrap(),
        sense: Sense::Min,
        rules: RuleSet::empty(2),
        order,
        cone: None,
        mode: Some(RelaxMode::EpsMin(PerturbKind::MomentPhi)),
    }
}

fn bench_parse_and_reduce(c: &mut Criterion) {
    let rules = RuleSet::hypercube(3);
    let text = "2*x1^2*x2*m[1,0,2]^2 - 1/3*x3^4*m[2,2,0] + x1*x2*x3 - 5/7*m[1,1,1]^3";
    c.bench_function("parse_poly", |b| {
        b.iter(|| MomentPolynomial::parse(black_box(text), 3).unwrap())
    });
    let poly = MomentPolynomial::parse(text, 3).unwrap();
    c.bench_function("reduce_hypercube", |b| {
        b.iter(|| rules.reduce(black_box(&poly)).unwrap())
    });
}

fn bench_assembly(c: &mut Criterion) {
    let spec = quadrant_spec(2);
    c.bench_function("assemble_eps_min_order2", |b| {
        b.iter(|| build(black_box(&spec), None).unwrap())
    });
    let cov = ProblemSpec {
        n: 6,
        s1: Vec::new(),
        s2: Vec::new(),
        objective: catalog::cov3322_objective(),
        sense: Sense::Max,
        rules: catalog::cov3322_rules(),
        order: 2,
        cone: None,
        mode: Some(RelaxMode::Membership),
    };
    c.bench_function("assemble_covariance_membership", |b| {
        b.iter(|| build(black_box(&cov), None).unwrap())
    });
}

fn bench_solve(c: &mut Criterion) {
    let p = build(&quadrant_spec(1), None).unwrap();
    c.bench_function("solve_eps_min_order1", |b| {
        b.iter(|| solve_ipm(black_box(&p), 1e-8, 100))
    });
}

fn bench_verify(c: &mut Criterion) {
    let (target, cert) = holder_certificate(8);
    c.bench_function("verify_power_mean_certificate", |b| {
        b.iter(|| verify_gram_certificate(black_box(&target), black_box(&cert)).unwrap())
    });
    let (cov_target, cov_cert) = catalog::cov3322_certificate();
    c.bench_function("verify_covariance_certificate", |b| {
        b.iter(|| verify_gram_certificate(black_box(&cov_target), black_box(&cov_cert)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_parse_and_reduce,
    bench_assembly,
    bench_solve,
    bench_verify
);
criterion_main!(benches);
