use mompoly::algebra::{MomentPolynomial, RuleSet};
use mompoly::catalog;
use mompoly::certificates::CertificateFile;
use mompoly::relaxation::*;

fn write(path: &str, text: String) {
    std::fs::write(path, text + "\n").unwrap();
    println!("wrote {path}");
}

fn main() {
    std::fs::create_dir_all("data").unwrap();

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
    write("data/cov3322.json", cov.to_json());

    let bilocal = ProblemSpec {
        n: 9,
        s1: Vec::new(),
        s2: Vec::new(),
        objective: catalog::bilocal_objective(),
        sense: Sense::Max,
        rules: catalog::bilocal_rules().unwrap(),
        order: 3,
        cone: None,
        mode: Some(RelaxMode::Dual),
    };
    write("data/bilocal.json", bilocal.to_json());

    let prod = ProblemSpec {
        n: 2,
        s1: vec![
            MomentPolynomial::var(2, 1).unwrap(),
            MomentPolynomial::var(2, 2).unwrap(),
        ],
        s2: Vec::new(),
        objective: MomentPolynomial::symbol(vec![1, 1]).unwrap(),
        sense: Sense::Min,
        rules: RuleSet::empty(2),
        order: 2,
        cone: None,
        mode: Some(RelaxMode::EpsMin(PerturbKind::MomentPhi)),
    };
    write("data/prod_x1x2.json", prod.to_json());

    let m20 = MomentPolynomial::symbol(vec![2, 0]).unwrap();
    let m02 = MomentPolynomial::symbol(vec![0, 2]).unwrap();
    let mm = ProblemSpec {
        n: 2,
        s1: Vec::new(),
        s2: Vec::new(),
        objective: m20.try_mul(&m02).unwrap(),
        sense: Sense::Min,
        rules: RuleSet::empty(2),
        order: 3,
        cone: None,
        mode: Some(RelaxMode::EpsMin(PerturbKind::OnePlusPsi)),
    };
    write("data/m20m02.json", mm.to_json());

    let (target, cert) = catalog::cov3322_certificate();
    let file = CertificateFile::from_certificate(&target, &cert);
    write(
        "data/cov3322.cert.json",
        serde_json::to_string_pretty(&file).unwrap(),
    );
}
