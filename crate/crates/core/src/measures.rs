//! Finitely supported probability measures and finite probability
//! spaces, the two evaluation homomorphisms for moment polynomials, the
//! classical-program reformulation, and an independent brute-force
//! optimization oracle.

use crate::algebra::{AlgebraError, MomentMonomial, MomentPolynomial, MomentSymbol, Rat};
use num::{One, ToPrimitive, Zero};
use rand::Rng;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum MeasureError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("weights must sum to exactly 1, got {0}")]
    WeightsNotNormalized(String),
    #[error("weights must be positive")]
    NonPositiveWeight,
    #[error("atoms must be pairwise distinct")]
    DuplicateAtom,
    #[error("atom and weight counts differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("random variable '{0}' is missing from the probability space")]
    MissingVariable(String),
    #[error("random variable '{0}' has {1} values, expected {2}")]
    BadVariableLength(String, usize, usize),
    #[error("empty enumeration specification")]
    EmptyEnumeration,
    #[error("objective is not quadratic in the weights (a monomial has more than two moment symbols)")]
    NotQuadraticInWeights,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A probability measure supported on finitely many rational atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMeasure {
    atoms: Vec<Vec<Rat>>,
    weights: Vec<Rat>,
}

impl FiniteMeasure {
    pub fn new(atoms: Vec<Vec<Rat>>, weights: Vec<Rat>) -> Result<Self, MeasureError> {
        if atoms.len() != weights.len() {
            return Err(MeasureError::LengthMismatch(atoms.len(), weights.len()));
        }
        let n = atoms.first().map(|a| a.len()).unwrap_or(0);
        for a in &atoms {
            if a.len() != n {
                return Err(MeasureError::DimensionMismatch(a.len(), n));
            }
        }
        for w in &weights {
            if w <= &Rat::zero() {
                return Err(MeasureError::NonPositiveWeight);
            }
        }
        let total: Rat = weights.iter().sum();
        if !total.is_one() {
            return Err(MeasureError::WeightsNotNormalized(total.to_string()));
        }
        for i in 0..atoms.len() {
            for j in (i + 1)..atoms.len() {
                if atoms[i] == atoms[j] {
                    return Err(MeasureError::DuplicateAtom);
                }
            }
        }
        Ok(FiniteMeasure { atoms, weights })
    }

    /// The Dirac measure at a point.
    pub fn dirac(point: Vec<Rat>) -> Self {
        FiniteMeasure {
            atoms: vec![point],
            weights: vec![Rat::one()],
        }
    }

    pub fn n(&self) -> usize {
        self.atoms.first().map(|a| a.len()).unwrap_or(0)
    }

    pub fn atoms(&self) -> &[Vec<Rat>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[Rat] {
        &self.weights
    }

    /// The mixed moment Σ_k w_k · atom_k^{e}.
    pub fn moment(&self, exponents: &[u32]) -> Rat {
        let mut s = Rat::zero();
        for (a, w) in self.atoms.iter().zip(&self.weights) {
            let mut p = w.clone();
            for (v, e) in a.iter().zip(exponents) {
                for _ in 0..*e {
                    p *= v;
                }
            }
            s += p;
        }
        s
    }

    /// A random measure with small rational atoms and weights, for
    /// property tests.
    pub fn random<R: Rng>(n: usize, max_atoms: usize, rng: &mut R) -> Self {
        let k = rng.gen_range(1..=max_atoms.max(1));
        let mut atoms: Vec<Vec<Rat>> = Vec::new();
        while atoms.len() < k {
            let a: Vec<Rat> = (0..n)
                .map(|_| {
                    Rat::new(
                        rng.gen_range(-4i32..=4).into(),
                        rng.gen_range(1i32..=3).into(),
                    )
                })
                .collect();
            if !atoms.contains(&a) {
                atoms.push(a);
            }
        }
        let raw: Vec<i64> = (0..atoms.len()).map(|_| rng.gen_range(1i64..=9)).collect();
        let total: i64 = raw.iter().sum();
        let weights = raw
            .into_iter()
            .map(|v| Rat::new(v.into(), total.into()))
            .collect();
        FiniteMeasure::new(atoms, weights).expect("constructed valid")
    }
}

/// A finite probability space with named rational random variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteProbabilitySpace {
    weights: Vec<Rat>,
    random_variables: BTreeMap<String, Vec<Rat>>,
}

impl FiniteProbabilitySpace {
    pub fn new(
        weights: Vec<Rat>,
        random_variables: BTreeMap<String, Vec<Rat>>,
    ) -> Result<Self, MeasureError> {
        for w in &weights {
            if w <= &Rat::zero() {
                return Err(MeasureError::NonPositiveWeight);
            }
        }
        let total: Rat = weights.iter().sum();
        if !total.is_one() {
            return Err(MeasureError::WeightsNotNormalized(total.to_string()));
        }
        for (name, vals) in &random_variables {
            if vals.len() != weights.len() {
                return Err(MeasureError::BadVariableLength(
                    name.clone(),
                    vals.len(),
                    weights.len(),
                ));
            }
        }
        Ok(FiniteProbabilitySpace {
            weights,
            random_variables,
        })
    }

    pub fn num_points(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Rat] {
        &self.weights
    }

    pub fn variable(&self, name: &str) -> Option<&[Rat]> {
        self.random_variables.get(name).map(|v| v.as_slice())
    }

    fn variable_table(&self, names: &[String]) -> Result<Vec<&[Rat]>, MeasureError> {
        names
            .iter()
            .map(|name| {
                self.random_variables
                    .get(name)
                    .map(|v| v.as_slice())
                    .ok_or_else(|| MeasureError::MissingVariable(name.clone()))
            })
            .collect()
    }
}

fn symbol_value(mu: &FiniteMeasure, sym: &MomentSymbol, cache: &mut HashMap<Vec<u32>, Rat>) -> Rat {
    if let Some(v) = cache.get(sym.exponents()) {
        return v.clone();
    }
    let v = mu.moment(sym.exponents());
    cache.insert(sym.exponents().to_vec(), v.clone());
    v
}

/// The moment evaluation homomorphism: x_j ↦ X_j and m[i] ↦ the mixed
/// moment of μ.
pub fn eval_poly(f: &MomentPolynomial, mu: &FiniteMeasure, x: &[Rat]) -> Result<Rat, MeasureError> {
    if mu.n() != f.n() {
        return Err(MeasureError::DimensionMismatch(mu.n(), f.n()));
    }
    if x.len() != f.n() {
        return Err(MeasureError::DimensionMismatch(x.len(), f.n()));
    }
    let mut cache = HashMap::new();
    let mut total = Rat::zero();
    for (m, c) in f.terms() {
        let mut p = c.clone();
        for (v, e) in x.iter().zip(m.x_exponents()) {
            for _ in 0..*e {
                p *= v;
            }
        }
        for (sym, mult) in m.symbols() {
            let sv = symbol_value(mu, sym, &mut cache);
            for _ in 0..*mult {
                p *= &sv;
            }
        }
        total += p;
    }
    Ok(total)
}

/// The random-variable evaluation homomorphism: x_j ↦ F_j(P) pointwise
/// and m[i] ↦ the expectation of F^i over the space. Returns the value
/// at every point of the space.
pub fn eval_random_vars(
    f: &MomentPolynomial,
    space: &FiniteProbabilitySpace,
    names: &[String],
) -> Result<Vec<Rat>, MeasureError> {
    if names.len() != f.n() {
        return Err(MeasureError::DimensionMismatch(names.len(), f.n()));
    }
    let table = space.variable_table(names)?;
    let npts = space.num_points();
    let expectation = |exponents: &[u32]| -> Rat {
        let mut s = Rat::zero();
        for p in 0..npts {
            let mut v = space.weights[p].clone();
            for (col, e) in table.iter().zip(exponents) {
                for _ in 0..*e {
                    v *= &col[p];
                }
            }
            s += v;
        }
        s
    };
    let mut cache: HashMap<Vec<u32>, Rat> = HashMap::new();
    let mut out = vec![Rat::zero(); npts];
    for (m, c) in f.terms() {
        let mut pure = c.clone();
        for (sym, mult) in m.symbols() {
            let sv = cache
                .entry(sym.exponents().to_vec())
                .or_insert_with(|| expectation(sym.exponents()))
                .clone();
            for _ in 0..*mult {
                pure *= &sv;
            }
        }
        for p in 0..npts {
            let mut v = pure.clone();
            for (col, e) in table.iter().zip(m.x_exponents()) {
                for _ in 0..*e {
                    v *= &col[p];
                }
            }
            out[p] += v;
        }
    }
    Ok(out)
}

/// Pushforward of the space under the named variables: a measure on ℚⁿ
/// whose atoms are the distinct value tuples with aggregated weights.
pub fn pushforward(
    space: &FiniteProbabilitySpace,
    names: &[String],
) -> Result<FiniteMeasure, MeasureError> {
    let table = space.variable_table(names)?;
    let mut agg: Vec<(Vec<Rat>, Rat)> = Vec::new();
    for p in 0..space.num_points() {
        let tuple: Vec<Rat> = table.iter().map(|col| col[p].clone()).collect();
        match agg.iter_mut().find(|(t, _)| t == &tuple) {
            Some((_, w)) => *w += &space.weights[p],
            None => agg.push((tuple, space.weights[p].clone())),
        }
    }
    let (atoms, weights) = agg.into_iter().unzip();
    FiniteMeasure::new(atoms, weights)
}

/// A classical polynomial optimization program equivalent to a moment
/// polynomial program over finitely supported measures: variables are
/// the free point X, candidate atoms Y₁…Y_D, and weights α₁…α_D.
#[derive(Clone, Debug)]
pub struct ClassicalProgram {
    pub n: usize,
    pub degree: u32,
    /// Number of candidate atoms D = C(n+d, d).
    pub num_atoms: usize,
    /// Total variable count (D+1)(n+1) − 1.
    pub num_vars: usize,
    pub variable_names: Vec<String>,
    /// Objective as an ordinary polynomial over the combined variables.
    pub objective: MomentPolynomial,
    /// Constraints g ≥ 0.
    pub inequalities: Vec<MomentPolynomial>,
    /// Constraints h = 0 (the weight normalization).
    pub equalities: Vec<MomentPolynomial>,
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k.min(n));
    let mut r: u64 = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Rewrites a moment polynomial program as a classical one: each moment
/// symbol m[w] becomes Σ_i α_i · Y_i^w over D = C(n+d,d) candidate
/// atoms, where d bounds the degrees of the objective and S₂.
pub fn tchakaloff_reformulate(
    s1: &[MomentPolynomial],
    s2: &[MomentPolynomial],
    f: &MomentPolynomial,
) -> Result<ClassicalProgram, MeasureError> {
    let n = f.n();
    let mut d = f.degree().unwrap_or(0);
    for s in s2 {
        d = d.max(s.degree().unwrap_or(0));
    }
    let big_d = binomial((n as u64) + (d as u64), d as u64) as usize;
    let num_vars = (big_d + 1) * (n + 1) - 1;

    // variable layout: X (n), then Y_i (n each), then α (D)
    let mut variable_names = Vec::with_capacity(num_vars);
    for j in 1..=n {
        variable_names.push(format!("X{j}"));
    }
    for i in 1..=big_d {
        for j in 1..=n {
            variable_names.push(format!("Y{i}_{j}"));
        }
    }
    for i in 1..=big_d {
        variable_names.push(format!("a{i}"));
    }

    let y_index = |atom: usize, var: usize| n + atom * n + var;
    let a_index = |atom: usize| n + big_d * n + atom;

    // m[w] ↦ Σ_i α_i Y_i^w as a polynomial over the combined variables
    let symbol_image = |sym: &MomentSymbol| -> MomentPolynomial {
        let mut img = MomentPolynomial::zero(num_vars);
        for i in 0..big_d {
            let mut exps = vec![0u32; num_vars];
            exps[a_index(i)] = 1;
            for (j, e) in sym.exponents().iter().enumerate() {
                exps[y_index(i, j)] = *e;
            }
            img.add_term(MomentMonomial::from_x(exps), Rat::one());
        }
        img
    };

    // substitution for a whole polynomial, sending x_j to the given
    // variable offset block (X for the objective/S₁ at X, or Y_i)
    let substitute = |p: &MomentPolynomial, x_offset: usize| -> Result<MomentPolynomial, MeasureError> {
        let mut out = MomentPolynomial::zero(num_vars);
        for (m, c) in p.terms() {
            let mut exps = vec![0u32; num_vars];
            for (j, e) in m.x_exponents().iter().enumerate() {
                exps[x_offset + j] = *e;
            }
            let mut term = MomentPolynomial::from_monomial(MomentMonomial::from_x(exps), c.clone());
            for (sym, mult) in m.symbols() {
                let img = symbol_image(sym);
                for _ in 0..*mult {
                    term = term.try_mul(&img)?;
                }
            }
            out = out.try_add(&term)?;
        }
        Ok(out)
    };

    let objective = substitute(f, 0)?;

    let mut inequalities = Vec::new();
    for s in s1 {
        // the free point and every candidate atom lie in K(S₁)
        inequalities.push(substitute(s, 0)?);
        for i in 0..big_d {
            inequalities.push(substitute(s, y_index(i, 0))?);
        }
    }
    for s in s2 {
        inequalities.push(substitute(s, 0)?);
    }
    for i in 0..big_d {
        let mut exps = vec![0u32; num_vars];
        exps[a_index(i)] = 1;
        inequalities.push(MomentPolynomial::from_monomial(
            MomentMonomial::from_x(exps),
            Rat::one(),
        ));
    }

    let mut normalization = MomentPolynomial::constant(num_vars, -Rat::one());
    for i in 0..big_d {
        let mut exps = vec![0u32; num_vars];
        exps[a_index(i)] = 1;
        normalization.add_term(MomentMonomial::from_x(exps), Rat::one());
    }

    Ok(ClassicalProgram {
        n,
        degree: d,
        num_atoms: big_d,
        num_vars,
        variable_names,
        objective,
        inequalities,
        equalities: vec![normalization],
    })
}

/// How the oracle searches over weights for a fixed atom subset.
#[derive(Clone, Debug)]
pub enum WeightSearch {
    /// Weights on the grid k/denominator.
    Grid { denominator: u32 },
    /// Exact optimization of the (at most quadratic in the weights)
    /// objective over the probability simplex via face enumeration.
    ExactQuadratic,
}

/// Finite enumeration specification for the brute-force oracle.
#[derive(Clone, Debug)]
pub struct EnumerationSpec {
    pub atom_candidates: Vec<Vec<Rat>>,
    pub max_atoms: usize,
    pub weight_search: WeightSearch,
    /// Evaluation points for the free x variables; the origin is used
    /// when empty.
    pub x_candidates: Vec<Vec<Rat>>,
    pub maximize: bool,
    /// Number of top-ranked atom subsets (by float prescreen) that are
    /// re-optimized exactly.
    pub exact_top: usize,
}

/// An attained objective value with its witness.
#[derive(Clone, Debug)]
pub struct OptWitness {
    pub value: Rat,
    pub measure: FiniteMeasure,
    pub x: Vec<Rat>,
}

struct CompiledPoly {
    symbols: Vec<Vec<u32>>,
    /// terms: (coefficient, x-exponents, per-symbol multiplicities)
    terms: Vec<(f64, Vec<u32>, Vec<u32>)>,
}

fn compile_poly(f: &MomentPolynomial) -> CompiledPoly {
    let mut symbols: Vec<Vec<u32>> = Vec::new();
    let mut terms = Vec::new();
    for (m, c) in f.terms() {
        let mut mults = vec![0u32; symbols.len()];
        for (sym, mult) in m.symbols() {
            let key = sym.exponents().to_vec();
            let idx = match symbols.iter().position(|s| s == &key) {
                Some(i) => i,
                None => {
                    symbols.push(key);
                    mults.push(0);
                    symbols.len() - 1
                }
            };
            mults[idx] += mult;
        }
        terms.push((c.to_f64().unwrap_or(f64::NAN), m.x_exponents().to_vec(), mults));
    }
    // pad multiplicity vectors to the final symbol count
    let ns = symbols.len();
    for (_, _, mults) in &mut terms {
        mults.resize(ns, 0);
    }
    CompiledPoly { symbols, terms }
}

fn eval_compiled(cp: &CompiledPoly, symvals: &[f64], x: &[f64]) -> f64 {
    let mut total = 0.0;
    for (c, xe, mults) in &cp.terms {
        let mut v = *c;
        for (xi, e) in x.iter().zip(xe) {
            v *= xi.powi(*e as i32);
        }
        for (sv, m) in symvals.iter().zip(mults) {
            if *m > 0 {
                v *= sv.powi(*m as i32);
            }
        }
        total += v;
    }
    total
}

/// Compositions of `total` into `parts` nonnegative summands.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; parts];
    fn rec(cur: &mut Vec<u32>, idx: usize, remaining: u32, out: &mut Vec<Vec<u32>>) {
        if idx == cur.len() - 1 {
            cur[idx] = remaining;
            out.push(cur.clone());
            cur[idx] = 0;
            return;
        }
        for v in 0..=remaining {
            cur[idx] = v;
            rec(cur, idx + 1, remaining - v, out);
        }
        cur[idx] = 0;
    }
    if parts > 0 {
        rec(&mut cur, 0, total, &mut out);
    }
    out
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Evaluates f exactly for a subset of atoms with given (possibly zero)
/// weights; zero-weight atoms are dropped from the witness measure.
fn exact_value(
    f: &MomentPolynomial,
    atoms: &[Vec<Rat>],
    weights: &[Rat],
    x: &[Rat],
) -> Result<(Rat, FiniteMeasure), MeasureError> {
    let mut a = Vec::new();
    let mut w = Vec::new();
    for (atom, weight) in atoms.iter().zip(weights) {
        if weight > &Rat::zero() {
            a.push(atom.clone());
            w.push(weight.clone());
        }
    }
    let mu = FiniteMeasure::new(a, w)?;
    let v = eval_poly(f, &mu, x)?;
    Ok((v, mu))
}

/// Raw polynomial evaluation with arbitrary (even zero or unnormalized)
/// weights; used for quadratic interpolation in the weights.
fn raw_value(f: &MomentPolynomial, atoms: &[Vec<Rat>], weights: &[Rat], x: &[Rat]) -> Rat {
    let mut cache: HashMap<Vec<u32>, Rat> = HashMap::new();
    let mut total = Rat::zero();
    for (m, c) in f.terms() {
        let mut p = c.clone();
        for (v, e) in x.iter().zip(m.x_exponents()) {
            for _ in 0..*e {
                p *= v;
            }
        }
        for (sym, mult) in m.symbols() {
            let sv = cache
                .entry(sym.exponents().to_vec())
                .or_insert_with(|| {
                    let mut s = Rat::zero();
                    for (a, w) in atoms.iter().zip(weights) {
                        let mut q = w.clone();
                        for (v, e) in a.iter().zip(sym.exponents()) {
                            for _ in 0..*e {
                                q *= v;
                            }
                        }
                        s += q;
                    }
                    s
                })
                .clone();
            for _ in 0..*mult {
                p *= &sv;
            }
        }
        total += p;
    }
    total
}

/// Exact optimization of a weight-quadratic objective over the simplex
/// spanned by the given atoms, by enumerating faces and stationary
/// points. Returns the best (value, weights).
fn quadratic_over_simplex(
    f: &MomentPolynomial,
    atoms: &[Vec<Rat>],
    x: &[Rat],
    maximize: bool,
) -> Result<(Rat, Vec<Rat>), MeasureError> {
    let k = atoms.len();
    let q = |w: &[Rat]| raw_value(f, atoms, w, x);
    let better = |a: &Rat, b: &Rat| if maximize { a > b } else { a < b };

    let mut best: Option<(Rat, Vec<Rat>)> = None;
    let mut consider = |w: Vec<Rat>| {
        let v = q(&w);
        if best.as_ref().map_or(true, |(bv, _)| better(&v, bv)) {
            best = Some((v, w));
        }
    };

    for face in 1..(1usize << k) {
        let idx: Vec<usize> = (0..k).filter(|i| face & (1 << i) != 0).collect();
        let m = idx.len();
        // vertex face
        if m == 1 {
            let mut w = vec![Rat::zero(); k];
            w[idx[0]] = Rat::one();
            consider(w);
            continue;
        }
        // parametrize the face: free u₁…u_{m−1}, last weight = 1 − Σu
        let embed = |u: &[Rat]| -> Vec<Rat> {
            let mut w = vec![Rat::zero(); k];
            let mut rest = Rat::one();
            for (t, ui) in u.iter().enumerate() {
                w[idx[t]] = ui.clone();
                rest -= ui;
            }
            w[idx[m - 1]] = rest;
            w
        };
        let g = |u: &[Rat]| q(&embed(u));
        let dim = m - 1;
        // reconstruct the quadratic g(u) = c0 + lᵀu + ½uᵀHu exactly
        let zero_u = vec![Rat::zero(); dim];
        let c0 = g(&zero_u);
        let mut l = vec![Rat::zero(); dim];
        let mut h = vec![vec![Rat::zero(); dim]; dim];
        let two = Rat::from_integer(2.into());
        for i in 0..dim {
            let mut ei = zero_u.clone();
            ei[i] = Rat::one();
            let gi = g(&ei);
            let mut e2 = zero_u.clone();
            e2[i] = two.clone();
            let g2 = g(&e2);
            h[i][i] = &g2 - &(&two * &gi) + &c0;
            l[i] = &gi - &c0 - &(&h[i][i] / &two);
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let mut eij = zero_u.clone();
                eij[i] = Rat::one();
                eij[j] = Rat::one();
                let gij = g(&eij);
                let hij = &gij - &c0 - &l[i] - &l[j] - &(&h[i][i] / &two) - &(&h[j][j] / &two);
                h[i][j] = hij.clone();
                h[j][i] = hij;
            }
        }
        // stationary point: H·u = −l
        let neg_l: Vec<Rat> = l.iter().map(|v| -v).collect();
        if let Some(u) = crate::linalg::solve_linear(&h, &neg_l) {
            let w = embed(&u);
            if w.iter().all(|wi| wi > &Rat::zero()) {
                consider(w);
            }
        }
    }
    let (v, w) = best.expect("at least one vertex considered");
    Ok((v, w))
}

/// Brute-force optimization over finitely supported measures drawn from
/// the enumeration specification. The returned value is always attained
/// by the returned witness (re-evaluated exactly), making this a sound
/// one-sided oracle for SDP bounds.
pub fn brute_force_opt(
    f: &MomentPolynomial,
    spec: &EnumerationSpec,
) -> Result<OptWitness, MeasureError> {
    if spec.atom_candidates.is_empty() || spec.max_atoms == 0 {
        return Err(MeasureError::EmptyEnumeration);
    }
    let n = f.n();
    for a in &spec.atom_candidates {
        if a.len() != n {
            return Err(MeasureError::DimensionMismatch(a.len(), n));
        }
    }
    if let WeightSearch::ExactQuadratic = spec.weight_search {
        for (m, _) in f.terms() {
            let mult: u32 = m.symbols().iter().map(|(_, k)| *k).sum();
            if mult > 2 {
                return Err(MeasureError::NotQuadraticInWeights);
            }
        }
    }
    let x_points: Vec<Vec<Rat>> = if spec.x_candidates.is_empty() {
        vec![vec![Rat::zero(); n]]
    } else {
        spec.x_candidates.clone()
    };

    let k = spec.max_atoms.min(spec.atom_candidates.len());
    let subsets = subsets_of_size(spec.atom_candidates.len(), k);

    // float prescreen: rank atom subsets by the best value over sampled
    // weight vectors
    let cp = compile_poly(f);
    let atoms_f: Vec<Vec<f64>> = spec
        .atom_candidates
        .iter()
        .map(|a| a.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect())
        .collect();
    let x_f: Vec<Vec<f64>> = x_points
        .iter()
        .map(|p| p.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect())
        .collect();
    let sample_weights: Vec<Vec<f64>> = {
        let den = match spec.weight_search {
            WeightSearch::Grid { denominator } => denominator.max(1),
            WeightSearch::ExactQuadratic => 4,
        };
        compositions(den, k)
            .into_iter()
            .map(|c| c.into_iter().map(|v| v as f64 / den as f64).collect())
            .collect()
    };
    let mut ranked: Vec<(f64, usize)> = subsets
        .iter()
        .enumerate()
        .map(|(si, subset)| {
            // per-atom symbol power table for this subset
            let pows: Vec<Vec<f64>> = cp
                .symbols
                .iter()
                .map(|sym| {
                    subset
                        .iter()
                        .map(|&ai| {
                            sym.iter()
                                .zip(&atoms_f[ai])
                                .map(|(e, v)| v.powi(*e as i32))
                                .product()
                        })
                        .collect()
                })
                .collect();
            let mut best = f64::NEG_INFINITY;
            for w in &sample_weights {
                let symvals: Vec<f64> = pows
                    .iter()
                    .map(|row| row.iter().zip(w).map(|(p, wi)| p * wi).sum())
                    .collect();
                for xf in &x_f {
                    let v = eval_compiled(&cp, &symvals, xf);
                    let v = if spec.maximize { v } else { -v };
                    if v > best {
                        best = v;
                    }
                }
            }
            (best, si)
        })
        .collect();
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let top = ranked.iter().take(spec.exact_top.max(1));

    // exact pass over the top-ranked subsets
    let mut best: Option<OptWitness> = None;
    let better = |a: &Rat, b: &Rat| if spec.maximize { a > b } else { a < b };
    for (_, si) in top {
        let atoms: Vec<Vec<Rat>> = subsets[*si]
            .iter()
            .map(|&ai| spec.atom_candidates[ai].clone())
            .collect();
        for x in &x_points {
            match &spec.weight_search {
                WeightSearch::Grid { denominator } => {
                    for comp in compositions((*denominator).max(1), atoms.len()) {
                        if comp.iter().all(|&c| c == 0) {
                            continue;
                        }
                        let weights: Vec<Rat> = comp
                            .iter()
                            .map(|&c| Rat::new(c.into(), (*denominator).max(1).into()))
                            .collect();
                        let (v, mu) = exact_value(f, &atoms, &weights, x)?;
                        if best.as_ref().map_or(true, |b| better(&v, &b.value)) {
                            best = Some(OptWitness {
                                value: v,
                                measure: mu,
                                x: x.clone(),
                            });
                        }
                    }
                }
                WeightSearch::ExactQuadratic => {
                    let (v, weights) = quadratic_over_simplex(f, &atoms, x, spec.maximize)?;
                    let (vv, mu) = exact_value(f, &atoms, &weights, x)?;
                    debug_assert_eq!(v, vv);
                    if best.as_ref().map_or(true, |b| better(&vv, &b.value)) {
                        best = Some(OptWitness {
                            value: vv,
                            measure: mu,
                            x: x.clone(),
                        });
                    }
                }
            }
        }
    }
    best.ok_or(MeasureError::EmptyEnumeration)
}

/// JSON-facing measure description with exact fraction strings.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct MeasureFile {
    pub atoms: Vec<Vec<String>>,
    pub weights: Vec<String>,
}

impl MeasureFile {
    pub fn from_measure(mu: &FiniteMeasure) -> Self {
        MeasureFile {
            atoms: mu
                .atoms()
                .iter()
                .map(|a| a.iter().map(|v| v.to_string()).collect())
                .collect(),
            weights: mu.weights().iter().map(|w| w.to_string()).collect(),
        }
    }

    pub fn to_measure(&self) -> Result<FiniteMeasure, MeasureError> {
        let parse = |s: &str| -> Result<Rat, MeasureError> {
            s.parse::<Rat>()
                .map_err(|e| MeasureError::Algebra(AlgebraError::Parse(format!("{s}: {e}"))))
        };
        let atoms = self
            .atoms
            .iter()
            .map(|a| a.iter().map(|v| parse(v)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let weights = self
            .weights
            .iter()
            .map(|w| parse(w))
            .collect::<Result<Vec<_>, _>>()?;
        FiniteMeasure::new(atoms, weights)
    }
}
