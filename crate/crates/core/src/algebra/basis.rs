//! Enumeration of canonical monomial bases up to a degree bound,
//! respecting a substitution rule set.

use super::{MomentMonomial, MomentSymbol, RuleSet};

/// All exponent vectors of length n with total degree in lo..=hi.
fn exponent_vectors(n: usize, lo: u32, hi: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(cur: &mut Vec<u32>, idx: usize, remaining: u32, out: &mut Vec<Vec<u32>>) {
        if idx == cur.len() - 1 {
            cur[idx] = remaining;
            out.push(cur.clone());
            cur[idx] = 0;
            return;
        }
        for e in 0..=remaining {
            cur[idx] = e;
            rec(cur, idx + 1, remaining - e, out);
        }
        cur[idx] = 0;
    }
    for d in lo..=hi {
        rec(&mut cur, 0, d, &mut out);
    }
    out
}

/// All exponent vectors of length n with total degree ≤ hi, in the
/// enumeration order of `exponent_vectors`.
pub fn exponent_vectors_upto(n: usize, hi: u32) -> Vec<Vec<u32>> {
    exponent_vectors(n, 0, hi)
}

/// Rule-reduced canonical x-only monomials of degree ≤ r, in canonical
/// order.
pub fn x_monomial_basis(n: usize, r: u32, rules: &RuleSet) -> Vec<MomentMonomial> {
    let mut out: Vec<MomentMonomial> = exponent_vectors(n, 0, r)
        .into_iter()
        .map(MomentMonomial::from_x)
        .filter(|m| rules.is_canonical(m))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Canonical moment symbols of degree 1..=r surviving reduction.
fn symbol_pool(n: usize, r: u32, rules: &RuleSet) -> Vec<MomentSymbol> {
    let mut pool: Vec<MomentSymbol> = exponent_vectors(n, 1, r)
        .into_iter()
        .map(|e| MomentSymbol::new(e).expect("nonzero vector"))
        .filter(|s| rules.is_canonical(&MomentMonomial::from_symbol(s.clone())))
        .collect();
    pool.sort();
    pool
}

/// Multisets over the symbol pool with total degree ≤ budget, emitted as
/// (symbol, multiplicity) lists.
fn symbol_multisets(
    pool: &[MomentSymbol],
    budget: u32,
) -> Vec<Vec<(MomentSymbol, u32)>> {
    let mut out = Vec::new();
    let mut cur: Vec<(MomentSymbol, u32)> = Vec::new();
    fn rec(
        pool: &[MomentSymbol],
        idx: usize,
        budget: u32,
        cur: &mut Vec<(MomentSymbol, u32)>,
        out: &mut Vec<Vec<(MomentSymbol, u32)>>,
    ) {
        if idx == pool.len() {
            out.push(cur.clone());
            return;
        }
        let d = pool[idx].degree();
        let max_mult = budget / d;
        for m in 0..=max_mult {
            if m > 0 {
                cur.push((pool[idx].clone(), m));
            }
            rec(pool, idx + 1, budget - m * d, cur, out);
            if m > 0 {
                cur.pop();
            }
        }
    }
    rec(pool, 0, budget, &mut cur, &mut out);
    out
}

/// Rule-reduced canonical pure monomials (products of moment symbols) of
/// degree ≤ r, in canonical order.
pub fn pure_monomial_basis(n: usize, r: u32, rules: &RuleSet) -> Vec<MomentMonomial> {
    let pool = symbol_pool(n, r, rules);
    let mut out: Vec<MomentMonomial> = symbol_multisets(&pool, r)
        .into_iter()
        .map(|syms| MomentMonomial::new(vec![0; n], syms).expect("valid parts"))
        .filter(|m| rules.is_canonical(m))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// All rule-reduced canonical monomials of the moment polynomial ring of
/// degree ≤ r, in canonical (degree-lex) order, deduplicated.
pub fn monomial_basis(n: usize, r: u32, rules: &RuleSet) -> Vec<MomentMonomial> {
    let pool = symbol_pool(n, r, rules);
    let mut out = Vec::new();
    for x in x_monomial_basis(n, r, rules) {
        let budget = r - x.degree();
        for syms in symbol_multisets(&pool, budget) {
            let m = MomentMonomial::new(x.x_exponents().to_vec(), syms).expect("valid parts");
            if rules.is_canonical(&m) {
                out.push(m);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}
