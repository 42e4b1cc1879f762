//! Oriented, terminating substitution rules and fixpoint reduction.
//!
//! Two rule classes are supported: x-rules rewriting a squared variable
//! x_j² into a lower-degree x-only polynomial, and moment rules rewriting
//! a pure monomial pattern into a pure polynomial whose monomials are
//! strictly smaller in the canonical order. Both classes strictly decrease
//! the canonical well-order on each application, so reduction terminates;
//! an iteration cap guards against misuse through hand-built rule sets.

use super::{AlgebraError, MomentMonomial, MomentPolynomial, MomentSymbol, Rat};
use num::One;
use serde::{Deserialize, Serialize};

/// Maximum number of whole-polynomial rewrite passes before reduction
/// reports a non-terminating rule set.
pub const MAX_REDUCE_PASSES: usize = 10_000;

/// Rewrite rule x_j² → replacement, with an x-only replacement of degree
/// at most 1 so that every application strictly decreases the degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XRule {
    pub var: usize,
    pub replacement: MomentPolynomial,
}

/// Rewrite rule for a pure monomial pattern, e.g. a vanishing moment
/// m[1,0,…] → 0 or a factorization m[1,0,1] → m[1,0,0]*m[0,0,1]. Every
/// replacement monomial must be strictly smaller than the pattern in the
/// canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentRule {
    pub pattern: MomentMonomial,
    pub replacement: MomentPolynomial,
}

/// A validated, terminating set of substitution rules over n variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSet {
    n: usize,
    x_rules: Vec<XRule>,
    moment_rules: Vec<MomentRule>,
}

impl RuleSet {
    pub fn empty(n: usize) -> Self {
        RuleSet {
            n,
            x_rules: Vec::new(),
            moment_rules: Vec::new(),
        }
    }

    /// Builds a rule set after validating dimensions and the termination
    /// order on every rule.
    pub fn new(
        n: usize,
        x_rules: Vec<XRule>,
        moment_rules: Vec<MomentRule>,
    ) -> Result<Self, AlgebraError> {
        if n == 0 {
            return Err(AlgebraError::ZeroVariables);
        }
        for r in &x_rules {
            if r.var == 0 || r.var > n {
                return Err(AlgebraError::VariableIndex(r.var, n));
            }
            if r.replacement.n() != n {
                return Err(AlgebraError::DimensionMismatch(r.replacement.n(), n));
            }
            if !r.replacement.is_x_only() {
                return Err(AlgebraError::InvalidRule(format!(
                    "x-rule replacement for x{} must be x-only",
                    r.var
                )));
            }
            if r.replacement.degree().unwrap_or(0) >= 2 {
                return Err(AlgebraError::InvalidRule(format!(
                    "x-rule replacement for x{}^2 must have degree < 2",
                    r.var
                )));
            }
        }
        for r in &moment_rules {
            if r.pattern.n() != n {
                return Err(AlgebraError::DimensionMismatch(r.pattern.n(), n));
            }
            if r.replacement.n() != n {
                return Err(AlgebraError::DimensionMismatch(r.replacement.n(), n));
            }
            if !r.pattern.is_pure() || r.pattern.is_one() {
                return Err(AlgebraError::InvalidRule(
                    "moment rule pattern must be a pure non-constant monomial".into(),
                ));
            }
            if !r.replacement.is_pure() {
                return Err(AlgebraError::InvalidRule(
                    "moment rule replacement must be pure".into(),
                ));
            }
            for (m, _) in r.replacement.terms() {
                if m >= &r.pattern {
                    return Err(AlgebraError::InvalidRule(format!(
                        "moment rule replacement monomial {m} is not smaller than pattern {}",
                        r.pattern
                    )));
                }
            }
        }
        Ok(RuleSet {
            n,
            x_rules,
            moment_rules,
        })
    }

    /// The rules x_j² = 1 for every variable: reduction modulo the
    /// hypercube {−1,1}ⁿ.
    pub fn hypercube(n: usize) -> Self {
        let x_rules = (1..=n)
            .map(|j| XRule {
                var: j,
                replacement: MomentPolynomial::one(n),
            })
            .collect();
        RuleSet::new(n, x_rules, Vec::new()).expect("hypercube rules are valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_rules(&self) -> &[XRule] {
        &self.x_rules
    }

    pub fn moment_rules(&self) -> &[MomentRule] {
        &self.moment_rules
    }

    /// Adds a vanishing rule for a single moment symbol: m[w] → 0.
    pub fn push_vanishing(&mut self, exponents: Vec<u32>) -> Result<(), AlgebraError> {
        let sym = MomentSymbol::new(exponents)?;
        self.moment_rules.push(MomentRule {
            pattern: MomentMonomial::from_symbol(sym),
            replacement: MomentPolynomial::zero(self.n),
        });
        Ok(())
    }

    /// Adds a moment rule after the same validation as `new`.
    pub fn push_moment_rule(&mut self, rule: MomentRule) -> Result<(), AlgebraError> {
        RuleSet::new(self.n, Vec::new(), vec![rule.clone()])?;
        self.moment_rules.push(rule);
        Ok(())
    }

    fn x_rule_for(&self, var0: usize) -> Option<&XRule> {
        self.x_rules.iter().find(|r| r.var == var0 + 1)
    }

    /// Fully reduces an x-only monomial given by its exponent vector.
    fn reduce_x_vector(&self, exps: &[u32]) -> MomentPolynomial {
        let mut cur = MomentPolynomial::from_monomial(
            MomentMonomial::from_x(exps.to_vec()),
            Rat::one(),
        );
        loop {
            let mut out = MomentPolynomial::zero(self.n);
            let mut changed = false;
            for (m, c) in cur.terms() {
                let hit = (0..self.n).find_map(|j| {
                    if m.x_exponents()[j] >= 2 {
                        self.x_rule_for(j).map(|r| (j, r))
                    } else {
                        None
                    }
                });
                if let Some((j, rule)) = hit {
                    let mut e = m.x_exponents().to_vec();
                    e[j] -= 2;
                    let rest = MomentPolynomial::from_monomial(MomentMonomial::from_x(e), c.clone());
                    out = &out + &(&rest * &rule.replacement);
                    changed = true;
                } else {
                    out.add_term(m.clone(), c.clone());
                }
            }
            if !changed {
                return out;
            }
            cur = out;
        }
    }

    /// One innermost-first rewrite of a monomial: first inside moment
    /// symbols, then moment-rule patterns on the pure part, then the free
    /// x part. Returns `None` when the monomial is canonical.
    pub(crate) fn rewrite_monomial(&self, m: &MomentMonomial) -> Option<MomentPolynomial> {
        // inside a moment symbol
        for (idx, (sym, _)) in m.symbols().iter().enumerate() {
            let reducible = (0..self.n)
                .any(|j| sym.exponents()[j] >= 2 && self.x_rule_for(j).is_some());
            if reducible {
                let inner = self.reduce_x_vector(sym.exponents()).formal_moment();
                let mut symbols = m.symbols().to_vec();
                symbols[idx].1 -= 1;
                let rest = MomentMonomial::new(m.x_exponents().to_vec(), symbols)
                    .expect("valid parts");
                let rest = MomentPolynomial::from_monomial(rest, Rat::one());
                return Some(&rest * &inner);
            }
        }
        // moment-rule pattern on the symbol multiset
        for rule in &self.moment_rules {
            if let Some(quot) = m.try_div(&rule.pattern) {
                let rest = MomentPolynomial::from_monomial(quot, Rat::one());
                return Some(&rest * &rule.replacement);
            }
        }
        // free x part
        for j in 0..self.n {
            if m.x_exponents()[j] >= 2 {
                if let Some(rule) = self.x_rule_for(j) {
                    let mut e = m.x_exponents().to_vec();
                    e[j] -= 2;
                    let rest = MomentMonomial::new(e, m.symbols().to_vec()).expect("valid parts");
                    let rest = MomentPolynomial::from_monomial(rest, Rat::one());
                    return Some(&rest * &rule.replacement);
                }
            }
        }
        None
    }

    /// True when no rule applies to the monomial.
    pub fn is_canonical(&self, m: &MomentMonomial) -> bool {
        self.rewrite_monomial(m).is_none()
    }

    /// Reduces a polynomial to its canonical representative modulo the
    /// rules, applying rewrites innermost-first until a fixpoint.
    pub fn reduce(&self, f: &MomentPolynomial) -> Result<MomentPolynomial, AlgebraError> {
        if f.n() != self.n {
            return Err(AlgebraError::DimensionMismatch(f.n(), self.n));
        }
        if self.x_rules.is_empty() && self.moment_rules.is_empty() {
            return Ok(f.clone());
        }
        let mut cur = f.clone();
        for _ in 0..MAX_REDUCE_PASSES {
            let mut out = MomentPolynomial::zero(self.n);
            let mut changed = false;
            for (m, c) in cur.terms() {
                match self.rewrite_monomial(m) {
                    Some(p) => {
                        out = &out + &p.scale(c);
                        changed = true;
                    }
                    None => out.add_term(m.clone(), c.clone()),
                }
            }
            if !changed {
                return Ok(out);
            }
            cur = out;
        }
        Err(AlgebraError::NonTerminatingRules(MAX_REDUCE_PASSES))
    }
}

/// JSON-facing form of an x-rule; the replacement uses the polynomial
/// text grammar.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct XRuleFile {
    pub var: usize,
    pub replacement: String,
}

/// JSON-facing form of a moment rule. The pattern is a single pure
/// monomial with coefficient 1, e.g. `"m[1,0,1]"`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentRuleFile {
    pub pattern: String,
    pub replacement: String,
}

/// JSON-facing form of a rule set.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RuleSetFile {
    #[serde(default)]
    pub x_rules: Vec<XRuleFile>,
    #[serde(default)]
    pub moment_rules: Vec<MomentRuleFile>,
}

impl RuleSetFile {
    pub fn from_rules(rules: &RuleSet) -> Self {
        RuleSetFile {
            x_rules: rules
                .x_rules()
                .iter()
                .map(|r| XRuleFile {
                    var: r.var,
                    replacement: r.replacement.to_string(),
                })
                .collect(),
            moment_rules: rules
                .moment_rules()
                .iter()
                .map(|r| MomentRuleFile {
                    pattern: r.pattern.to_string(),
                    replacement: r.replacement.to_string(),
                })
                .collect(),
        }
    }

    pub fn to_rules(&self, n: usize) -> Result<RuleSet, AlgebraError> {
        let x_rules = self
            .x_rules
            .iter()
            .map(|r| {
                Ok(XRule {
                    var: r.var,
                    replacement: MomentPolynomial::parse(&r.replacement, n)?,
                })
            })
            .collect::<Result<Vec<_>, AlgebraError>>()?;
        let moment_rules = self
            .moment_rules
            .iter()
            .map(|r| {
                let pat = MomentPolynomial::parse(&r.pattern, n)?;
                let mut terms = pat.terms();
                let pattern = match (terms.next(), terms.next()) {
                    (Some((m, c)), None) if c.is_one() => m.clone(),
                    _ => {
                        return Err(AlgebraError::InvalidRule(format!(
                            "pattern {:?} must be a single monomial with coefficient 1",
                            r.pattern
                        )))
                    }
                };
                Ok(MomentRule {
                    pattern,
                    replacement: MomentPolynomial::parse(&r.replacement, n)?,
                })
            })
            .collect::<Result<Vec<_>, AlgebraError>>()?;
        RuleSet::new(n, x_rules, moment_rules)
    }
}
