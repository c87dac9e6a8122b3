//! Core domain types: literals, normal-form linear constraints, raw (pre-normalization)
//! constraints and instances.
//!
//! Every constraint stored anywhere in the solver is a [`LinearConstraint`] in normal form
//! `Σ wᵢ·lᵢ ≥ k` with strictly positive weights, a positive degree, at most one term per
//! variable and every weight capped at the degree (saturation). Clauses and cardinality
//! constraints are the special cases with unit weights.

use std::fmt;
use std::ops::Not;

use itertools::Itertools;
use thiserror::Error;

/// Largest total weight a single constraint may carry. Keeps every `curr`/`poss` sum inside
/// `i64` with headroom for the additions performed during propagation.
pub const MAX_TOTAL_WEIGHT: u64 = 1 << 60;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("variable index must be at least 1")]
    ZeroVariable,
    #[error("term weight must be positive")]
    ZeroWeight,
    #[error("degree must be positive")]
    ZeroDegree,
    #[error("variable {0} occurs more than once")]
    DuplicateVariable(u32),
    #[error("weights exceed the supported range")]
    Overflow,
    #[error("constraint is not a cardinality constraint")]
    NotCardinality,
    #[error("expansion would produce {count} clauses (cap {cap})")]
    ExpansionTooLarge { count: u128, cap: u128 },
    #[error("literal on variable {var} exceeds the instance's {num_vars} variables")]
    VariableOutOfRange { var: u32, num_vars: u32 },
}

/// A propositional variable, numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    pub fn new(index: u32) -> Result<Var, ModelError> {
        if index == 0 {
            return Err(ModelError::ZeroVariable);
        }
        Ok(Var(index))
    }

    /// 1-based index, as written in DIMACS and OPB files.
    pub fn get(self) -> u32 {
        self.0
    }

    /// 0-based index for dense per-variable arrays.
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn from_index(index: usize) -> Var {
        Var(index as u32 + 1)
    }

    pub fn positive(self) -> Lit {
        Lit::new(self, true)
    }

    pub fn negative(self) -> Lit {
        Lit::new(self, false)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A variable together with a polarity. Encoded as `2·(var−1) + negated`, so the code is a
/// dense index usable for per-literal arrays.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(2 * (var.0 - 1) + u32::from(!positive))
    }

    /// Builds a literal from a signed DIMACS integer (`-3` is `¬x3`).
    pub fn from_dimacs(value: i64) -> Result<Lit, ModelError> {
        let index = u32::try_from(value.unsigned_abs()).map_err(|_| ModelError::Overflow)?;
        Ok(Lit::new(Var::new(index)?, value > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var().get());
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn var(self) -> Var {
        Var(self.0 / 2 + 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn from_code(code: usize) -> Lit {
        Lit(code as u32)
    }

    /// Truth value of this literal under a total assignment indexed by `Var::index`.
    pub fn eval(self, assignment: &[bool]) -> bool {
        assignment[self.var().index()] == self.is_positive()
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_positive() {
            write!(f, "x{}", self.var().get())
        } else {
            write!(f, "~x{}", self.var().get())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Term {
    pub weight: u64,
    pub lit: Lit,
}

/// A normal-form pseudo-Boolean constraint `Σ wᵢ·lᵢ ≥ k`.
///
/// Terms are kept in canonical order (descending weight, then ascending literal code), which the
/// counter propagation engine relies on and which makes structural equality meaningful.
/// A constraint whose degree exceeds its total weight is unsatisfiable; the canonical such
/// constraint is [`LinearConstraint::contradiction`], the empty clause.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearConstraint {
    terms: Vec<Term>,
    degree: u64,
}

impl LinearConstraint {
    /// Builds a constraint from positive-weight terms, saturating the result.
    pub fn new(
        terms: impl IntoIterator<Item = (u64, Lit)>,
        degree: u64,
    ) -> Result<LinearConstraint, ModelError> {
        if degree == 0 {
            return Err(ModelError::ZeroDegree);
        }
        let mut out: Vec<Term> = Vec::new();
        for (weight, lit) in terms {
            if weight == 0 {
                return Err(ModelError::ZeroWeight);
            }
            out.push(Term { weight, lit });
        }
        let mut vars: Vec<Var> = out.iter().map(|t| t.lit.var()).collect();
        vars.sort_unstable();
        if let Some(w) = vars.windows(2).find(|w| w[0] == w[1]) {
            return Err(ModelError::DuplicateVariable(w[0].get()));
        }
        for t in &mut out {
            t.weight = t.weight.min(degree);
        }
        let total = out
            .iter()
            .try_fold(0u64, |acc, t| acc.checked_add(t.weight))
            .ok_or(ModelError::Overflow)?;
        if total > MAX_TOTAL_WEIGHT || degree > MAX_TOTAL_WEIGHT {
            return Err(ModelError::Overflow);
        }
        Ok(LinearConstraint::from_sorted(out, degree))
    }

    fn from_sorted(mut terms: Vec<Term>, degree: u64) -> LinearConstraint {
        terms.sort_unstable_by(|a, b| b.weight.cmp(&a.weight).then(a.lit.cmp(&b.lit)));
        LinearConstraint { terms, degree }
    }

    /// `l₁ ∨ … ∨ lₙ` as `Σ lᵢ ≥ 1`.
    pub fn clause(lits: impl IntoIterator<Item = Lit>) -> Result<LinearConstraint, ModelError> {
        LinearConstraint::new(lits.into_iter().map(|l| (1, l)), 1)
    }

    /// At least `k` of `lits` are true.
    pub fn cardinality(
        lits: impl IntoIterator<Item = Lit>,
        k: u64,
    ) -> Result<LinearConstraint, ModelError> {
        LinearConstraint::new(lits.into_iter().map(|l| (1, l)), k)
    }

    /// The empty clause `0 ≥ 1`.
    pub fn contradiction() -> LinearConstraint {
        LinearConstraint {
            terms: Vec::new(),
            degree: 1,
        }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_weight(&self) -> u64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    pub fn max_weight(&self) -> u64 {
        self.terms.first().map_or(0, |t| t.weight)
    }

    /// No 0/1 assignment satisfies the constraint.
    pub fn is_contradiction(&self) -> bool {
        self.degree > self.total_weight()
    }

    pub fn is_cardinality(&self) -> bool {
        self.terms.iter().all(|t| t.weight == 1)
    }

    pub fn is_clause(&self) -> bool {
        self.degree == 1 && self.is_cardinality()
    }

    pub fn lits(&self) -> impl Iterator<Item = Lit> + '_ {
        self.terms.iter().map(|t| t.lit)
    }

    /// Weight of the term on `var`, together with the literal it appears as.
    pub fn term_on(&self, var: Var) -> Option<Term> {
        self.terms.iter().copied().find(|t| t.lit.var() == var)
    }

    pub fn max_var(&self) -> Option<Var> {
        self.terms.iter().map(|t| t.lit.var()).max()
    }

    /// Left-hand side value under a total assignment.
    pub fn lhs(&self, assignment: &[bool]) -> u64 {
        self.terms
            .iter()
            .filter(|t| t.lit.eval(assignment))
            .map(|t| t.weight)
            .sum()
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.lhs(assignment) >= self.degree
    }
}

impl fmt::Display for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 >= {}", self.degree);
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if t.weight != 1 {
                write!(f, "{} ", t.weight)?;
            }
            write!(f, "{}", t.lit)?;
        }
        write!(f, " >= {}", self.degree)
    }
}

/// Caps every weight at the degree. The result has exactly the same models.
pub fn saturate(c: &LinearConstraint) -> LinearConstraint {
    let terms = c
        .terms
        .iter()
        .map(|t| Term {
            weight: t.weight.min(c.degree),
            lit: t.lit,
        })
        .collect();
    LinearConstraint::from_sorted(terms, c.degree)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Ge,
    Eq,
}

/// A linear constraint exactly as read from input: arbitrary nonzero integer weights,
/// repeated variables allowed, `≥` or `=`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawConstraint {
    pub terms: Vec<(i64, Lit)>,
    pub relation: Relation,
    pub rhs: i64,
}

impl RawConstraint {
    pub fn ge(terms: Vec<(i64, Lit)>, rhs: i64) -> RawConstraint {
        RawConstraint {
            terms,
            relation: Relation::Ge,
            rhs,
        }
    }

    pub fn eq(terms: Vec<(i64, Lit)>, rhs: i64) -> RawConstraint {
        RawConstraint {
            terms,
            relation: Relation::Eq,
            rhs,
        }
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        let lhs: i128 = self
            .terms
            .iter()
            .filter(|(_, l)| l.eval(assignment))
            .map(|(w, _)| i128::from(*w))
            .sum();
        match self.relation {
            Relation::Ge => lhs >= i128::from(self.rhs),
            Relation::Eq => lhs == i128::from(self.rhs),
        }
    }
}

/// Result of normalizing one raw constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normalized {
    /// Zero (tautology), one, or two (equality) normal-form constraints.
    Constraints(Vec<LinearConstraint>),
    /// No 0/1 assignment satisfies the input.
    Unsatisfiable,
}

/// Outcome of bringing a single `≥` inequality into normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum GeForm {
    Tautology,
    Constraint(LinearConstraint),
    Contradiction,
}

/// Accumulates a signed linear form over variables, `Σ cᵥ·xᵥ ≥ rhs`, where every literal has been
/// rewritten onto its positive variable (`w·x̄ = w − w·x`).
#[derive(Debug, Default, Clone)]
pub(crate) struct LinearForm {
    /// Unmerged `(variable, coefficient)` pairs; merged when the form is finished.
    coefs: Vec<(Var, i128)>,
    rhs: i128,
}

impl LinearForm {
    pub(crate) fn new(rhs: i128) -> LinearForm {
        LinearForm::with_capacity(rhs, 0)
    }

    pub(crate) fn with_capacity(rhs: i128, terms: usize) -> LinearForm {
        LinearForm {
            coefs: Vec::with_capacity(terms),
            rhs,
        }
    }

    pub(crate) fn add_term(&mut self, weight: i128, lit: Lit) {
        if lit.is_positive() {
            self.coefs.push((lit.var(), weight));
        } else {
            self.coefs.push((lit.var(), -weight));
            self.rhs -= weight;
        }
    }

    pub(crate) fn add_rhs(&mut self, amount: i128) {
        self.rhs += amount;
    }

    /// Rewrites negative coefficients as negated literals, drops cancelled variables and
    /// saturates.
    pub(crate) fn into_ge_form(mut self) -> Result<GeForm, ModelError> {
        self.coefs.sort_unstable_by_key(|&(v, _)| v);
        let mut rhs = self.rhs;
        let mut terms = Vec::with_capacity(self.coefs.len());
        for (var, group) in &self.coefs.iter().chunk_by(|&&(v, _)| v) {
            let coef: i128 = group.map(|&(_, c)| c).sum();
            match coef.cmp(&0) {
                std::cmp::Ordering::Greater => terms.push((coef, var.positive())),
                std::cmp::Ordering::Less => {
                    rhs -= coef;
                    terms.push((-coef, var.negative()));
                }
                std::cmp::Ordering::Equal => {}
            }
        }
        if rhs <= 0 {
            return Ok(GeForm::Tautology);
        }
        let total: i128 = terms.iter().map(|(w, _)| *w).sum();
        if rhs > total {
            return Ok(GeForm::Contradiction);
        }
        if rhs > i128::from(MAX_TOTAL_WEIGHT) {
            return Err(ModelError::Overflow);
        }
        let saturated: i128 = terms.iter().map(|(w, _)| (*w).min(rhs)).sum();
        if saturated > i128::from(MAX_TOTAL_WEIGHT) {
            return Err(ModelError::Overflow);
        }
        // Variables are distinct after merging and every weight fits once saturated.
        let terms = terms
            .into_iter()
            .map(|(w, lit)| Term { weight: w.min(rhs) as u64, lit })
            .collect();
        Ok(GeForm::Constraint(LinearConstraint::from_sorted(terms, rhs as u64)))
    }
}

fn normalize_ge(terms: &[(i64, Lit)], rhs: i64, negate: bool) -> Result<GeForm, ModelError> {
    let sign: i128 = if negate { -1 } else { 1 };
    let mut form = LinearForm::new(sign * i128::from(rhs));
    for &(w, lit) in terms {
        form.add_term(sign * i128::from(w), lit);
    }
    form.into_ge_form()
}

/// Brings a raw constraint into normal form.
///
/// Negative weights are moved onto the negated literal, repeated variables are merged, an
/// equality is split into its two inequalities before merging, and each side is saturated.
/// Tautological sides are dropped.
pub fn normalize(raw: &RawConstraint) -> Result<Normalized, ModelError> {
    let sides: Vec<GeForm> = match raw.relation {
        Relation::Ge => vec![normalize_ge(&raw.terms, raw.rhs, false)?],
        Relation::Eq => vec![
            normalize_ge(&raw.terms, raw.rhs, false)?,
            normalize_ge(&raw.terms, raw.rhs, true)?,
        ],
    };
    let mut out = Vec::new();
    for side in sides {
        match side {
            GeForm::Tautology => {}
            GeForm::Constraint(c) => out.push(c),
            GeForm::Contradiction => return Ok(Normalized::Unsatisfiable),
        }
    }
    Ok(Normalized::Constraints(out))
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(u128::from(n - i)) / u128::from(i + 1);
    }
    acc
}

/// Default cap on the number of clauses [`cardinality_to_cnf`] may emit.
pub const DEFAULT_EXPANSION_CAP: u128 = 1 << 20;

/// Expands `l₁ + … + lₘ ≥ k` into the `C(m, k−1)` clauses over every `(m−k+1)`-subset of its
/// literals.
pub fn cardinality_to_cnf(
    c: &LinearConstraint,
    cap: u128,
) -> Result<Vec<LinearConstraint>, ModelError> {
    if !c.is_cardinality() {
        return Err(ModelError::NotCardinality);
    }
    let m = c.len() as u64;
    let k = c.degree();
    if k > m {
        return Ok(vec![LinearConstraint::contradiction()]);
    }
    let count = binomial(m, k - 1);
    if count > cap {
        return Err(ModelError::ExpansionTooLarge { count, cap });
    }
    let size = (m - k + 1) as usize;
    Ok(c
        .lits()
        .combinations(size)
        .map(|subset| LinearConstraint::clause(subset).expect("subset of a valid constraint"))
        .collect())
}

/// Family name and generator parameters recorded with an instance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InstanceMeta {
    pub family: Option<String>,
    pub params: Vec<(String, String)>,
}

impl InstanceMeta {
    pub fn family(name: &str, params: &[(&str, String)]) -> InstanceMeta {
        InstanceMeta {
            family: Some(name.to_string()),
            params: params
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
        }
    }
}

/// A set of normal-form constraints over variables `1..=num_vars`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Instance {
    pub num_vars: u32,
    pub constraints: Vec<LinearConstraint>,
    pub meta: InstanceMeta,
}

impl Instance {
    pub fn new(num_vars: u32) -> Instance {
        Instance {
            num_vars,
            constraints: Vec::new(),
            meta: InstanceMeta::default(),
        }
    }

    pub fn with_meta(mut self, meta: InstanceMeta) -> Instance {
        self.meta = meta;
        self
    }

    pub fn push(&mut self, c: LinearConstraint) -> Result<(), ModelError> {
        if let Some(var) = c.max_var() {
            if var.get() > self.num_vars {
                return Err(ModelError::VariableOutOfRange {
                    var: var.get(),
                    num_vars: self.num_vars,
                });
            }
        }
        self.constraints.push(c);
        Ok(())
    }

    /// Normalizes `raw` and appends the result. An unsatisfiable input is kept as the empty
    /// clause so the instance stays unsatisfiable.
    pub fn push_raw(&mut self, raw: &RawConstraint) -> Result<(), ModelError> {
        match normalize(raw)? {
            Normalized::Constraints(cs) => {
                for c in cs {
                    self.push(c)?;
                }
            }
            Normalized::Unsatisfiable => self.push(LinearConstraint::contradiction())?,
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Every constraint is a clause.
    pub fn is_cnf(&self) -> bool {
        self.constraints
            .iter()
            .all(|c| c.is_clause() || (c.is_empty() && c.degree() == 1))
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.constraints.iter().all(|c| c.is_satisfied_by(assignment))
    }
}

/// A total assignment, indexed by `Var::index`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub values: Vec<bool>,
}

impl Model {
    pub fn new(values: Vec<bool>) -> Model {
        Model { values }
    }

    pub fn value(&self, var: Var) -> bool {
        self.values[var.index()]
    }

    pub fn lit_value(&self, lit: Lit) -> bool {
        lit.eval(&self.values)
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    /// The model as signed DIMACS literals.
    pub fn to_dimacs(&self) -> Vec<i64> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let var = i as i64 + 1;
                if v {
                    var
                } else {
                    -var
                }
            })
            .collect()
    }
}
