use crate::model::{GeForm, LinearConstraint, LinearForm, Var};
use crate::propagate::Trail;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InferError {
    #[error("resolution overflow")]
    ResolutionOverflow,
    #[error("x{0} does not occur with opposite signs in the two premises")]
    NoPivot(u32),
}

/// Result of combining two constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolvent {
    Constraint(LinearConstraint),
    /// The sum is trivially satisfied (degree ≤ 0).
    Tautology,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Cutting-plane resolution of `c` and `d` on `pivot`.
///
/// The pivot may appear positively in either premise as long as it appears negatively in the
/// other. Both premises are scaled by the smallest multipliers that make the pivot weights equal,
/// added, and the result is merged and saturated. A sum whose degree exceeds its total weight is
/// returned as [`LinearConstraint::contradiction`].
pub fn pb_resolve(
    c: &LinearConstraint,
    d: &LinearConstraint,
    pivot: Var,
) -> Result<Resolvent, InferError> {
    let (Some(tc), Some(td)) = (c.term_on(pivot), d.term_on(pivot)) else {
        return Err(InferError::NoPivot(pivot.get()));
    };
    if tc.lit == td.lit {
        return Err(InferError::NoPivot(pivot.get()));
    }
    let g = gcd(tc.weight, td.weight);
    let mc = i128::from(td.weight / g);
    let md = i128::from(tc.weight / g);
    let rhs = mc * i128::from(c.degree()) + md * i128::from(d.degree());
    let mut form = LinearForm::with_capacity(rhs, c.len() + d.len());
    for t in c.terms() {
        form.add_term(mc * i128::from(t.weight), t.lit);
    }
    for t in d.terms() {
        form.add_term(md * i128::from(t.weight), t.lit);
    }
    match form.into_ge_form() {
        Ok(GeForm::Tautology) => Ok(Resolvent::Tautology),
        Ok(GeForm::Constraint(r)) => Ok(Resolvent::Constraint(r)),
        Ok(GeForm::Contradiction) => Ok(Resolvent::Constraint(LinearConstraint::contradiction())),
        Err(_) => Err(InferError::ResolutionOverflow),
    }
}

/// Weakens `c` to the cardinality constraint `Σ lᵢ ≥ ⌈k / max wᵢ⌉`.
pub fn weaken_to_cardinality(c: &LinearConstraint) -> LinearConstraint {
    if c.is_cardinality() || c.is_empty() {
        return c.clone();
    }
    let k = c.degree().div_ceil(c.max_weight());
    LinearConstraint::cardinality(c.lits(), k).expect("weakening keeps a valid constraint")
}

/// `poss(c, P)`: the constraint is i-irrelevant for every `i` up to this value.
pub fn irrelevance(c: &LinearConstraint, trail: &Trail) -> i64 {
    crate::propagate::curr_poss(c, trail).1
}
