use crate::infer::{pb_resolve, weaken_to_cardinality, InferError, Resolvent};
use crate::model::{LinearConstraint, LinearForm, GeForm, Lit, Var};
use crate::propagate::{curr_poss, ConstraintId, Propagator, Reason, Trail};

/// How a learned constraint was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnPath {
    /// Pure cutting-plane resolution.
    Resolution,
    /// Resolution after weakening an antecedent to a cardinality constraint.
    Weakened,
    /// Clause over the conflict cut, after the resolution path failed.
    Clausal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Learned {
    pub constraint: LinearConstraint,
    pub backjump: u32,
    pub path: LearnPath,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Analysis {
    Learned(Learned),
    /// The conflict does not depend on any decision.
    Unsatisfiable,
}

/// Whether `c` is unit or conflicting when only assignments at levels `≤ level` are kept.
pub fn is_asserting_at(c: &LinearConstraint, trail: &Trail, level: u32) -> bool {
    let mut poss = -(c.degree() as i64);
    for t in c.terms() {
        if trail.value_at_level(t.lit, level) != Some(false) {
            poss += t.weight as i64;
        }
    }
    poss < 0
        || c.terms().iter().any(|t| {
            t.weight as i64 > poss && trail.value_at_level(t.lit, level).is_none()
        })
}

/// Smallest level at which `c` is unit or conflicting, if any.
pub fn backjump_level(c: &LinearConstraint, trail: &Trail) -> Option<u32> {
    // (level at which the term gets a value, weight, falsified)
    let mut terms: Vec<(u32, i64, bool)> = c
        .terms()
        .iter()
        .map(|t| match trail.value(t.lit) {
            None => (u32::MAX, t.weight as i64, false),
            Some(v) => (trail.level(t.lit.var()), t.weight as i64, !v),
        })
        .collect();
    terms.sort_unstable_by_key(|t| t.0);
    let mut suffix_max = vec![0i64; terms.len() + 1];
    for i in (0..terms.len()).rev() {
        suffix_max[i] = suffix_max[i + 1].max(terms[i].1);
    }
    let mut poss: i64 = terms.iter().map(|t| t.1).sum::<i64>() - c.degree() as i64;
    let mut i = 0;
    let mut level = 0u32;
    loop {
        while i < terms.len() && terms[i].0 <= level {
            if terms[i].2 {
                poss -= terms[i].1;
            }
            i += 1;
        }
        if poss < 0 || suffix_max[i] > poss {
            return Some(level);
        }
        if i == terms.len() || terms[i].0 == u32::MAX {
            return None;
        }
        level = terms[i].0;
    }
}

/// Drops the terms of `r` falsified after trail position `pos`, lowering the degree by their
/// weight. The result still forces the literal assigned at `pos`.
fn weaken_after(r: &LinearConstraint, trail: &Trail, pos: usize) -> LinearConstraint {
    let mut form = LinearForm::new(r.degree() as i128);
    let mut dropped = false;
    for t in r.terms() {
        if trail.is_false(t.lit) && trail.position(t.lit.var()) > pos {
            form.add_rhs(-(t.weight as i128));
            dropped = true;
        } else {
            form.add_term(t.weight as i128, t.lit);
        }
    }
    if !dropped {
        return r.clone();
    }
    match form.into_ge_form() {
        Ok(GeForm::Constraint(c)) => c,
        // The antecedent was unit when it fired, so neither case can occur.
        _ => r.clone(),
    }
}

/// The most recently falsified literal of `c` at `level`, as (variable, trail position).
fn latest_falsified(c: &LinearConstraint, trail: &Trail, level: u32) -> Option<(Var, usize)> {
    c.terms()
        .iter()
        .filter(|t| trail.is_false(t.lit) && trail.level(t.lit.var()) == level)
        .map(|t| (t.lit.var(), trail.position(t.lit.var())))
        .max_by_key(|&(_, p)| p)
}

fn conflicting(c: &LinearConstraint, trail: &Trail) -> bool {
    curr_poss(c, trail).1 < 0
}

enum Step {
    Done(LinearConstraint, LearnPath),
    Fallback,
}

fn resolve_step(
    cur: &LinearConstraint,
    antecedent: &LinearConstraint,
    pivot: Var,
    trail: &Trail,
    path: &mut LearnPath,
) -> Result<Option<LinearConstraint>, InferError> {
    let first = pb_resolve(cur, antecedent, pivot)?;
    if let Resolvent::Constraint(r) = &first {
        if conflicting(r, trail) {
            return Ok(Some(r.clone()));
        }
    }
    // Weaken whichever premise carries the larger pivot weight and try once more.
    let wc = cur.term_on(pivot).map_or(0, |t| t.weight);
    let wa = antecedent.term_on(pivot).map_or(0, |t| t.weight);
    let second = if wc > wa {
        pb_resolve(&weaken_to_cardinality(cur), antecedent, pivot)?
    } else {
        pb_resolve(cur, &weaken_to_cardinality(antecedent), pivot)?
    };
    if let Resolvent::Constraint(r) = second {
        if conflicting(&r, trail) {
            *path = LearnPath::Weakened;
            return Ok(Some(r));
        }
    }
    Ok(None)
}

fn resolution_path(prop: &Propagator, conflict: ConstraintId) -> Step {
    let trail = prop.trail();
    let level = trail.decision_level();
    let mut cur = prop.constraint(conflict).clone();
    let mut path = LearnPath::Resolution;
    loop {
        if cur.is_contradiction() && cur.is_empty() {
            return Step::Done(cur, path);
        }
        if is_asserting_at(&cur, trail, level - 1) {
            return Step::Done(cur, path);
        }
        let Some((var, pos)) = latest_falsified(&cur, trail, level) else {
            return Step::Fallback;
        };
        let Reason::Constraint(rid) = trail.reason(var) else {
            return Step::Done(cur, path);
        };
        let antecedent = weaken_after(prop.constraint(rid), trail, pos);
        match resolve_step(&cur, &antecedent, var, trail, &mut path) {
            Ok(Some(r)) => cur = r,
            Ok(None) | Err(_) => return Step::Fallback,
        }
    }
}

/// The resolution path specialised to conflicts whose whole derivation uses clauses: it yields
/// the same first-UIP clause, tracking seen variables instead of building every resolvent.
/// `None` as soon as a non-clausal constraint or a decision would be resolved.
fn clause_resolution(prop: &Propagator, conflict: ConstraintId) -> Option<LinearConstraint> {
    let trail = prop.trail();
    let level = trail.decision_level();
    let c = prop.constraint(conflict);
    if !c.is_clause() {
        return None;
    }
    let mut seen = vec![false; trail.num_vars()];
    let mut out: Vec<Lit> = Vec::new();
    let mut pending = 0usize;
    for l in c.lits() {
        if !trail.is_false(l) {
            return None;
        }
        seen[l.var().index()] = true;
        if trail.level(l.var()) == level {
            pending += 1;
        } else {
            out.push(l);
        }
    }
    if pending <= 1 {
        return Some(c.clone());
    }
    for e in trail.entries().iter().rev() {
        let v = e.lit.var();
        if !seen[v.index()] {
            continue;
        }
        if pending == 1 {
            out.push(!e.lit);
            break;
        }
        let Reason::Constraint(rid) = e.reason else {
            return None;
        };
        let r = prop.constraint(rid);
        if !r.is_clause() {
            return None;
        }
        pending -= 1;
        for l in r.lits() {
            let u = l.var();
            if u == v || seen[u.index()] {
                continue;
            }
            seen[u.index()] = true;
            if trail.level(u) == level {
                pending += 1;
            } else {
                out.push(l);
            }
        }
    }
    Some(LinearConstraint::clause(out).expect("distinct variables"))
}

/// Literals of `c` falsified before trail position `pos`.
fn explanation<'a>(
    c: &'a LinearConstraint,
    trail: &'a Trail,
    pos: usize,
) -> impl Iterator<Item = Lit> + 'a {
    c.lits()
        .filter(move |&l| trail.is_false(l) && trail.position(l.var()) < pos)
}

/// First-UIP clause built from explanation clauses of the implication graph.
fn clausal_path(prop: &Propagator, conflict: ConstraintId) -> LinearConstraint {
    let trail = prop.trail();
    let level = trail.decision_level();
    let mut seen = vec![false; trail.num_vars()];
    let mut out: Vec<Lit> = Vec::new();
    let mut pending = 0usize;
    let add = |l: Lit, seen: &mut Vec<bool>, out: &mut Vec<Lit>, pending: &mut usize| {
        let v = l.var();
        if seen[v.index()] {
            return;
        }
        seen[v.index()] = true;
        if trail.level(v) == level {
            *pending += 1;
        } else if trail.level(v) > 0 {
            out.push(l);
        }
    };
    for l in explanation(prop.constraint(conflict), trail, trail.len()) {
        add(l, &mut seen, &mut out, &mut pending);
    }
    let entries = trail.entries();
    let mut i = entries.len();
    while pending > 0 {
        i -= 1;
        let e = entries[i];
        let v = e.lit.var();
        if !seen[v.index()] {
            continue;
        }
        match e.reason {
            Reason::Constraint(rid) if pending > 1 => {
                pending -= 1;
                for l in explanation(prop.constraint(rid), trail, i) {
                    add(l, &mut seen, &mut out, &mut pending);
                }
            }
            _ => {
                // Unique implication point, or an unexplained literal: keep everything still
                // pending at this level.
                out.push(!e.lit);
                pending -= 1;
                if pending > 0 {
                    for e in entries[..i].iter().rev() {
                        if e.level == level && seen[e.lit.var().index()] {
                            out.push(!e.lit);
                        }
                    }
                }
                break;
            }
        }
    }
    if out.is_empty() {
        LinearConstraint::contradiction()
    } else {
        LinearConstraint::clause(out).expect("distinct variables")
    }
}

/// Derives a constraint from a conflict and the level to rewind to.
///
/// The cutting-plane derivation is tried first; if it yields a non-conflicting resolvent even
/// after weakening, or overflows, a clause over the conflict cut is learned instead.
pub fn analyze_conflict(prop: &Propagator, conflict: ConstraintId) -> Analysis {
    let trail = prop.trail();
    if trail.decision_level() == 0 {
        return Analysis::Unsatisfiable;
    }
    let (constraint, path) = match clause_resolution(prop, conflict) {
        Some(c) => (c, LearnPath::Resolution),
        None => match resolution_path(prop, conflict) {
            Step::Done(c, path) => (c, path),
            Step::Fallback => (clausal_path(prop, conflict), LearnPath::Clausal),
        },
    };
    if constraint.is_contradiction() {
        return Analysis::Unsatisfiable;
    }
    match backjump_level(&constraint, trail) {
        Some(b) => Analysis::Learned(Learned {
            constraint,
            backjump: b.min(trail.decision_level()),
            path,
        }),
        None => Analysis::Unsatisfiable,
    }
}
