//! Strengthening by probing: fix a literal, propagate, and tighten every constraint that the
//! probe oversatisfies.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use crate::model::{GeForm, Instance, LinearConstraint, LinearForm, Lit, Var};
use crate::propagate::{curr_poss, ConstraintId, EngineKind, Propagator};

#[derive(Debug, Clone, PartialEq)]
pub struct StrengthenConfig {
    /// Maximum number of probes; `None` runs to fixpoint.
    pub max_probes: Option<u64>,
    pub time_limit: Option<Duration>,
    /// Also probe pairs of literals.
    pub pairs: bool,
}

impl Default for StrengthenConfig {
    fn default() -> Self {
        StrengthenConfig {
            max_probes: Some(100_000),
            time_limit: Some(Duration::from_secs(10)),
            pairs: false,
        }
    }
}

impl StrengthenConfig {
    pub fn unlimited() -> StrengthenConfig {
        StrengthenConfig {
            max_probes: None,
            time_limit: None,
            pairs: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StrengthenStats {
    pub probes: u64,
    pub sweeps: u64,
    pub replacements: u64,
    pub failed_literals: u64,
    pub subsumed: u64,
    /// The budget ran out before a full sweep made no change.
    pub exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbeOutcome {
    /// Propagating the probe conflicts, so its negation holds.
    Failed,
    /// `(index, replacement)` pairs; indices refer to the probed constraint list.
    Replacements(Vec<(usize, LinearConstraint)>),
}

/// `s·(l̄₁ + … + l̄ₚ) + Σ wᵢlᵢ ≥ r + s`, normalized.
fn strengthened(c: &LinearConstraint, probes: &[Lit], s: u64) -> Option<LinearConstraint> {
    let mut form = LinearForm::new(c.degree() as i128 + s as i128);
    for t in c.terms() {
        form.add_term(t.weight as i128, t.lit);
    }
    for &l in probes {
        form.add_term(s as i128, !l);
    }
    match form.into_ge_form() {
        Ok(GeForm::Constraint(r)) => {
            let r = divide_by_gcd(&r);
            let stronger = match probes {
                [l0] => excludes_a_model(c, *l0, s),
                _ => !dominates(c, &r),
            };
            stronger.then_some(r)
        }
        _ => None,
    }
}

/// Whether some model of `c` sets `l0` and has left-hand side in `[k, k + s)`, i.e. whether
/// the single-probe replacement is strictly stronger than `c` on its own.
fn excludes_a_model(c: &LinearConstraint, l0: Lit, s: u64) -> bool {
    const LIMIT: u64 = 1 << 20;
    let hi = c.degree() + s;
    if hi > LIMIT {
        return true;
    }
    let mut base = 0u64;
    let mut reach = vec![false; hi as usize];
    reach[0] = true;
    for t in c.terms() {
        if t.lit == l0 {
            base += t.weight;
        } else if t.lit != !l0 {
            let w = t.weight as usize;
            for v in (w..hi as usize).rev() {
                if reach[v - w] {
                    reach[v] = true;
                }
            }
        }
    }
    (c.degree()..hi).any(|v| v >= base && reach[(v - base) as usize])
}

/// Divides weights by their common divisor, rounding the degree up.
fn divide_by_gcd(c: &LinearConstraint) -> LinearConstraint {
    let g = c.terms().iter().fold(0u64, |g, t| gcd(g, t.weight));
    if g <= 1 {
        return c.clone();
    }
    LinearConstraint::new(c.terms().iter().map(|t| (t.weight / g, t.lit)), c.degree().div_ceil(g))
        .expect("dividing keeps a valid constraint")
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Whether every model of `a` satisfies `b`, judged by weakening `a` onto the literals of `b`.
pub fn dominates(a: &LinearConstraint, b: &LinearConstraint) -> bool {
    let mut slack = a.degree() as i128;
    for t in a.terms() {
        let bw = b
            .term_on(t.lit.var())
            .filter(|u| u.lit == t.lit)
            .map_or(0, |u| u.weight);
        slack -= t.weight.saturating_sub(bw) as i128;
    }
    slack >= b.degree() as i128
}

/// Decides `probes` on a propagator at level 0 and collects the oversatisfied constraints.
fn probe_in(
    prop: &mut Propagator,
    ids: &[ConstraintId],
    probes: &[Lit],
) -> Option<Vec<(ConstraintId, LinearConstraint)>> {
    debug_assert_eq!(prop.trail().decision_level(), 0);
    let root_satisfied: Vec<bool> = ids
        .iter()
        .map(|&id| curr_poss(prop.constraint(id), prop.trail()).0 >= 0)
        .collect();
    let mut failed = false;
    for &l in probes {
        match prop.trail().value(l) {
            Some(true) => continue,
            Some(false) => {
                failed = true;
                break;
            }
            None => {}
        }
        prop.decide(l);
        if prop.propagate().is_err() {
            failed = true;
            break;
        }
    }
    let out = if failed {
        None
    } else {
        let mut out = Vec::new();
        for (&id, &sat) in ids.iter().zip(&root_satisfied) {
            if sat {
                continue;
            }
            let c = prop.constraint(id);
            let s = curr_poss(c, prop.trail()).0;
            if s > 0 {
                if let Some(r) = strengthened(c, probes, s as u64) {
                    out.push((id, r));
                }
            }
        }
        Some(out)
    };
    prop.backtrack_to(0);
    out
}

fn load(instance: &Instance) -> (Propagator, Vec<ConstraintId>, bool) {
    let mut prop = Propagator::new(instance.num_vars, EngineKind::Watched);
    let mut conflict = false;
    let mut ids = Vec::with_capacity(instance.constraints.len());
    for c in &instance.constraints {
        let (id, res) = prop.add_constraint(c.clone(), false);
        conflict |= res.is_err();
        ids.push(id);
    }
    conflict = conflict || prop.propagate().is_err();
    (prop, ids, conflict)
}

/// Probes `l0` against `instance` and reports the replacements it licenses.
pub fn strengthen_probe(instance: &Instance, l0: Lit) -> ProbeOutcome {
    let (mut prop, ids, conflict) = load(instance);
    if conflict {
        return ProbeOutcome::Failed;
    }
    match probe_in(&mut prop, &ids, &[l0]) {
        None => ProbeOutcome::Failed,
        Some(reps) => ProbeOutcome::Replacements(
            reps.into_iter()
                .map(|(id, r)| (ids.iter().position(|&i| i == id).expect("probed id"), r))
                .collect(),
        ),
    }
}

struct Pass {
    prop: Propagator,
    ids: Vec<ConstraintId>,
    stats: StrengthenStats,
    unsat: bool,
    /// Everything added so far; re-deriving one of these is not progress.
    added: HashSet<LinearConstraint>,
    /// Replacements above this degree are not taken.
    degree_cap: u64,
    /// Remaining constraints that pair probes may still add.
    pair_budget: usize,
}

impl Pass {
    /// Adds a constraint at level 0; removes the originals it dominates.
    fn add(&mut self, c: LinearConstraint) -> Option<ConstraintId> {
        self.added.insert(c.clone());
        let (id, res) = self.prop.add_constraint(c, false);
        if res.is_err() || self.prop.propagate().is_err() {
            self.unsat = true;
            return None;
        }
        let new = self.prop.constraint(id).clone();
        let before = self.ids.len();
        let prop = &mut self.prop;
        self.ids.retain(|&other| {
            if dominates(&new, prop.constraint(other)) {
                prop.remove_constraint(other);
                false
            } else {
                true
            }
        });
        self.stats.subsumed += (before - self.ids.len()) as u64;
        self.ids.push(id);
        Some(id)
    }

    /// Returns whether anything changed.
    fn apply(&mut self, probes: &[Lit]) -> bool {
        self.stats.probes += 1;
        match probe_in(&mut self.prop, &self.ids, probes) {
            None => {
                let clause = LinearConstraint::clause(probes.iter().map(|&l| !l))
                    .expect("probe literals on distinct variables");
                if self.ids.iter().any(|&id| dominates(self.prop.constraint(id), &clause)) {
                    return false;
                }
                self.stats.failed_literals += 1;
                self.add(clause);
                true
            }
            Some(reps) => {
                let mut changed = false;
                for (old, new) in reps {
                    if self.unsat {
                        break;
                    }
                    if probes.len() > 1
                        && (self.pair_budget == 0
                            || self.added.contains(&new)
                            || new.degree() > self.degree_cap
                            || self.ids.iter().any(|&id| dominates(self.prop.constraint(id), &new)))
                    {
                        continue;
                    }
                    // An earlier replacement from this probe may already have subsumed it.
                    if !self.ids.contains(&old) {
                        continue;
                    }
                    // With several probe literals the new constraint no longer implies the
                    // original, so it is added next to it.
                    if probes.len() == 1 {
                        self.ids.retain(|&i| i != old);
                        self.prop.remove_constraint(old);
                    } else {
                        self.pair_budget -= 1;
                    }
                    self.stats.replacements += 1;
                    self.add(new);
                    changed = true;
                }
                changed
            }
        }
    }

    fn into_instance(mut self, template: &Instance) -> Instance {
        self.prop.compact();
        let mut out = Instance::new(template.num_vars).with_meta(template.meta.clone());
        if self.unsat {
            out.constraints.push(LinearConstraint::contradiction());
        } else {
            for &id in &self.ids {
                out.constraints.push(self.prop.constraint(id).clone());
            }
        }
        out
    }
}

/// Repeats probe sweeps (ascending variable, positive literal first) until a sweep changes
/// nothing or the budget runs out. The result has exactly the models of the input.
pub fn strengthen_pass(instance: &Instance, config: &StrengthenConfig) -> (Instance, StrengthenStats) {
    let start = Instant::now();
    let (prop, ids, conflict) = load(instance);
    let mut pass = Pass {
        prop,
        ids,
        stats: StrengthenStats::default(),
        unsat: conflict,
        added: HashSet::new(),
        pair_budget: instance.constraints.len() + instance.num_vars as usize,
        degree_cap: instance
            .constraints
            .iter()
            .map(|c| c.total_weight())
            .max()
            .unwrap_or(0)
            .max(u64::from(instance.num_vars)),
    };
    let n = instance.num_vars;
    let over_budget = |stats: &StrengthenStats| {
        config.max_probes.is_some_and(|m| stats.probes >= m)
            || config.time_limit.is_some_and(|t| start.elapsed() >= t)
    };
    'sweeps: while !pass.unsat {
        pass.stats.sweeps += 1;
        let mut changed = false;
        let lits = (1..=n).flat_map(|v| {
            let v = Var::new(v).expect("non-zero");
            [v.positive(), v.negative()]
        });
        let lits: Vec<Lit> = lits.collect();
        for (i, &l) in lits.iter().enumerate() {
            if pass.unsat {
                break 'sweeps;
            }
            if !pass.prop.trail().is_unassigned(l.var()) {
                continue;
            }
            if over_budget(&pass.stats) {
                pass.stats.exhausted = true;
                break 'sweeps;
            }
            changed |= pass.apply(&[l]);
            if config.pairs {
                for &m in &lits[i + 1..] {
                    if m.var() == l.var()
                        || !pass.prop.trail().is_unassigned(l.var())
                        || !pass.prop.trail().is_unassigned(m.var())
                    {
                        continue;
                    }
                    if over_budget(&pass.stats) {
                        pass.stats.exhausted = true;
                        break 'sweeps;
                    }
                    changed |= pass.apply(&[l, m]);
                    if pass.unsat {
                        break 'sweeps;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let stats = pass.stats.clone();
    (pass.into_instance(instance), stats)
}
