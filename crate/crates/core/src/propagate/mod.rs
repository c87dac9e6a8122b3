//! Assignment trail, constraint storage and the two propagation engines.

mod counter;
mod store;
mod trail;
mod watched;

pub use counter::CounterState;
pub use store::{ConstraintId, ConstraintStore, StoredConstraint};
pub use trail::{Reason, Trail, TrailEntry};

use crate::model::{LinearConstraint, Lit};
use counter::CounterEngine;
use watched::WatchedEngine;

/// `(curr, poss)` of a constraint under the trail: the true weight minus the degree and the
/// non-false weight minus the degree.
pub fn curr_poss(c: &LinearConstraint, trail: &Trail) -> (i64, i64) {
    let k = c.degree() as i64;
    let mut curr = -k;
    let mut poss = -k;
    for t in c.terms() {
        match trail.value(t.lit) {
            Some(true) => {
                curr += t.weight as i64;
                poss += t.weight as i64;
            }
            Some(false) => {}
            None => poss += t.weight as i64,
        }
    }
    (curr, poss)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnitStatus {
    Conflicting,
    /// Unvalued literals that must become true.
    Forced(Vec<Lit>),
    NotUnit,
}

pub fn unit_status(c: &LinearConstraint, trail: &Trail) -> UnitStatus {
    let (_, poss) = curr_poss(c, trail);
    if poss < 0 {
        return UnitStatus::Conflicting;
    }
    let forced: Vec<Lit> = c
        .terms()
        .iter()
        .filter(|t| t.weight as i64 > poss && trail.is_unassigned(t.lit.var()))
        .map(|t| t.lit)
        .collect();
    if forced.is_empty() {
        UnitStatus::NotUnit
    } else {
        UnitStatus::Forced(forced)
    }
}

/// Whether the terms of `c` on the variables of `set` satisfy `Σ − max ≥ k`.
pub fn is_watching_set(c: &LinearConstraint, set: &[Lit]) -> bool {
    let mut sum = 0u128;
    let mut max = 0u128;
    for t in c.terms() {
        if set.iter().any(|l| l.var() == t.lit.var()) {
            sum += t.weight as u128;
            max = max.max(t.weight as u128);
        }
    }
    sum - max >= c.degree() as u128
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EngineKind {
    Counter,
    #[default]
    Watched,
}

impl std::str::FromStr for EngineKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "counter" => Ok(EngineKind::Counter),
            "watched" => Ok(EngineKind::Watched),
            _ => Err(format!("unknown propagation engine `{s}`")),
        }
    }
}

#[derive(Debug, Clone)]
enum Engine {
    Counter(CounterEngine),
    Watched(WatchedEngine),
}

/// Constraint database plus trail, kept unit-propagated by one of the engines.
#[derive(Debug, Clone)]
pub struct Propagator {
    store: ConstraintStore,
    trail: Trail,
    engine: Engine,
    qhead: usize,
    propagations: u64,
}

impl Propagator {
    pub fn new(num_vars: u32, kind: EngineKind) -> Propagator {
        let engine = match kind {
            EngineKind::Counter => Engine::Counter(CounterEngine::new(num_vars)),
            EngineKind::Watched => Engine::Watched(WatchedEngine::new(num_vars)),
        };
        Propagator {
            store: ConstraintStore::new(),
            trail: Trail::new(num_vars),
            engine,
            qhead: 0,
            propagations: 0,
        }
    }

    pub fn kind(&self) -> EngineKind {
        match self.engine {
            Engine::Counter(_) => EngineKind::Counter,
            Engine::Watched(_) => EngineKind::Watched,
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.trail.num_vars() as u32
    }

    pub fn trail(&self) -> &Trail {
        &self.trail
    }

    pub fn store(&self) -> &ConstraintStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ConstraintStore {
        &mut self.store
    }

    pub fn constraint(&self, id: ConstraintId) -> &LinearConstraint {
        self.store.constraint(id)
    }

    /// Literals assigned by propagation so far (decisions excluded).
    pub fn propagations(&self) -> u64 {
        self.propagations
    }

    /// Stores and attaches `c`. Literals it forces under the current trail are assigned
    /// immediately; the `Err` case reports that `c` is conflicting.
    pub fn add_constraint(
        &mut self,
        c: LinearConstraint,
        learned: bool,
    ) -> (ConstraintId, Result<(), ConstraintId>) {
        let id = self.store.insert(c, learned);
        let before = self.trail.len();
        let res = match &mut self.engine {
            Engine::Counter(e) => e.attach(id, &self.store, &mut self.trail),
            Engine::Watched(e) => e.attach(id, &self.store, &mut self.trail),
        };
        self.propagations += (self.trail.len() - before) as u64;
        (id, res)
    }

    pub fn remove_constraint(&mut self, id: ConstraintId) -> Option<StoredConstraint> {
        if let Engine::Watched(e) = &mut self.engine {
            e.detach(id);
        }
        self.store.remove(id)
    }

    /// Drops stale engine entries of removed constraints.
    pub fn compact(&mut self) {
        match &mut self.engine {
            Engine::Counter(e) => e.compact(&self.store),
            Engine::Watched(e) => e.compact(&self.store),
        }
    }

    pub fn new_level(&mut self) {
        self.trail.new_level();
    }

    /// Puts `lit` on the trail at the current level with the given reason.
    pub fn assign(&mut self, lit: Lit, reason: Reason) {
        self.trail.push(lit, reason);
        if let Engine::Counter(e) = &mut self.engine {
            e.on_assign(lit, &self.store, &self.trail);
        }
    }

    pub fn decide(&mut self, lit: Lit) {
        self.trail.new_level();
        self.assign(lit, Reason::Decision);
    }

    /// Runs unit propagation to fixpoint; on conflict returns the conflicting constraint.
    pub fn propagate(&mut self) -> Result<(), ConstraintId> {
        while self.qhead < self.trail.len() {
            let lit = self.trail.entries()[self.qhead].lit;
            self.qhead += 1;
            let before = self.trail.len();
            let res = match &mut self.engine {
                Engine::Counter(e) => e.propagate_lit(lit, &self.store, &mut self.trail),
                Engine::Watched(e) => e.propagate_lit(lit, &self.store, &mut self.trail),
            };
            self.propagations += (self.trail.len() - before) as u64;
            res?;
        }
        Ok(())
    }

    pub fn backtrack_to(&mut self, level: u32) {
        let store = &self.store;
        match &mut self.engine {
            Engine::Counter(e) => self.trail.backtrack_to(level, |l| e.on_unassign(l, store)),
            Engine::Watched(_) => self.trail.backtrack_to(level, |_| {}),
        }
        self.qhead = self.qhead.min(self.trail.len());
    }

    /// Incrementally maintained `(curr, poss)`; only available with the counter engine.
    pub fn counter_state(&self, id: ConstraintId) -> Option<CounterState> {
        match &self.engine {
            Engine::Counter(e) if self.store.is_live(id) => e.state(id),
            _ => None,
        }
    }

    /// Watched literals of a constraint; only available with the watched engine.
    pub fn watched_literals(&self, id: ConstraintId) -> Option<Vec<Lit>> {
        match &self.engine {
            Engine::Watched(e) if self.store.is_live(id) => Some(e.watched_lits(id, &self.store)),
            _ => None,
        }
    }

    pub fn watches_all(&self, id: ConstraintId) -> bool {
        match &self.engine {
            Engine::Watched(e) => e.watches_all(id),
            Engine::Counter(_) => false,
        }
    }
}
