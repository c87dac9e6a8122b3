//! Counter-based propagation: every constraint carries its `curr` and `poss` values, updated on
//! each assignment to one of its variables and reverted on backtrack. Terms are sorted by
//! descending weight and a cursor tracks the first unvalued term, so the largest unvalued
//! weight is always at hand for the unit test.

use crate::model::Lit;
use crate::propagate::{ConstraintId, ConstraintStore, Reason, Trail};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CounterState {
    pub curr: i64,
    pub poss: i64,
    cursor: u32,
}

#[derive(Debug, Clone, Copy)]
struct Occurrence {
    cid: ConstraintId,
    term: u32,
    weight: u64,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct CounterEngine {
    occurrences: Vec<Vec<Occurrence>>,
    states: Vec<CounterState>,
}

impl CounterEngine {
    pub(crate) fn new(num_vars: u32) -> CounterEngine {
        CounterEngine {
            occurrences: vec![Vec::new(); 2 * num_vars as usize],
            states: Vec::new(),
        }
    }

    pub(crate) fn state(&self, cid: ConstraintId) -> Option<CounterState> {
        self.states.get(cid.index()).copied()
    }

    pub(crate) fn attach(
        &mut self,
        cid: ConstraintId,
        store: &ConstraintStore,
        trail: &mut Trail,
    ) -> Result<(), ConstraintId> {
        let c = store.constraint(cid);
        let degree = c.degree() as i64;
        let mut curr = -degree;
        let mut poss = -degree;
        let mut cursor = None;
        for (i, t) in c.terms().iter().enumerate() {
            self.occurrences[t.lit.code()].push(Occurrence {
                cid,
                term: i as u32,
                weight: t.weight,
            });
            match trail.value(t.lit) {
                Some(true) => {
                    curr += t.weight as i64;
                    poss += t.weight as i64;
                }
                Some(false) => {}
                None => {
                    poss += t.weight as i64;
                    cursor.get_or_insert(i as u32);
                }
            }
        }
        if self.states.len() <= cid.index() {
            self.states.resize(cid.index() + 1, CounterState::default());
        }
        self.states[cid.index()] = CounterState {
            curr,
            poss,
            cursor: cursor.unwrap_or(c.len() as u32),
        };
        self.check(cid, store, trail)
    }

    /// Drops occurrence entries of deleted constraints.
    pub(crate) fn compact(&mut self, store: &ConstraintStore) {
        for list in &mut self.occurrences {
            list.retain(|o| store.is_live(o.cid));
        }
    }

    fn advance_cursor(
        state: &mut CounterState,
        store: &ConstraintStore,
        cid: ConstraintId,
        trail: &Trail,
    ) {
        let terms = store.constraint(cid).terms();
        let mut i = state.cursor as usize;
        while i < terms.len() && !trail.is_unassigned(terms[i].lit.var()) {
            i += 1;
        }
        state.cursor = i as u32;
    }

    /// Counter update for a literal that has just been put on the trail.
    pub(crate) fn on_assign(&mut self, lit: Lit, store: &ConstraintStore, trail: &Trail) {
        for idx in 0..self.occurrences[lit.code()].len() {
            let o = self.occurrences[lit.code()][idx];
            if !store.is_live(o.cid) {
                continue;
            }
            let st = &mut self.states[o.cid.index()];
            st.curr += o.weight as i64;
            if o.term == st.cursor {
                Self::advance_cursor(st, store, o.cid, trail);
            }
        }
        let neg = (!lit).code();
        for idx in 0..self.occurrences[neg].len() {
            let o = self.occurrences[neg][idx];
            if !store.is_live(o.cid) {
                continue;
            }
            let st = &mut self.states[o.cid.index()];
            st.poss -= o.weight as i64;
            if o.term == st.cursor {
                Self::advance_cursor(st, store, o.cid, trail);
            }
        }
    }

    pub(crate) fn on_unassign(&mut self, lit: Lit, store: &ConstraintStore) {
        for o in &self.occurrences[lit.code()] {
            if !store.is_live(o.cid) {
                continue;
            }
            let st = &mut self.states[o.cid.index()];
            st.curr -= o.weight as i64;
            st.cursor = st.cursor.min(o.term);
        }
        for o in &self.occurrences[(!lit).code()] {
            if !store.is_live(o.cid) {
                continue;
            }
            let st = &mut self.states[o.cid.index()];
            st.poss += o.weight as i64;
            st.cursor = st.cursor.min(o.term);
        }
    }

    fn assign(&mut self, lit: Lit, reason: Reason, store: &ConstraintStore, trail: &mut Trail) {
        trail.push(lit, reason);
        self.on_assign(lit, store, trail);
    }

    /// Applies the weight test to one constraint, forcing every unvalued literal heavier than
    /// `poss`.
    fn check(
        &mut self,
        cid: ConstraintId,
        store: &ConstraintStore,
        trail: &mut Trail,
    ) -> Result<(), ConstraintId> {
        let st = self.states[cid.index()];
        if st.poss < 0 {
            return Err(cid);
        }
        let terms = store.constraint(cid).terms();
        let mut i = st.cursor as usize;
        while i < terms.len() && terms[i].weight as i64 > st.poss {
            if trail.is_unassigned(terms[i].lit.var()) {
                self.assign(terms[i].lit, Reason::Constraint(cid), store, trail);
            }
            i += 1;
        }
        Ok(())
    }

    /// Examines every constraint in which `lit` (now true) falsified a term.
    pub(crate) fn propagate_lit(
        &mut self,
        lit: Lit,
        store: &ConstraintStore,
        trail: &mut Trail,
    ) -> Result<(), ConstraintId> {
        let neg = (!lit).code();
        for idx in 0..self.occurrences[neg].len() {
            let cid = self.occurrences[neg][idx].cid;
            if !store.is_live(cid) {
                continue;
            }
            self.check(cid, store, trail)?;
        }
        Ok(())
    }
}
