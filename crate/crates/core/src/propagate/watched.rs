//! Watched-literal propagation. Clauses keep exactly two watches; general constraints keep a
//! watching set `S` with `Σ_S − max_S ≥ k` over non-false terms, and fall back to watching all
//! of their terms while no such set exists.

use crate::model::Lit;
use crate::propagate::{ConstraintId, ConstraintStore, Reason, Trail};

#[derive(Debug, Clone, Copy)]
struct Watch {
    cid: ConstraintId,
    term: u32,
    /// For clause watches, a literal of the clause whose truth makes the visit unnecessary.
    blocker: Option<Lit>,
}

#[derive(Debug, Clone)]
enum WatchState {
    Detached,
    Clause([u32; 2]),
    General {
        watched: Vec<bool>,
        in_list: Vec<bool>,
        all: bool,
    },
}

enum Visit {
    Keep,
    Block(Lit),
    Drop,
    Conflict,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct WatchedEngine {
    watches: Vec<Vec<Watch>>,
    states: Vec<WatchState>,
}

impl WatchedEngine {
    pub(crate) fn new(num_vars: u32) -> WatchedEngine {
        WatchedEngine {
            watches: vec![Vec::new(); 2 * num_vars as usize],
            states: Vec::new(),
        }
    }

    /// Literals currently watched in a constraint.
    pub(crate) fn watched_lits(&self, cid: ConstraintId, store: &ConstraintStore) -> Vec<Lit> {
        let Some(sc) = store.get(cid) else {
            return Vec::new();
        };
        let terms = sc.constraint.terms();
        match self.states.get(cid.index()) {
            Some(WatchState::Clause(w)) => w.iter().map(|&i| terms[i as usize].lit).collect(),
            Some(WatchState::General { watched, .. }) => terms
                .iter()
                .zip(watched)
                .filter(|(_, &w)| w)
                .map(|(t, _)| t.lit)
                .collect(),
            _ => Vec::new(),
        }
    }

    pub(crate) fn watches_all(&self, cid: ConstraintId) -> bool {
        matches!(
            self.states.get(cid.index()),
            Some(WatchState::General { all: true, .. })
        )
    }

    pub(crate) fn attach(
        &mut self,
        cid: ConstraintId,
        store: &ConstraintStore,
        trail: &mut Trail,
    ) -> Result<(), ConstraintId> {
        if self.states.len() <= cid.index() {
            self.states.resize(cid.index() + 1, WatchState::Detached);
        }
        let c = store.constraint(cid);
        if c.is_clause() && c.len() >= 2 {
            let terms = c.terms();
            let mut non_false: Vec<u32> = Vec::with_capacity(2);
            for (i, t) in terms.iter().enumerate() {
                if !trail.is_false(t.lit) {
                    non_false.push(i as u32);
                    if non_false.len() == 2 {
                        break;
                    }
                }
            }
            let mut falses: Vec<u32> = (0..terms.len() as u32)
                .filter(|&i| trail.is_false(terms[i as usize].lit))
                .collect();
            falses.sort_by_key(|&i| std::cmp::Reverse(trail.position(terms[i as usize].lit.var())));
            let mut chosen = non_false.clone();
            chosen.extend(falses.iter().take(2 - non_false.len().min(2)));
            let w = [chosen[0], chosen[1]];
            self.states[cid.index()] = WatchState::Clause(w);
            for (j, &i) in w.iter().enumerate() {
                let blocker = Some(terms[w[1 - j] as usize].lit);
                self.watches[terms[i as usize].lit.code()].push(Watch { cid, term: i, blocker });
            }
            return match non_false.len() {
                0 => Err(cid),
                1 => {
                    let l = terms[w[0] as usize].lit;
                    if trail.is_unassigned(l.var()) {
                        trail.push(l, Reason::Constraint(cid));
                    }
                    Ok(())
                }
                _ => Ok(()),
            };
        }
        self.states[cid.index()] = WatchState::General {
            watched: vec![false; c.len()],
            in_list: vec![false; c.len()],
            all: false,
        };
        self.repair(cid, store, trail)
    }

    /// Restores the watching-set condition for a general constraint, or watches all terms and
    /// propagates from `poss` when that is impossible.
    fn repair(
        &mut self,
        cid: ConstraintId,
        store: &ConstraintStore,
        trail: &mut Trail,
    ) -> Result<(), ConstraintId> {
        let c = store.constraint(cid);
        let terms = c.terms();
        let k = c.degree() as i64;
        let WatchState::General {
            watched,
            in_list,
            all,
        } = &mut self.states[cid.index()]
        else {
            unreachable!("repair on a clause watch");
        };
        let watches = &mut self.watches;
        let mut sum = 0i64;
        let mut max = 0i64;
        for (i, t) in terms.iter().enumerate() {
            if watched[i] && !trail.is_false(t.lit) {
                sum += t.weight as i64;
                max = max.max(t.weight as i64);
            }
        }
        if sum - max < k {
            for (i, t) in terms.iter().enumerate() {
                if watched[i] || trail.is_false(t.lit) {
                    continue;
                }
                watched[i] = true;
                if !in_list[i] {
                    in_list[i] = true;
                    watches[t.lit.code()].push(Watch { cid, term: i as u32, blocker: None });
                }
                sum += t.weight as i64;
                max = max.max(t.weight as i64);
                if sum - max >= k {
                    break;
                }
            }
        }
        if sum - max >= k {
            for (i, t) in terms.iter().enumerate() {
                if watched[i] && trail.is_false(t.lit) {
                    watched[i] = false;
                }
            }
            *all = false;
            return Ok(());
        }
        for (i, t) in terms.iter().enumerate() {
            watched[i] = true;
            if !in_list[i] {
                in_list[i] = true;
                watches[t.lit.code()].push(Watch { cid, term: i as u32, blocker: None });
            }
        }
        *all = true;
        let poss = sum - k;
        if poss < 0 {
            return Err(cid);
        }
        for t in terms {
            if t.weight as i64 <= poss {
                break;
            }
            if trail.is_unassigned(t.lit.var()) {
                trail.push(t.lit, Reason::Constraint(cid));
            }
        }
        Ok(())
    }

    fn visit(
        &mut self,
        w: Watch,
        store: &ConstraintStore,
        trail: &mut Trail,
    ) -> Visit {
        let cid = w.cid;
        match &mut self.states[cid.index()] {
            WatchState::Detached => Visit::Drop,
            WatchState::Clause(ws) => {
                let me = if ws[0] == w.term {
                    0
                } else if ws[1] == w.term {
                    1
                } else {
                    return Visit::Drop;
                };
                let other = ws[1 - me] as usize;
                let terms = store.constraint(cid).terms();
                let ol = terms[other].lit;
                if trail.is_true(ol) {
                    return Visit::Block(ol);
                }
                for (r, t) in terms.iter().enumerate() {
                    let r32 = r as u32;
                    if r32 != ws[0] && r32 != ws[1] && !trail.is_false(t.lit) {
                        ws[me] = r32;
                        let blocker = Some(ol);
                        self.watches[t.lit.code()].push(Watch { cid, term: r32, blocker });
                        return Visit::Drop;
                    }
                }
                if trail.is_false(ol) {
                    Visit::Conflict
                } else {
                    trail.push(ol, Reason::Constraint(cid));
                    Visit::Block(ol)
                }
            }
            WatchState::General {
                watched, in_list, ..
            } => {
                let t = w.term as usize;
                if !watched[t] {
                    in_list[t] = false;
                    return Visit::Drop;
                }
                let res = self.repair(cid, store, trail);
                let WatchState::General {
                    watched, in_list, ..
                } = &mut self.states[cid.index()]
                else {
                    unreachable!()
                };
                if res.is_err() {
                    return Visit::Conflict;
                }
                if watched[t] {
                    Visit::Keep
                } else {
                    in_list[t] = false;
                    Visit::Drop
                }
            }
        }
    }

    /// Visits the watches of `!lit` now that `lit` is true.
    pub(crate) fn propagate_lit(
        &mut self,
        lit: Lit,
        store: &ConstraintStore,
        trail: &mut Trail,
    ) -> Result<(), ConstraintId> {
        let code = (!lit).code();
        let mut list = std::mem::take(&mut self.watches[code]);
        let mut keep = 0;
        let mut result = Ok(());
        for i in 0..list.len() {
            let mut w = list[i];
            if result.is_err() || w.blocker.is_some_and(|b| trail.is_true(b)) {
                list[keep] = w;
                keep += 1;
                continue;
            }
            if !store.is_live(w.cid) {
                continue;
            }
            if result.is_err() {
                list[keep] = w;
                keep += 1;
                continue;
            }
            match self.visit(w, store, trail) {
                Visit::Keep => {
                    list[keep] = w;
                    keep += 1;
                }
                Visit::Block(b) => {
                    w.blocker = Some(b);
                    list[keep] = w;
                    keep += 1;
                }
                Visit::Drop => {}
                Visit::Conflict => {
                    list[keep] = w;
                    keep += 1;
                    result = Err(w.cid);
                }
            }
        }
        list.truncate(keep);
        let appended = std::mem::take(&mut self.watches[code]);
        list.extend(appended);
        self.watches[code] = list;
        result
    }

    pub(crate) fn detach(&mut self, cid: ConstraintId) {
        if let Some(s) = self.states.get_mut(cid.index()) {
            *s = WatchState::Detached;
        }
    }

    pub(crate) fn compact(&mut self, store: &ConstraintStore) {
        for list in &mut self.watches {
            list.retain(|w| store.is_live(w.cid));
        }
    }
}
