use crate::model::{Lit, Var};
use crate::propagate::ConstraintId;

/// Why a literal is on the trail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reason {
    Decision,
    Constraint(ConstraintId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrailEntry {
    pub lit: Lit,
    pub level: u32,
    pub reason: Reason,
}

/// The partial assignment as an ordered stack of true literals.
#[derive(Debug, Clone)]
pub struct Trail {
    entries: Vec<TrailEntry>,
    level_starts: Vec<usize>,
    values: Vec<Option<bool>>,
    levels: Vec<u32>,
    positions: Vec<u32>,
    reasons: Vec<Reason>,
}

impl Trail {
    pub fn new(num_vars: u32) -> Trail {
        let n = num_vars as usize;
        Trail {
            entries: Vec::with_capacity(n),
            level_starts: Vec::new(),
            values: vec![None; n],
            levels: vec![0; n],
            positions: vec![0; n],
            reasons: vec![Reason::Decision; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    pub fn entries(&self) -> &[TrailEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn decision_level(&self) -> u32 {
        self.level_starts.len() as u32
    }

    /// Index of the first trail entry at `level` (level ≥ 1).
    pub fn level_start(&self, level: u32) -> usize {
        if level == 0 {
            0
        } else {
            self.level_starts
                .get(level as usize - 1)
                .copied()
                .unwrap_or(self.entries.len())
        }
    }

    pub fn var_value(&self, var: Var) -> Option<bool> {
        self.values[var.index()]
    }

    /// `Some(true)` if `lit` is on the trail, `Some(false)` if its negation is.
    pub fn value(&self, lit: Lit) -> Option<bool> {
        self.values[lit.var().index()].map(|v| v == lit.is_positive())
    }

    pub fn is_true(&self, lit: Lit) -> bool {
        self.value(lit) == Some(true)
    }

    pub fn is_false(&self, lit: Lit) -> bool {
        self.value(lit) == Some(false)
    }

    pub fn is_unassigned(&self, var: Var) -> bool {
        self.values[var.index()].is_none()
    }

    pub fn level(&self, var: Var) -> u32 {
        self.levels[var.index()]
    }

    pub fn position(&self, var: Var) -> usize {
        self.positions[var.index()] as usize
    }

    pub fn reason(&self, var: Var) -> Reason {
        self.reasons[var.index()]
    }

    /// Value of `lit` when only assignments at levels `≤ level` are kept.
    pub fn value_at_level(&self, lit: Lit, level: u32) -> Option<bool> {
        match self.value(lit) {
            Some(v) if self.level(lit.var()) <= level => Some(v),
            _ => None,
        }
    }

    pub fn new_level(&mut self) {
        self.level_starts.push(self.entries.len());
    }

    /// Puts `lit` on the trail at the current decision level.
    pub fn push(&mut self, lit: Lit, reason: Reason) {
        let v = lit.var().index();
        debug_assert!(self.values[v].is_none(), "{lit} assigned twice");
        self.values[v] = Some(lit.is_positive());
        self.levels[v] = self.decision_level();
        self.positions[v] = self.entries.len() as u32;
        self.reasons[v] = reason;
        self.entries.push(TrailEntry {
            lit,
            level: self.decision_level(),
            reason,
        });
    }

    /// Opens a new level and assigns `lit` as its decision.
    pub fn decide(&mut self, lit: Lit) {
        self.new_level();
        self.push(lit, Reason::Decision);
    }

    /// Removes every entry above `level`, most recent first, handing each to `on_pop` after it
    /// has been unassigned.
    pub fn backtrack_to(&mut self, level: u32, mut on_pop: impl FnMut(Lit)) {
        if level >= self.decision_level() {
            return;
        }
        let start = self.level_starts[level as usize];
        while self.entries.len() > start {
            let e = self.entries.pop().expect("non-empty");
            self.values[e.lit.var().index()] = None;
            on_pop(e.lit);
        }
        self.level_starts.truncate(level as usize);
    }

    /// Current assignment as a dense vector (unassigned variables are `None`).
    pub fn assignment(&self) -> &[Option<bool>] {
        &self.values
    }

    pub fn is_complete(&self) -> bool {
        self.entries.len() == self.values.len()
    }
}
