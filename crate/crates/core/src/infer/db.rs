use crate::infer::irrelevance;
use crate::model::{LinearConstraint, Lit};
use crate::propagate::{ConstraintId, Propagator, Reason, Trail};

pub const DEFAULT_RELEVANCE_BOUND: i64 = 3;
pub const DEFAULT_LENGTH_BOUND: usize = 50;

/// Learned constraints in the order they were learned, with the deletion bounds.
#[derive(Debug, Clone)]
pub struct LearnedDb {
    pub relevance_bound: i64,
    pub length_bound: usize,
    ids: Vec<ConstraintId>,
    max_size: usize,
}

impl Default for LearnedDb {
    fn default() -> Self {
        LearnedDb::new(DEFAULT_RELEVANCE_BOUND, DEFAULT_LENGTH_BOUND)
    }
}

/// Whether `id` is the reason of some literal on the trail.
pub fn is_locked(id: ConstraintId, c: &LinearConstraint, trail: &Trail) -> bool {
    c.lits()
        .any(|l| trail.is_true(l) && trail.reason(l.var()) == Reason::Constraint(id))
}

impl LearnedDb {
    pub fn new(relevance_bound: i64, length_bound: usize) -> LearnedDb {
        LearnedDb {
            relevance_bound,
            length_bound,
            ids: Vec::new(),
            max_size: 0,
        }
    }

    pub fn push(&mut self, id: ConstraintId) {
        self.ids.push(id);
        self.max_size = self.max_size.max(self.ids.len());
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Largest size the database has reached.
    pub fn max_size(&self) -> usize {
        self.max_size
    }

    /// Ids, oldest first.
    pub fn ids(&self) -> &[ConstraintId] {
        &self.ids
    }

    /// Whether a constraint would be deleted under the trail.
    pub fn should_delete(&self, c: &LinearConstraint, trail: &Trail) -> bool {
        irrelevance(c, trail) > self.relevance_bound && c.len() > self.length_bound
    }

    /// Deletes every unlocked learned constraint that is both too irrelevant and too long.
    /// Returns the number removed.
    pub fn reduce(&mut self, prop: &mut Propagator) -> usize {
        let mut doomed = Vec::new();
        self.ids.retain(|&id| {
            let c = prop.constraint(id);
            let delete = irrelevance(c, prop.trail()) > self.relevance_bound
                && c.len() > self.length_bound
                && !is_locked(id, c, prop.trail());
            if delete {
                doomed.push(id);
            }
            !delete
        });
        for &id in &doomed {
            prop.remove_constraint(id);
        }
        if !doomed.is_empty() {
            prop.compact();
        }
        doomed.len()
    }
}

/// Per-literal counters for the activity heuristics.
#[derive(Debug, Clone)]
pub struct Activity {
    scores: Vec<f64>,
}

impl Activity {
    pub fn new(num_vars: u32) -> Activity {
        Activity {
            scores: vec![0.0; 2 * num_vars as usize],
        }
    }

    /// Counters seeded with the number of occurrences of each literal.
    pub fn from_constraints<'a>(
        num_vars: u32,
        constraints: impl IntoIterator<Item = &'a LinearConstraint>,
    ) -> Activity {
        let mut a = Activity::new(num_vars);
        for c in constraints {
            a.bump(c.lits());
        }
        a
    }

    pub fn score(&self, lit: Lit) -> f64 {
        self.scores[lit.code()]
    }

    pub fn bump(&mut self, lits: impl IntoIterator<Item = Lit>) {
        for l in lits {
            self.scores[l.code()] += 1.0;
        }
    }

    /// Multiplies every counter by `factor`.
    pub fn decay(&mut self, factor: f64) {
        for s in &mut self.scores {
            *s *= factor;
        }
    }

    /// Unassigned literal with the highest counter; ties go to the lowest variable, then the
    /// negative literal.
    pub fn best(&self, trail: &Trail) -> Option<Lit> {
        let mut best: Option<(Lit, f64)> = None;
        for code in 0..self.scores.len() {
            // Visit ~x before x for each variable.
            let l = Lit::from_code(code ^ 1);
            if !trail.is_unassigned(l.var()) {
                continue;
            }
            let s = self.scores[l.code()];
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((l, s));
            }
        }
        best.map(|(l, _)| l)
    }
}
