use crate::model::LinearConstraint;

/// Dense handle of a stored constraint. Handles are never reused; deleting a constraint
/// leaves an empty slot behind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstraintId(pub u32);

impl ConstraintId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone)]
pub struct StoredConstraint {
    pub constraint: LinearConstraint,
    pub learned: bool,
    pub activity: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ConstraintStore {
    slots: Vec<Option<StoredConstraint>>,
    live: usize,
}

impl ConstraintStore {
    pub fn new() -> ConstraintStore {
        ConstraintStore::default()
    }

    pub fn insert(&mut self, constraint: LinearConstraint, learned: bool) -> ConstraintId {
        let id = ConstraintId(self.slots.len() as u32);
        self.slots.push(Some(StoredConstraint {
            constraint,
            learned,
            activity: 0.0,
        }));
        self.live += 1;
        id
    }

    pub fn remove(&mut self, id: ConstraintId) -> Option<StoredConstraint> {
        let out = self.slots.get_mut(id.index()).and_then(Option::take);
        if out.is_some() {
            self.live -= 1;
        }
        out
    }

    pub fn get(&self, id: ConstraintId) -> Option<&StoredConstraint> {
        self.slots.get(id.index()).and_then(Option::as_ref)
    }

    pub fn get_mut(&mut self, id: ConstraintId) -> Option<&mut StoredConstraint> {
        self.slots.get_mut(id.index()).and_then(Option::as_mut)
    }

    /// The constraint behind a live handle.
    ///
    /// Panics if `id` has been deleted.
    pub fn constraint(&self, id: ConstraintId) -> &LinearConstraint {
        &self.get(id).expect("live constraint").constraint
    }

    pub fn is_live(&self, id: ConstraintId) -> bool {
        self.get(id).is_some()
    }

    /// Number of live constraints.
    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    /// Total number of handles ever issued, including deleted ones.
    pub fn capacity(&self) -> usize {
        self.slots.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ConstraintId, &StoredConstraint)> {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.as_ref().map(|s| (ConstraintId(i as u32), s)))
    }
}
