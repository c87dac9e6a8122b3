//! DPLL search with conflict-driven learning and backjumping.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::infer::{
    analyze_conflict, is_asserting_at, Activity, Analysis, LearnPath, LearnedDb,
    DEFAULT_LENGTH_BOUND, DEFAULT_RELEVANCE_BOUND,
};
use crate::model::{Instance, LinearConstraint, Lit, Model, Var};
use crate::preprocess::{strengthen_pass, StrengthenConfig, StrengthenStats};
use crate::propagate::{curr_poss, ConstraintId, EngineKind, Propagator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Heuristic {
    Moms,
    Probe,
    #[default]
    Activity,
    Recent,
}

impl Heuristic {
    pub const ALL: [Heuristic; 4] = [
        Heuristic::Moms,
        Heuristic::Probe,
        Heuristic::Activity,
        Heuristic::Recent,
    ];
}

impl FromStr for Heuristic {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "moms" => Ok(Heuristic::Moms),
            "probe" => Ok(Heuristic::Probe),
            "activity" => Ok(Heuristic::Activity),
            "recent" => Ok(Heuristic::Recent),
            _ => Err(format!("unknown heuristic `{s}`")),
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Heuristic::Moms => "moms",
            Heuristic::Probe => "probe",
            Heuristic::Activity => "activity",
            Heuristic::Recent => "recent",
        })
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineKind::Counter => "counter",
            EngineKind::Watched => "watched",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub heuristic: Heuristic,
    pub engine: EngineKind,
    pub relevance_bound: i64,
    pub length_bound: usize,
    /// Learned-constraint deletion runs every this many conflicts.
    pub reduce_interval: u64,
    pub preprocess: bool,
    pub strengthen: StrengthenConfig,
    pub seed: u64,
    /// Probability of a uniformly random decision.
    pub random_freq: f64,
    pub restarts: bool,
    pub restart_first: u64,
    pub restart_factor: f64,
    pub decay_factor: f64,
    pub decay_interval: u64,
    /// Number of MOMS candidates examined by the probe heuristic.
    pub probe_candidates: usize,
    pub max_decisions: Option<u64>,
    pub max_conflicts: Option<u64>,
    pub time_limit: Option<Duration>,
    /// Keep a copy of every learned constraint in the result.
    pub record_learned: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            heuristic: Heuristic::default(),
            engine: EngineKind::default(),
            relevance_bound: DEFAULT_RELEVANCE_BOUND,
            length_bound: DEFAULT_LENGTH_BOUND,
            reduce_interval: 200,
            preprocess: false,
            strengthen: StrengthenConfig::default(),
            seed: 0,
            random_freq: 0.0,
            restarts: true,
            restart_first: 100,
            restart_factor: 1.5,
            decay_factor: 0.5,
            decay_interval: 256,
            probe_candidates: 5,
            max_decisions: None,
            max_conflicts: None,
            time_limit: None,
            record_learned: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    Decisions,
    Conflicts,
    Time,
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Limit::Decisions => "decisions",
            Limit::Conflicts => "conflicts",
            Limit::Time => "time",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
    Unknown(Limit),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Stats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub learned: u64,
    pub clausal_fallbacks: u64,
    pub deleted: u64,
    pub restarts: u64,
    pub max_db_size: usize,
    pub wall_time: Duration,
    pub preprocess: Option<StrengthenStats>,
}

/// A learned constraint together with the assignment it was derived under.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedRecord {
    pub constraint: LinearConstraint,
    pub path: LearnPath,
    pub assignment: Vec<Option<bool>>,
    pub backjump: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: Status,
    pub model: Option<Model>,
    pub stats: Stats,
    pub learned: Vec<LearnedRecord>,
}

enum Branch {
    Decide(Lit),
    Complete,
}

pub struct Solver {
    prop: Propagator,
    db: LearnedDb,
    activity: Activity,
    config: SolverConfig,
    stats: Stats,
    rng: ChaCha8Rng,
    learned: Vec<LearnedRecord>,
    unsat: bool,
    pending_conflict: Option<ConstraintId>,
    start: Instant,
}

impl Solver {
    pub fn new(instance: &Instance, config: SolverConfig) -> Solver {
        let mut prop = Propagator::new(instance.num_vars, config.engine);
        let mut unsat = false;
        let mut pending_conflict = None;
        for c in &instance.constraints {
            let (id, res) = prop.add_constraint(c.clone(), false);
            if res.is_err() {
                pending_conflict.get_or_insert(id);
            }
        }
        if c_is_trivially_unsat(instance) {
            unsat = true;
        }
        Solver {
            activity: Activity::from_constraints(instance.num_vars, &instance.constraints),
            db: LearnedDb::new(config.relevance_bound, config.length_bound),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            prop,
            config,
            stats: Stats::default(),
            learned: Vec::new(),
            unsat,
            pending_conflict,
            start: Instant::now(),
        }
    }

    pub fn propagator(&self) -> &Propagator {
        &self.prop
    }

    pub fn activity(&self) -> &Activity {
        &self.activity
    }

    fn limit_hit(&self) -> Option<Limit> {
        if self.config.max_decisions.is_some_and(|m| self.stats.decisions >= m) {
            return Some(Limit::Decisions);
        }
        if self.config.max_conflicts.is_some_and(|m| self.stats.conflicts >= m) {
            return Some(Limit::Conflicts);
        }
        if self.config.time_limit.is_some_and(|t| self.start.elapsed() >= t) {
            return Some(Limit::Time);
        }
        None
    }

    /// Handles a conflict; returns `false` once unsatisfiability is established.
    fn resolve_conflict(&mut self, mut conflict: ConstraintId) -> bool {
        loop {
            self.stats.conflicts += 1;
            let learned = match analyze_conflict(&self.prop, conflict) {
                Analysis::Unsatisfiable => return false,
                Analysis::Learned(l) => l,
            };
            if learned.path == LearnPath::Clausal {
                self.stats.clausal_fallbacks += 1;
            }
            if self.config.record_learned {
                self.learned.push(LearnedRecord {
                    constraint: learned.constraint.clone(),
                    path: learned.path,
                    assignment: self.prop.trail().assignment().to_vec(),
                    backjump: learned.backjump,
                });
            }
            self.prop.backtrack_to(learned.backjump);
            debug_assert!(is_asserting_at(
                &learned.constraint,
                self.prop.trail(),
                learned.backjump
            ));
            self.activity.bump(learned.constraint.lits());
            if self.config.decay_interval > 0 && self.stats.conflicts % self.config.decay_interval == 0 {
                self.activity.decay(self.config.decay_factor);
            }
            let (id, res) = self.prop.add_constraint(learned.constraint, true);
            self.db.push(id);
            self.stats.learned += 1;
            self.stats.max_db_size = self.stats.max_db_size.max(self.db.len());
            if self.config.reduce_interval > 0 && self.stats.conflicts % self.config.reduce_interval == 0 {
                self.stats.deleted += self.db.reduce(&mut self.prop) as u64;
            }
            match res {
                Ok(()) => return true,
                Err(c) => {
                    if self.prop.trail().decision_level() == 0 {
                        return false;
                    }
                    conflict = c;
                }
            }
        }
    }

    pub fn solve(&mut self) -> SolveResult {
        self.start = Instant::now();
        let status = self.run();
        self.stats.propagations = self.prop.propagations();
        self.stats.wall_time = self.start.elapsed();
        let model = (status == Status::Sat).then(|| {
            Model::new(
                self.prop
                    .trail()
                    .assignment()
                    .iter()
                    .map(|v| v.expect("complete assignment"))
                    .collect(),
            )
        });
        SolveResult {
            status,
            model,
            stats: self.stats.clone(),
            learned: std::mem::take(&mut self.learned),
        }
    }

    fn run(&mut self) -> Status {
        if self.unsat {
            return Status::Unsat;
        }
        if let Some(c) = self.pending_conflict.take() {
            if self.prop.trail().decision_level() == 0 {
                return Status::Unsat;
            }
            if !self.resolve_conflict(c) {
                return Status::Unsat;
            }
        }
        let mut restart_limit = self.config.restart_first as f64;
        let mut conflicts_since_restart = 0u64;
        loop {
            match self.prop.propagate() {
                Err(conflict) => {
                    if self.prop.trail().decision_level() == 0 {
                        self.stats.conflicts += 1;
                        return Status::Unsat;
                    }
                    conflicts_since_restart += 1;
                    if !self.resolve_conflict(conflict) {
                        return Status::Unsat;
                    }
                }
                Ok(()) => {
                    if let Some(limit) = self.limit_hit() {
                        return Status::Unknown(limit);
                    }
                    if self.config.restarts && conflicts_since_restart as f64 >= restart_limit {
                        conflicts_since_restart = 0;
                        restart_limit *= self.config.restart_factor;
                        self.stats.restarts += 1;
                        self.prop.backtrack_to(0);
                        continue;
                    }
                    match self.pick_branch() {
                        Branch::Complete => return Status::Sat,
                        Branch::Decide(l) => {
                            self.stats.decisions += 1;
                            self.prop.decide(l);
                        }
                    }
                }
            }
        }
    }

    fn pick_branch(&mut self) -> Branch {
        if self.prop.trail().is_complete() {
            return Branch::Complete;
        }
        if self.config.random_freq > 0.0 && self.rng.gen_bool(self.config.random_freq.min(1.0)) {
            let free: Vec<Var> = (0..self.prop.num_vars() as usize)
                .map(Var::from_index)
                .filter(|&v| self.prop.trail().is_unassigned(v))
                .collect();
            let v = free[self.rng.gen_range(0..free.len())];
            return Branch::Decide(v.negative());
        }
        let lit = match self.config.heuristic {
            Heuristic::Moms => pick_branch_moms(&self.prop),
            Heuristic::Probe => pick_branch_probe(&mut self.prop, self.config.probe_candidates),
            Heuristic::Activity => pick_branch_activity(&self.prop, &self.activity),
            Heuristic::Recent => pick_branch_recent(&self.prop, &self.db, &self.activity),
        };
        Branch::Decide(lit.expect("an unassigned variable exists"))
    }
}

fn c_is_trivially_unsat(instance: &Instance) -> bool {
    instance.constraints.iter().any(|c| c.is_contradiction())
}

/// Unsatisfied original constraints with the fewest unvalued literals, ranked by variable
/// occurrence count; ties go to the lowest variable.
fn moms_ranking(prop: &Propagator) -> Vec<(Var, u64, i64)> {
    let trail = prop.trail();
    let mut best_size = usize::MAX;
    // Per variable: (occurrences, positive minus negative occurrences).
    let n = prop.num_vars() as usize;
    let mut counts = vec![(0u64, 0i64); n];
    let mut touched: Vec<usize> = Vec::new();
    for (_, sc) in prop.store().iter() {
        if sc.learned {
            continue;
        }
        let c = &sc.constraint;
        let (curr, _) = curr_poss(c, trail);
        if curr >= 0 {
            continue;
        }
        let size = c.lits().filter(|l| trail.is_unassigned(l.var())).count();
        if size == 0 || size > best_size {
            continue;
        }
        if size < best_size {
            best_size = size;
            for &v in &touched {
                counts[v] = (0, 0);
            }
            touched.clear();
        }
        for l in c.lits().filter(|l| trail.is_unassigned(l.var())) {
            let v = l.var().index();
            if counts[v].0 == 0 {
                touched.push(v);
            }
            counts[v].0 += 1;
            counts[v].1 += if l.is_positive() { 1 } else { -1 };
        }
    }
    let mut ranked: Vec<(Var, u64, i64)> = touched
        .into_iter()
        .map(|v| (Var::from_index(v), counts[v].0, counts[v].1))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
}

fn first_unassigned(prop: &Propagator) -> Option<Var> {
    (0..prop.num_vars() as usize)
        .map(Var::from_index)
        .find(|&v| prop.trail().is_unassigned(v))
}

/// Maximum occurrences in constraints of minimum size; polarity follows the more frequent sign.
pub fn pick_branch_moms(prop: &Propagator) -> Option<Lit> {
    match moms_ranking(prop).first() {
        Some(&(v, _, balance)) => Some(Lit::new(v, balance >= 0)),
        None => first_unassigned(prop).map(Var::positive),
    }
}

/// Literals forced by deciding `lit`, or `None` if that conflicts.
fn probe_count(prop: &mut Propagator, lit: Lit) -> Option<usize> {
    let level = prop.trail().decision_level();
    let before = prop.trail().len();
    prop.decide(lit);
    let res = prop.propagate();
    let forced = prop.trail().len() - before - 1;
    prop.backtrack_to(level);
    res.ok().map(|()| forced)
}

/// Tries both polarities of the leading MOMS candidates and keeps the one whose propagations
/// score best (product, then sum). A polarity that conflicts yields its negation.
pub fn pick_branch_probe(prop: &mut Propagator, candidates: usize) -> Option<Lit> {
    let ranking = moms_ranking(prop);
    let mut best: Option<(Lit, usize, usize)> = None;
    for &(v, _, balance) in ranking.iter().take(candidates.max(1)) {
        let pos = probe_count(prop, v.positive());
        let Some(pos) = pos else {
            return Some(v.negative());
        };
        let Some(neg) = probe_count(prop, v.negative()) else {
            return Some(v.positive());
        };
        let score = ((pos + 1) * (neg + 1), pos + neg);
        let lit = if pos > neg || (pos == neg && balance >= 0) {
            v.positive()
        } else {
            v.negative()
        };
        if best.is_none_or(|(_, p, s)| score > (p, s)) {
            best = Some((lit, score.0, score.1));
        }
    }
    match best {
        Some((lit, p, _)) if p > 1 => Some(lit),
        _ => pick_branch_moms(prop),
    }
}

pub fn pick_branch_activity(prop: &Propagator, activity: &Activity) -> Option<Lit> {
    activity.best(prop.trail())
}

/// Branches inside the most recently learned constraint that is not yet satisfied.
pub fn pick_branch_recent(prop: &Propagator, db: &LearnedDb, activity: &Activity) -> Option<Lit> {
    let trail = prop.trail();
    for &id in db.ids().iter().rev() {
        let Some(sc) = prop.store().get(id) else {
            continue;
        };
        if curr_poss(&sc.constraint, trail).0 >= 0 {
            continue;
        }
        let mut best: Option<(Lit, f64)> = None;
        for l in sc.constraint.lits() {
            if !trail.is_unassigned(l.var()) {
                continue;
            }
            let s = activity.score(l);
            let better = match best {
                None => true,
                Some((b, bs)) => s > bs || (s == bs && l.var() < b.var()),
            };
            if better {
                best = Some((l, s));
            }
        }
        if best.is_some() {
            return best.map(|(l, _)| l);
        }
    }
    pick_branch_activity(prop, activity)
}

/// Solves `instance`, running the strengthening pass first when configured.
pub fn solve(instance: &Instance, config: &SolverConfig) -> SolveResult {
    let start = Instant::now();
    let (work, pre) = if config.preprocess {
        let (i, s) = strengthen_pass(instance, &config.strengthen);
        (i, Some(s))
    } else {
        (instance.clone(), None)
    };
    let mut config = config.clone();
    if let Some(t) = config.time_limit {
        config.time_limit = Some(t.saturating_sub(start.elapsed()));
    }
    let mut solver = Solver::new(&work, config);
    let mut result = solver.solve();
    result.stats.preprocess = pre;
    result.stats.wall_time = start.elapsed();
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::lit;

    fn clause(ls: &[i64]) -> LinearConstraint {
        LinearConstraint::clause(ls.iter().map(|&l| lit(l))).unwrap()
    }

    fn instance(n: u32, cs: Vec<LinearConstraint>) -> Instance {
        let mut i = Instance::new(n);
        for c in cs {
            i.push(c).unwrap();
        }
        i
    }

    fn configs() -> Vec<SolverConfig> {
        let mut out = Vec::new();
        for heuristic in Heuristic::ALL {
            for engine in [EngineKind::Counter, EngineKind::Watched] {
                for preprocess in [false, true] {
                    out.push(SolverConfig {
                        heuristic,
                        engine,
                        preprocess,
                        ..SolverConfig::default()
                    });
                }
            }
        }
        out
    }

    #[test]
    fn immediate_conflict() {
        let i = instance(2, vec![clause(&[1, 2]), clause(&[-1]), clause(&[-2])]);
        for c in configs() {
            assert_eq!(solve(&i, &c).status, Status::Unsat);
        }
    }

    #[test]
    fn small_pigeonhole() {
        // 3 pigeons, 2 holes; p_ij = (i-1)*2 + j
        let p = |i: i64, j: i64| (i - 1) * 2 + j;
        let mut cs = Vec::new();
        for i in 1..=3 {
            cs.push(clause(&[p(i, 1), p(i, 2)]));
        }
        for j in 1..=2 {
            for a in 1..=3 {
                for b in a + 1..=3 {
                    cs.push(clause(&[-p(a, j), -p(b, j)]));
                }
            }
        }
        let i = instance(6, cs);
        for c in configs() {
            assert_eq!(solve(&i, &c).status, Status::Unsat, "{c:?}");
        }
    }

    #[test]
    fn satisfiable_model_checks() {
        let i = instance(
            4,
            vec![
                clause(&[1, 2]),
                clause(&[-1, 3]),
                LinearConstraint::new([(2, lit(2)), (1, lit(3)), (1, lit(4))], 3).unwrap(),
            ],
        );
        for c in configs() {
            let r = solve(&i, &c);
            assert_eq!(r.status, Status::Sat);
            let m = r.model.unwrap();
            assert!(i.is_satisfied_by(&m.values));
        }
    }

    #[test]
    fn moms_prefers_most_frequent_in_shortest() {
        // x=1 y=2 z=3 w=4 v=5 u=6
        let i = instance(
            6,
            vec![clause(&[1, 2]), clause(&[1, 3]), clause(&[-2, 3]), clause(&[4, 5, 6])],
        );
        let s = Solver::new(&i, SolverConfig::default());
        // x and z both occur twice among the binary clauses; x is the lower index.
        assert_eq!(pick_branch_moms(s.propagator()), Some(lit(1)));
    }

    #[test]
    fn moms_degenerate_cases() {
        let i = instance(2, vec![clause(&[1, 2])]);
        let mut s = Solver::new(&i, SolverConfig::default());
        s.prop.decide(lit(1));
        s.prop.propagate().unwrap();
        assert_eq!(pick_branch_moms(&s.prop), Some(lit(2)));
        let i = instance(3, vec![]);
        let s = Solver::new(&i, SolverConfig::default());
        assert_eq!(pick_branch_moms(s.propagator()), Some(lit(1)));
    }

    #[test]
    fn probe_counts_propagations() {
        // x=1 a=2 b=3 c=4 y=5 z=6
        let i = instance(
            6,
            vec![clause(&[-1, 2]), clause(&[-1, 3]), clause(&[-1, 4]), clause(&[5, 6])],
        );
        let mut s = Solver::new(&i, SolverConfig::default());
        assert_eq!(probe_count(&mut s.prop, lit(1)), Some(3));
        let l = pick_branch_probe(&mut s.prop, 5).unwrap();
        assert_eq!(l.var(), lit(1).var());
        assert!(s.prop.trail().is_empty());
    }

    #[test]
    fn probe_failed_literal_gives_negation() {
        let i = instance(2, vec![clause(&[-1, 2]), clause(&[-1, -2])]);
        let mut s = Solver::new(&i, SolverConfig::default());
        assert_eq!(pick_branch_probe(&mut s.prop, 5), Some(lit(-1)));
    }

    #[test]
    fn probe_without_propagation_uses_moms() {
        let i = instance(4, vec![clause(&[1, 2, 3]), clause(&[2, 3, 4])]);
        let mut s = Solver::new(&i, SolverConfig::default());
        assert_eq!(pick_branch_probe(&mut s.prop, 5), pick_branch_moms(&s.prop));
    }

    #[test]
    fn activity_follows_learned_literals() {
        let i = instance(3, vec![]);
        let mut s = Solver::new(&i, SolverConfig::default());
        assert_eq!(pick_branch_activity(&s.prop, &s.activity), Some(lit(-1)));
        s.activity.bump(clause(&[-1, 2]).lits());
        s.activity.bump([lit(2)]);
        assert_eq!(pick_branch_activity(&s.prop, &s.activity), Some(lit(2)));
        s.activity.decay(0.5);
        assert_eq!(pick_branch_activity(&s.prop, &s.activity), Some(lit(2)));
    }

    #[test]
    fn recent_branches_in_newest_open_constraint() {
        let i = instance(4, vec![clause(&[3, 4])]);
        let mut s = Solver::new(&i, SolverConfig::default());
        assert_eq!(
            pick_branch_recent(&s.prop, &s.db, &s.activity),
            pick_branch_activity(&s.prop, &s.activity)
        );
        let (id, _) = s.prop.add_constraint(clause(&[-1, 2]), true);
        s.db.push(id);
        let l = pick_branch_recent(&s.prop, &s.db, &s.activity).unwrap();
        assert!(l == lit(-1) || l == lit(2));
        s.prop.decide(lit(2));
        s.prop.propagate().unwrap();
        assert_eq!(
            pick_branch_recent(&s.prop, &s.db, &s.activity),
            pick_branch_activity(&s.prop, &s.activity)
        );
    }

    #[test]
    fn limits_give_unknown() {
        let p = |i: i64, j: i64| (i - 1) * 6 + j;
        let mut cs = Vec::new();
        for i in 1..=7 {
            cs.push(clause(&(1..=6).map(|j| p(i, j)).collect::<Vec<_>>()));
        }
        for j in 1..=6 {
            for a in 1..=7 {
                for b in a + 1..=7 {
                    cs.push(clause(&[-p(a, j), -p(b, j)]));
                }
            }
        }
        let i = instance(42, cs);
        let r = solve(&i, &SolverConfig { max_decisions: Some(5), ..SolverConfig::default() });
        assert_eq!(r.status, Status::Unknown(Limit::Decisions));
        assert_eq!(r.stats.decisions, 5);
    }

    #[test]
    fn deterministic_for_seed() {
        let i = instance(
            5,
            vec![clause(&[1, 2, 3]), clause(&[-1, -2]), clause(&[-3, 4]), clause(&[-4, -5, 1])],
        );
        let config = SolverConfig { random_freq: 0.3, seed: 7, ..SolverConfig::default() };
        let a = solve(&i, &config);
        let b = solve(&i, &config);
        assert_eq!(a.model, b.model);
        assert_eq!(a.stats.decisions, b.stats.decisions);
        assert_eq!(a.stats.conflicts, b.stats.conflicts);
    }
}
