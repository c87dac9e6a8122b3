//! Acceptance checks. Each criterion prints one `PASS` or `FAIL` line; the process exits with a
//! failure status if any criterion fails.
//!
//! Run with `cargo test -p pbsolve-core --test acceptance`; extra arguments select criteria
//! whose name contains one of them (`-- 2 tseitin`).

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pbsolve_core::families::{
    gen_pigeonhole_cnf, gen_pigeonhole_pb, gen_tseitin, random_gf2_system, random_mixed,
    ChargedGraph,
};
use pbsolve_core::infer::{analyze_conflict, irrelevance, pb_resolve, Analysis, LearnPath, Resolvent};
use pbsolve_core::model::{binomial, cardinality_to_cnf, DEFAULT_EXPANSION_CAP};
use pbsolve_core::oracle::{brute_force_sat, gf2_satisfied, implies, mod2_solve};
use pbsolve_core::preprocess::{strengthen_pass, strengthen_probe, ProbeOutcome, StrengthenConfig};
use pbsolve_core::propagate::{
    curr_poss, is_watching_set, unit_status, Propagator, Reason, Trail, UnitStatus,
};
use pbsolve_core::{
    solve, EngineKind, Heuristic, Instance, LinearConstraint, Lit, SolverConfig, Status, Var,
};

type Check = Result<String, String>;

fn lit(l: i64) -> Lit {
    let v = Var::new(l.unsigned_abs() as u32).unwrap();
    if l > 0 {
        v.positive()
    } else {
        v.negative()
    }
}

fn pb(terms: &[(u64, i64)], k: u64) -> LinearConstraint {
    LinearConstraint::new(terms.iter().map(|&(w, l)| (w, lit(l))), k).unwrap()
}

fn clause(ls: &[i64]) -> LinearConstraint {
    LinearConstraint::clause(ls.iter().map(|&l| lit(l))).unwrap()
}

/// Prints a constraint over at most five variables as `2a + b + ~d >= 2`.
fn letters(c: &LinearConstraint) -> String {
    let terms: Vec<String> = c
        .terms()
        .iter()
        .map(|t| {
            let name = (b'a' + (t.lit.var().get() - 1) as u8) as char;
            let sign = if t.lit.is_positive() { "" } else { "~" };
            match t.weight {
                1 => format!("{sign}{name}"),
                w => format!("{w}{sign}{name}"),
            }
        })
        .collect();
    format!("{} >= {}", terms.join(" + "), c.degree())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn trail_with(num_vars: u32, lits: &[i64]) -> Trail {
    let mut t = Trail::new(num_vars);
    for &l in lits {
        t.new_level();
        t.push(lit(l), Reason::Decision);
    }
    t
}

fn all_configs() -> Vec<SolverConfig> {
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

fn describe(c: &SolverConfig) -> String {
    format!("{}/{}/pre={}", c.heuristic, c.engine, c.preprocess)
}

fn pigeonhole_separation() -> Check {
    let cnf = SolverConfig::default();
    let mut decisions = Vec::new();
    for n in [8u32, 11] {
        let r = solve(&gen_pigeonhole_cnf(n), &cnf);
        ensure(r.status == Status::Unsat, || format!("hole{n} cnf: {:?}", r.status))?;
        decisions.push(r.stats.decisions);
    }
    let ratio = decisions[1] as f64 / decisions[0] as f64;
    ensure(ratio >= 10.0, || format!("hole11/hole8 = {}/{} = {ratio:.1} < 10", decisions[1], decisions[0]))?;

    let limited = SolverConfig {
        max_decisions: Some(1_000_000),
        time_limit: Some(Duration::from_secs(100)),
        ..cnf
    };
    let r12 = solve(&gen_pigeonhole_cnf(12), &limited);
    ensure(matches!(r12.status, Status::Unknown(_)), || {
        format!(
            "hole12 cnf finished within limits: {} decisions, {:.1}s",
            r12.stats.decisions,
            r12.stats.wall_time.as_secs_f64()
        )
    })?;

    let pre = SolverConfig {
        heuristic: Heuristic::Moms,
        preprocess: true,
        ..SolverConfig::default()
    };
    let mut pb_report = Vec::new();
    for n in [8u32, 20, 50] {
        let start = Instant::now();
        let r = solve(&gen_pigeonhole_pb(n), &pre);
        let elapsed = start.elapsed();
        ensure(r.status == Status::Unsat, || format!("hole{n} pb: {:?}", r.status))?;
        ensure(r.stats.decisions <= 10 * u64::from(n), || {
            format!("hole{n} pb: {} decisions > {}", r.stats.decisions, 10 * n)
        })?;
        ensure(elapsed < Duration::from_secs(10), || format!("hole{n} pb: {elapsed:?}"))?;
        pb_report.push(format!("hole{n} {} in {:.2}s", r.stats.decisions, elapsed.as_secs_f64()));
    }
    Ok(format!(
        "cnf hole8 {} hole11 {} (ratio {ratio:.1}), hole12 stopped at {} decisions / {:.1}s; pb+strengthening: {}",
        decisions[0],
        decisions[1],
        r12.stats.decisions,
        r12.stats.wall_time.as_secs_f64(),
        pb_report.join(", ")
    ))
}

fn worked_identities() -> Check {
    // a=1 b=2 c=3 d=4 e=5
    let sum = pb_resolve(&pb(&[(1, 1), (1, 2), (1, 3)], 2), &pb(&[(1, 1), (1, -3), (1, 4)], 1), lit(3).var())
        .map_err(|e| e.to_string())?;
    let Resolvent::Constraint(sum) = sum else {
        return Err("resolvent is a tautology".into());
    };
    ensure(letters(&sum) == "2a + b + d >= 2", || format!("resolvent {}", letters(&sum)))?;

    for kind in [EngineKind::Counter, EngineKind::Watched] {
        let mut p = Propagator::new(5, kind);
        let _ = p.add_constraint(clause(&[-1, 2, 3, -4, 5]), false);
        let _ = p.add_constraint(clause(&[-3, -4]), false);
        for l in [1, -2, -5] {
            p.decide(lit(l));
            p.propagate().map_err(|_| "early conflict".to_string())?;
        }
        p.decide(lit(4));
        let conflict = p.propagate().err().ok_or("no conflict after d")?;
        let Analysis::Learned(l) = analyze_conflict(&p, conflict) else {
            return Err("analysis reported unsatisfiable".into());
        };
        ensure(l.constraint == clause(&[-1, 2, -4, 5]), || format!("learned {}", letters(&l.constraint)))?;
    }

    let mut triple = Instance::new(3);
    for c in [clause(&[1, 2]), clause(&[1, 3]), clause(&[2, 3])] {
        triple.push(c).map_err(|e| e.to_string())?;
    }
    let target = pb(&[(1, 1), (1, 2), (1, 3)], 2);
    match strengthen_probe(&triple, lit(-1)) {
        ProbeOutcome::Replacements(rs) => ensure(rs.contains(&(2, target.clone())), || {
            format!("probe ~a replacements {rs:?}")
        })?,
        ProbeOutcome::Failed => return Err("probe ~a failed".into()),
    }
    let (out, _) = strengthen_pass(&triple, &StrengthenConfig::unlimited());
    ensure(out.constraints == vec![target.clone()], || format!("strengthened to {:?}", out.constraints))?;

    let c6 = clause(&[-1, -2, -3, 4, 5]);
    let values = [
        irrelevance(&c6, &trail_with(5, &[1, 2, 3])),
        irrelevance(&clause(&[1, 2, 5]), &trail_with(5, &[-1, -2, -3])),
        irrelevance(&c6, &trail_with(5, &[-1, -2, -3])),
    ];
    ensure(values == [1, 0, 4], || format!("irrelevance {values:?}"))?;
    Ok(format!(
        "{}; ~a | b | ~d | e; {}; irrelevance {values:?}",
        letters(&sum),
        letters(&target)
    ))
}

fn oracle_equivalence() -> Check {
    let configs = all_configs();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut sat, mut unsat) = (0, 0);
    const INSTANCES: usize = 1200;
    for i in 0..INSTANCES {
        let n = rng.gen_range(1..=15u32);
        let m = rng.gen_range(1..=3 * n as usize);
        let inst = random_mixed(n, m, &mut rng);
        let expected = brute_force_sat(&inst, 15).unwrap().is_some();
        if expected {
            sat += 1;
        } else {
            unsat += 1;
        }
        for config in &configs {
            let r = solve(&inst, config);
            let ok = match r.status {
                Status::Sat => expected && inst.is_satisfied_by(&r.model.as_ref().unwrap().values),
                Status::Unsat => !expected,
                Status::Unknown(_) => false,
            };
            ensure(ok, || {
                format!("instance {i} ({n} vars, {m} constraints) {}: {:?}, brute force sat={expected}", describe(config), r.status)
            })?;
        }
    }
    Ok(format!(
        "{INSTANCES} instances ({sat} sat, {unsat} unsat) x {} configurations, 0 disagreements",
        configs.len()
    ))
}

fn random_constraint(num_vars: u32, max_len: usize, rng: &mut impl Rng) -> LinearConstraint {
    let len = rng.gen_range(1..=max_len.min(num_vars as usize));
    let vars = rand::seq::index::sample(rng, num_vars as usize, len);
    let terms: Vec<(u64, Lit)> = vars
        .iter()
        .map(|v| {
            let v = Var::new(v as u32 + 1).unwrap();
            (rng.gen_range(1..=6), if rng.gen_bool(0.5) { v.positive() } else { v.negative() })
        })
        .collect();
    let total: u64 = terms.iter().map(|t| t.0).sum();
    LinearConstraint::new(terms, rng.gen_range(1..=total)).unwrap()
}

/// Completions of `partial` (indexed by variable) restricted to the variables of `c`, keeping
/// those that satisfy it.
fn satisfying_completions(c: &LinearConstraint, partial: &[Option<bool>]) -> Vec<Vec<bool>> {
    let free: Vec<usize> = c
        .terms()
        .iter()
        .map(|t| t.lit.var().index())
        .filter(|&i| partial[i].is_none())
        .collect();
    let mut out = Vec::new();
    for mask in 0u32..1 << free.len() {
        let mut full: Vec<bool> = partial.iter().map(|v| v.unwrap_or(false)).collect();
        for (bit, &i) in free.iter().enumerate() {
            full[i] = mask >> bit & 1 == 1;
        }
        if c.is_satisfied_by(&full) {
            out.push(full);
        }
    }
    out
}

/// Unit status by enumeration: conflicting if no completion satisfies `c`, otherwise the
/// unvalued literals true in every satisfying completion.
fn unit_by_definition(c: &LinearConstraint, partial: &[Option<bool>]) -> UnitStatus {
    let models = satisfying_completions(c, partial);
    if models.is_empty() {
        return UnitStatus::Conflicting;
    }
    let forced: Vec<Lit> = c
        .terms()
        .iter()
        .map(|t| t.lit)
        .filter(|l| partial[l.var().index()].is_none() && models.iter().all(|m| l.eval(m)))
        .collect();
    if forced.is_empty() {
        UnitStatus::NotUnit
    } else {
        UnitStatus::Forced(forced)
    }
}

/// Every partial assignment over the variables of `c` (each unvalued, true or false).
fn partials(c: &LinearConstraint, num_vars: usize) -> Vec<Vec<Option<bool>>> {
    let vars: Vec<usize> = c.terms().iter().map(|t| t.lit.var().index()).collect();
    let mut out = vec![vec![None; num_vars]];
    for &v in &vars {
        out = out
            .into_iter()
            .flat_map(|p| {
                [None, Some(false), Some(true)].into_iter().map(move |x| {
                    let mut q = p.clone();
                    q[v] = x;
                    q
                })
            })
            .collect();
    }
    out
}

fn trail_from(partial: &[Option<bool>]) -> Trail {
    let mut t = Trail::new(partial.len() as u32);
    for (i, v) in partial.iter().enumerate() {
        if let Some(b) = v {
            let var = Var::from_index(i);
            t.push(if *b { var.positive() } else { var.negative() }, Reason::Decision);
        }
    }
    t
}

/// Weight multisets over {1, 2, 3, 5} of every length up to six, with alternating signs and
/// every degree from 1 to the total weight.
fn small_constraints() -> Vec<LinearConstraint> {
    const WEIGHTS: [u64; 4] = [1, 2, 3, 5];
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> = vec![vec![]];
    while let Some(ws) = stack.pop() {
        if !ws.is_empty() {
            let terms: Vec<(u64, Lit)> = ws
                .iter()
                .enumerate()
                .map(|(i, &w)| {
                    let v = Var::from_index(i);
                    (WEIGHTS[w], if i % 2 == 0 { v.positive() } else { v.negative() })
                })
                .collect();
            let total: u64 = terms.iter().map(|t| t.0).sum();
            for k in 1..=total {
                out.push(LinearConstraint::new(terms.clone(), k).unwrap());
            }
        }
        if ws.len() < 6 {
            let from = ws.last().copied().unwrap_or(0);
            for w in from..WEIGHTS.len() {
                let mut next = ws.clone();
                next.push(w);
                stack.push(next);
            }
        }
    }
    out
}

fn sorted(s: UnitStatus) -> UnitStatus {
    match s {
        UnitStatus::Forced(mut ls) => {
            ls.sort_by_key(|l| l.code());
            UnitStatus::Forced(ls)
        }
        other => other,
    }
}

fn propagation_correctness() -> Check {
    // Incremental counters against recomputation.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut steps = 0u64;
    while steps < 100_000 {
        let n = rng.gen_range(2..=12u32);
        let mut p = Propagator::new(n, EngineKind::Counter);
        for _ in 0..rng.gen_range(1..=2 * n) {
            let _ = p.add_constraint(random_constraint(n, 6, &mut rng), false);
        }
        for _ in 0..3 * n {
            let r: f64 = rng.gen();
            if r < 0.15 {
                let level = rng.gen_range(0..=p.trail().decision_level());
                p.backtrack_to(level);
            } else if r < 0.3 {
                let _ = p.propagate();
            } else {
                let v = Var::new(rng.gen_range(1..=n)).unwrap();
                if !p.trail().is_unassigned(v) {
                    continue;
                }
                p.new_level();
                p.assign(if rng.gen_bool(0.5) { v.positive() } else { v.negative() }, Reason::Decision);
            }
            steps += 1;
            for (id, sc) in p.store().iter() {
                let s = p.counter_state(id).ok_or("counter state missing")?;
                ensure((s.curr, s.poss) == curr_poss(&sc.constraint, p.trail()), || {
                    format!("step {steps}: {} has counters ({}, {})", sc.constraint, s.curr, s.poss)
                })?;
            }
        }
    }

    // Same fixpoint from both engines.
    let mut fixpoints = 0;
    for _ in 0..5000 {
        let n = rng.gen_range(2..=10u32);
        let cs: Vec<_> = (0..rng.gen_range(1..=2 * n)).map(|_| random_constraint(n, 6, &mut rng)).collect();
        let decisions: Vec<(u32, bool)> = (0..n).map(|_| (rng.gen_range(1..=n), rng.gen_bool(0.5))).collect();
        let mut outcomes = Vec::new();
        for kind in [EngineKind::Counter, EngineKind::Watched] {
            let mut p = Propagator::new(n, kind);
            let mut conflict = false;
            for c in &cs {
                conflict |= p.add_constraint(c.clone(), false).1.is_err();
            }
            conflict = conflict || p.propagate().is_err();
            for &(v, s) in &decisions {
                let v = Var::new(v).unwrap();
                if conflict || !p.trail().is_unassigned(v) {
                    continue;
                }
                p.decide(if s { v.positive() } else { v.negative() });
                conflict = p.propagate().is_err();
            }
            outcomes.push((conflict, p.trail().assignment().to_vec()));
        }
        ensure(outcomes[0].0 == outcomes[1].0, || format!("engines disagree on conflict for {cs:?}"))?;
        if !outcomes[0].0 {
            ensure(outcomes[0].1 == outcomes[1].1, || format!("engines reach different fixpoints for {cs:?}"))?;
            fixpoints += 1;
        }
    }

    // Weight test and watching-set test against their definitions.
    let constraints = small_constraints();
    let mut unit_cases = 0u64;
    let mut watch_cases = 0u64;
    for c in &constraints {
        let n = c.len();
        let all = partials(c, n);
        for partial in &all {
            let fast = sorted(unit_status(c, &trail_from(partial)));
            let slow = sorted(unit_by_definition(c, partial));
            ensure(fast == slow, || format!("{c} under {partial:?}: {fast:?} vs {slow:?}"))?;
            unit_cases += 1;
        }
        let lits: Vec<Lit> = c.lits().collect();
        for mask in 0u32..1 << n {
            let set: Vec<Lit> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| lits[i]).collect();
            // No assignment leaving the set unvalued or satisfied makes `c` unit or conflicting.
            let by_definition = all.iter().all(|partial| {
                let healthy = set.iter().all(|l| partial[l.var().index()] != Some(!l.is_positive()));
                !healthy || unit_by_definition(c, partial) == UnitStatus::NotUnit
            });
            ensure(is_watching_set(c, &set) == by_definition, || {
                format!("{c} with set {set:?}: definition says {by_definition}")
            })?;
            watch_cases += 1;
        }
    }
    Ok(format!(
        "{steps} counter steps; {fixpoints} shared fixpoints; {} constraints: {unit_cases} unit cases, {watch_cases} watching sets",
        constraints.len()
    ))
}

/// Three to five literals with a degree of at most half the total weight, so that search has
/// to branch and learn before reaching an answer.
fn loose_constraint(num_vars: u32, rng: &mut impl Rng) -> LinearConstraint {
    let len = rng.gen_range(3..=5.min(num_vars as usize));
    let vars = rand::seq::index::sample(rng, num_vars as usize, len);
    let weighted = rng.gen_bool(0.5);
    let terms: Vec<(u64, Lit)> = vars
        .iter()
        .map(|v| {
            let v = Var::new(v as u32 + 1).unwrap();
            let w = if weighted { rng.gen_range(1..=4) } else { 1 };
            (w, if rng.gen_bool(0.5) { v.positive() } else { v.negative() })
        })
        .collect();
    let total: u64 = terms.iter().map(|t| t.0).sum();
    LinearConstraint::new(terms, rng.gen_range(1..=total.div_ceil(2))).unwrap()
}

fn learning_soundness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let configs = all_configs();
    let mut checked = 0usize;
    let mut fallbacks = 0usize;
    for i in 0..600 {
        let n = rng.gen_range(6..=12u32);
        let mut inst = Instance::new(n);
        for _ in 0..rng.gen_range(2 * n..=6 * n) {
            inst.push(loose_constraint(n, &mut rng)).map_err(|e| e.to_string())?;
        }
        for base in &configs {
            let config = SolverConfig {
                record_learned: true,
                ..base.clone()
            };
            let r = solve(&inst, &config);
            for rec in &r.learned {
                ensure(implies(&inst, &rec.constraint, 12).unwrap(), || {
                    format!("instance {i} {}: {} is not implied", describe(base), rec.constraint)
                })?;
                let poss: i64 = rec
                    .constraint
                    .terms()
                    .iter()
                    .filter(|t| rec.assignment[t.lit.var().index()] != Some(!t.lit.is_positive()))
                    .map(|t| t.weight as i64)
                    .sum::<i64>()
                    - rec.constraint.degree() as i64;
                ensure(poss < 0, || {
                    format!("instance {i} {}: {} not falsified when learned", describe(base), rec.constraint)
                })?;
                checked += 1;
                fallbacks += usize::from(rec.path == LearnPath::Clausal);
            }
        }
    }
    ensure(checked >= 1000, || format!("only {checked} learned constraints"))?;

    // 2e + a + c >= 2 and 2~e + b + d >= 2 under {~a, ~b, c, d}.
    for kind in [EngineKind::Counter, EngineKind::Watched] {
        let mut p = Propagator::new(5, kind);
        let _ = p.add_constraint(pb(&[(2, 5), (1, 1), (1, 3)], 2), false);
        let _ = p.add_constraint(pb(&[(2, -5), (1, 2), (1, 4)], 2), false);
        p.new_level();
        for l in [-1, -2, 3, 4] {
            p.assign(lit(l), Reason::Decision);
        }
        let conflict = p.propagate().err().ok_or("no conflict on e")?;
        let Analysis::Learned(l) = analyze_conflict(&p, conflict) else {
            return Err("analysis reported unsatisfiable".into());
        };
        ensure(l.path == LearnPath::Clausal && l.constraint == clause(&[1, 2]), || {
            format!("learned {} via {:?}", letters(&l.constraint), l.path)
        })?;
    }
    Ok(format!(
        "{checked} learned constraints implied and falsified ({fallbacks} clausal); pathology learns a + b >= 1 via fallback"
    ))
}

fn connected(nodes: usize, edges: &[(usize, usize)]) -> bool {
    let mut reached = vec![false; nodes];
    let mut stack = vec![0];
    reached[0] = true;
    while let Some(u) = stack.pop() {
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == u && !reached[y] {
                    reached[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    reached.into_iter().all(|r| r)
}

fn parity_and_tseitin() -> Check {
    let mut graphs = 0;
    for nodes in 1..=5usize {
        let pairs: Vec<(usize, usize)> = (0..nodes).flat_map(|u| (u + 1..nodes).map(move |v| (u, v))).collect();
        for mask in 0u32..1 << pairs.len() {
            if mask.count_ones() > 5 {
                continue;
            }
            let edges: Vec<_> = (0..pairs.len()).filter(|i| mask >> i & 1 == 1).map(|i| pairs[i]).collect();
            if !connected(nodes, &edges) {
                continue;
            }
            for charge_mask in 0u32..1 << nodes {
                let charges: Vec<bool> = (0..nodes).map(|i| charge_mask >> i & 1 == 1).collect();
                let g = ChargedGraph::new(charges, edges.clone()).map_err(|e| e.to_string())?;
                let inst = gen_tseitin(&g).map_err(|e| e.to_string())?;
                let expect_sat = !g.total_charge_odd();
                let system: Vec<(Vec<Lit>, bool)> = g.incidence().into_iter().zip(g.charges().iter().copied()).collect();
                let by_gf2 = mod2_solve(&system, edges.len());
                let brute = brute_force_sat(&inst, 5).unwrap();
                let solved = solve(&inst, &SolverConfig::default());
                ensure(by_gf2.is_some() == expect_sat, || format!("mod2_solve disagrees on {g:?}"))?;
                ensure(brute.is_some() == expect_sat, || format!("brute force disagrees on {g:?}"))?;
                ensure((solved.status == Status::Sat) == expect_sat, || format!("solver disagrees on {g:?}"))?;
                if let Some(x) = by_gf2 {
                    ensure(inst.is_satisfied_by(&x), || format!("mod2_solve model fails on {g:?}"))?;
                }
                graphs += 1;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut solvable = 0;
    for i in 0..1000 {
        let n = rng.gen_range(1..=12u32);
        let m = rng.gen_range(1..=2 * n as usize);
        let system = random_gf2_system(n, m, &mut rng);
        let enumerated = (0u32..1 << n)
            .map(|mask| (0..n).map(|b| mask >> b & 1 == 1).collect::<Vec<_>>())
            .any(|x| gf2_satisfied(&system, &x));
        let solved = mod2_solve(&system, n as usize);
        ensure(solved.is_some() == enumerated, || format!("system {i}: {system:?}"))?;
        if let Some(x) = solved {
            ensure(gf2_satisfied(&system, &x), || format!("system {i}: bad solution"))?;
            solvable += 1;
        }
    }
    Ok(format!(
        "{graphs} charged connected graphs (<= 5 edges) agree; 1000 GF(2) systems ({solvable} solvable) agree"
    ))
}

fn encoding_equivalence() -> Check {
    for n in 1..=6u32 {
        let mut expanded = Vec::new();
        for c in &gen_pigeonhole_pb(n).constraints {
            expanded.extend(cardinality_to_cnf(c, DEFAULT_EXPANSION_CAP).map_err(|e| e.to_string())?);
        }
        let mut cnf = gen_pigeonhole_cnf(n).constraints;
        expanded.sort_by_key(|c| c.to_string());
        cnf.sort_by_key(|c| c.to_string());
        ensure(expanded == cnf, || format!("hole{n}: expansions differ"))?;
    }
    let mut cases = 0;
    for m in 1..=8u32 {
        let lits: Vec<Lit> = (1..=m).map(|v| Var::new(v).unwrap().positive()).collect();
        for k in 1..=m as u64 {
            let c = LinearConstraint::cardinality(lits.clone(), k).unwrap();
            let cs = cardinality_to_cnf(&c, DEFAULT_EXPANSION_CAP).map_err(|e| e.to_string())?;
            ensure(cs.len() as u128 == binomial(u64::from(m), k - 1), || {
                format!("m={m} k={k}: {} clauses", cs.len())
            })?;
            ensure(cs.iter().all(|d| d.len() as u64 == u64::from(m) - k + 1), || {
                format!("m={m} k={k}: clause length")
            })?;
            cases += 1;
        }
    }
    Ok(format!("pigeonhole n <= 6 identical; {cases} cardinality expansions have C(m, k-1) clauses"))
}

fn substitution_note() -> Check {
    Ok("industrial benchmark table not reproducible here; covered by criteria 1, 3 and 4".into())
}

fn main() -> ExitCode {
    let start = Instant::now();
    let criteria: [(&str, fn() -> Check); 8] = [
        ("1 pigeonhole separation", pigeonhole_separation),
        ("2 worked identities", worked_identities),
        ("3 oracle equivalence", oracle_equivalence),
        ("4 propagation correctness", propagation_correctness),
        ("5 learning soundness", learning_soundness),
        ("6 parity and tseitin", parity_and_tseitin),
        ("7 encoding equivalence", encoding_equivalence),
        ("8 benchmark substitution", substitution_note),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Err(format!("panicked: {msg}"))
            });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name} ({secs:.1}s): {detail}");
            }
        }
    }
    let total = start.elapsed();
    if !filters.is_empty() {
        println!("suite runtime {:.1}s (filtered)", total.as_secs_f64());
    } else if total < Duration::from_secs(300) {
        println!("PASS suite runtime {:.1}s < 300s", total.as_secs_f64());
    } else {
        failed += 1;
        println!("FAIL suite runtime {:.1}s >= 300s", total.as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
