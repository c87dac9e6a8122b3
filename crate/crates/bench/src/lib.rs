//! Fixed workloads shared by the benchmarks.

use pbsolve_core::families::{gen_clique_color, gen_pigeonhole_cnf, gen_pigeonhole_pb, random_mixed};
use pbsolve_core::{Instance, Lit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Named instances for the solver benchmark.
pub fn solve_suite() -> Vec<(String, Instance)> {
    let mut out = Vec::new();
    for n in [6, 7] {
        out.push((format!("hole{n}-cnf"), gen_pigeonhole_cnf(n)));
    }
    for n in [8, 20] {
        out.push((format!("hole{n}-pb"), gen_pigeonhole_pb(n)));
    }
    out.push(("clique-color-4-2".to_string(), gen_clique_color(4, 2)));
    out
}

/// A large random mixed instance and a fixed sequence of decisions to replay against it.
pub fn propagation_workload(num_vars: u32, seed: u64) -> (Instance, Vec<Lit>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = random_mixed(num_vars, 4 * num_vars as usize, &mut rng);
    let decisions = (0..num_vars)
        .map(|_| {
            let v = pbsolve_core::Var::new(rng.gen_range(1..=num_vars)).expect("non-zero");
            Lit::new(v, rng.gen_bool(0.5))
        })
        .collect();
    (inst, decisions)
}
