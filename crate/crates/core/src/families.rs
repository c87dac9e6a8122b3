//! Generators for the benchmark families: pigeonhole (clausal and cardinality), parity and
//! Tseitin formulas, clique coloring, modular constraints, and random mixed instances.
//!
//! Variable numbering is fixed per family so output is reproducible byte for byte:
//! pigeonhole `p_ij -> (i-1)*n + j`; Tseitin edge `e -> e+1` in input order; clique coloring
//! numbers all `e_ij` (i < j, row-major) first, then `c_il`, then `q_ki`.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{
    normalize, Instance, InstanceMeta, LinearConstraint, Lit, ModelError, Normalized,
    RawConstraint, Var,
};

/// Longest parity constraint [`gen_parity_cnf`] expands by default.
pub const DEFAULT_PARITY_CAP: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("parity constraint of length {len} exceeds the expansion cap {cap}")]
    ParityTooLong { len: usize, cap: usize },
    #[error("invalid graph: {0}")]
    Graph(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn var(index: u32) -> Var {
    Var::new(index).expect("generator variables start at 1")
}

fn clause(lits: impl IntoIterator<Item = Lit>) -> LinearConstraint {
    LinearConstraint::clause(lits).expect("generated clauses are well formed")
}

fn pigeon_var(n: u32, i: u32, j: u32) -> Var {
    var((i - 1) * n + j)
}

fn pigeon_clauses(n: u32) -> impl Iterator<Item = LinearConstraint> {
    (1..=n + 1).map(move |i| clause((1..=n).map(|j| pigeon_var(n, i, j).positive())))
}

/// n+1 pigeons, n holes: every pigeon in some hole, no two pigeons share a hole.
pub fn gen_pigeonhole_cnf(n: u32) -> Instance {
    assert!(n >= 1, "pigeonhole needs at least one hole");
    let mut inst = Instance::new(n * (n + 1))
        .with_meta(InstanceMeta::family("pigeonhole-cnf", &[("n", n.to_string())]));
    inst.constraints.extend(pigeon_clauses(n));
    for j in 1..=n {
        for i in 1..=n + 1 {
            for k in i + 1..=n + 1 {
                inst.constraints.push(clause([
                    pigeon_var(n, i, j).negative(),
                    pigeon_var(n, k, j).negative(),
                ]));
            }
        }
    }
    inst
}

/// Pigeonhole with one cardinality constraint per hole: `Σ_i ¬p_ij ≥ n`.
pub fn gen_pigeonhole_pb(n: u32) -> Instance {
    assert!(n >= 1, "pigeonhole needs at least one hole");
    let mut inst = Instance::new(n * (n + 1))
        .with_meta(InstanceMeta::family("pigeonhole-pb", &[("n", n.to_string())]));
    inst.constraints.extend(pigeon_clauses(n));
    for j in 1..=n {
        let lits = (1..=n + 1).map(|i| pigeon_var(n, i, j).negative());
        inst.constraints
            .push(LinearConstraint::cardinality(lits, u64::from(n)).expect("valid hole constraint"));
    }
    inst
}

/// Clauses whose models are exactly the assignments where the number of true literals in
/// `lits` has the given parity. Each excluded assignment contributes one clause, in binary
/// counting order with the first literal most significant.
pub fn gen_parity_cnf(
    lits: &[Lit],
    parity: bool,
    cap: usize,
) -> Result<Vec<LinearConstraint>, GenError> {
    if lits.len() > cap {
        return Err(GenError::ParityTooLong { len: lits.len(), cap });
    }
    if let Some(v) = lits.iter().map(|l| l.var()).duplicates().next() {
        return Err(ModelError::DuplicateVariable(v.get()).into());
    }
    let len = lits.len();
    let mut out = Vec::with_capacity(1 << len.saturating_sub(1));
    for mask in 0u64..(1 << len) {
        let ones = mask.count_ones() % 2 == 1;
        if ones == parity {
            continue;
        }
        // Literal i is true in the excluded assignment iff its bit is set.
        out.push(clause((0..len).map(|i| {
            let bit = mask >> (len - 1 - i) & 1 == 1;
            if bit {
                !lits[i]
            } else {
                lits[i]
            }
        })));
    }
    if len == 0 && parity {
        out.push(LinearConstraint::contradiction());
    }
    Ok(out)
}

/// A graph whose nodes carry a charge bit. Edge `e` is labelled by variable `e + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChargedGraph {
    charges: Vec<bool>,
    edges: Vec<(usize, usize)>,
}

impl ChargedGraph {
    pub fn new(charges: Vec<bool>, edges: Vec<(usize, usize)>) -> Result<ChargedGraph, GenError> {
        for &(u, v) in &edges {
            if u >= charges.len() || v >= charges.len() {
                return Err(GenError::Graph(format!(
                    "edge ({}, {}) references a missing node",
                    u + 1,
                    v + 1
                )));
            }
            if u == v {
                return Err(GenError::Graph(format!("self-loop on node {}", u + 1)));
            }
        }
        Ok(ChargedGraph { charges, edges })
    }

    pub fn charges(&self) -> &[bool] {
        &self.charges
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_nodes(&self) -> usize {
        self.charges.len()
    }

    pub fn edge_lit(&self, edge: usize) -> Lit {
        var(edge as u32 + 1).positive()
    }

    pub fn total_charge_odd(&self) -> bool {
        self.charges.iter().filter(|&&c| c).count() % 2 == 1
    }

    /// Incident edge literals per node.
    pub fn incidence(&self) -> Vec<Vec<Lit>> {
        let mut inc = vec![Vec::new(); self.num_nodes()];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            inc[u].push(self.edge_lit(e));
            inc[v].push(self.edge_lit(e));
        }
        inc
    }

    /// Triangle with the given charges.
    pub fn triangle(charges: [bool; 3]) -> ChargedGraph {
        ChargedGraph::new(charges.to_vec(), vec![(0, 1), (1, 2), (0, 2)]).expect("valid triangle")
    }

    /// Random simple `degree`-regular graph on `nodes` nodes (pairing model with restarts).
    /// Charges are random with total parity `odd`.
    pub fn random_regular(
        nodes: usize,
        degree: usize,
        odd: bool,
        seed: u64,
    ) -> Result<ChargedGraph, GenError> {
        if nodes <= degree || (nodes * degree) % 2 == 1 {
            return Err(GenError::Parameter(format!(
                "no simple {degree}-regular graph on {nodes} nodes"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges = 'retry: loop {
            let mut points: Vec<usize> = (0..nodes).flat_map(|n| std::iter::repeat_n(n, degree)).collect();
            points.shuffle(&mut rng);
            let mut edges = Vec::with_capacity(points.len() / 2);
            for pair in points.chunks(2) {
                let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                if u == v || edges.contains(&(u, v)) {
                    continue 'retry;
                }
                edges.push((u, v));
            }
            edges.sort_unstable();
            break edges;
        };
        let mut charges: Vec<bool> = (0..nodes).map(|_| rng.gen_bool(0.5)).collect();
        if (charges.iter().filter(|&&c| c).count() % 2 == 1) != odd {
            charges[0] = !charges[0];
        }
        ChargedGraph::new(charges, edges)
    }
}

impl FromStr for ChargedGraph {
    type Err = GenError;

    /// Text form: comment lines start with `c` or `#`; the first other line lists one charge
    /// bit per node; every further line is an edge `u v` with nodes numbered from 1.
    fn from_str(text: &str) -> Result<ChargedGraph, GenError> {
        let mut charges: Option<Vec<bool>> = None;
        let mut edges = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') || line.starts_with('#') {
                continue;
            }
            let bad = |what: &str| GenError::Graph(format!("line {}: {what}", no + 1));
            match &charges {
                None => {
                    let cs = line
                        .split_whitespace()
                        .map(|t| match t {
                            "0" => Ok(false),
                            "1" => Ok(true),
                            _ => Err(bad("charges must be 0 or 1")),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    charges = Some(cs);
                }
                Some(_) => {
                    let nums: Vec<usize> = line
                        .split_whitespace()
                        .map(|t| t.parse::<usize>().map_err(|_| bad("expected node numbers")))
                        .collect::<Result<_, _>>()?;
                    match nums[..] {
                        [u, v] if u >= 1 && v >= 1 => edges.push((u - 1, v - 1)),
                        _ => return Err(bad("expected an edge `u v` with nodes from 1")),
                    }
                }
            }
        }
        let charges = charges.ok_or_else(|| GenError::Graph("missing charge line".into()))?;
        ChargedGraph::new(charges, edges)
    }
}

impl fmt::Display for ChargedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let charges = self.charges.iter().map(|&c| if c { "1" } else { "0" }).join(" ");
        writeln!(f, "{charges}")?;
        for &(u, v) in &self.edges {
            writeln!(f, "{} {}", u + 1, v + 1)?;
        }
        Ok(())
    }
}

/// Per node, the parity of its incident edge literals must equal its charge.
pub fn gen_tseitin(g: &ChargedGraph) -> Result<Instance, GenError> {
    let mut inst = Instance::new(g.edges().len() as u32).with_meta(InstanceMeta::family(
        "tseitin",
        &[
            ("nodes", g.num_nodes().to_string()),
            ("edges", g.edges().len().to_string()),
        ],
    ));
    for (node, lits) in g.incidence().iter().enumerate() {
        inst.constraints
            .extend(gen_parity_cnf(lits, g.charges()[node], DEFAULT_PARITY_CAP)?);
    }
    Ok(inst)
}

/// Variable layout of a clique-coloring instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CliqueColorVars {
    pub m: u32,
    pub n: u32,
}

impl CliqueColorVars {
    fn edges(&self) -> u32 {
        self.m * (self.m - 1) / 2
    }

    /// Edge between graph nodes i < j.
    pub fn e(&self, i: u32, j: u32) -> Var {
        debug_assert!(1 <= i && i < j && j <= self.m);
        // Pairs before row i, then the offset within row i.
        let before = (i - 1) * self.m - (i - 1) * i / 2;
        var(before + (j - i))
    }

    /// Graph node i has color l.
    pub fn c(&self, i: u32, l: u32) -> Var {
        var(self.edges() + (i - 1) * self.n + l)
    }

    /// Clique element k sits on graph node i.
    pub fn q(&self, k: u32, i: u32) -> Var {
        var(self.edges() + self.m * self.n + (k - 1) * self.m + i)
    }

    pub fn num_vars(&self) -> u32 {
        self.edges() + self.m * self.n + (self.n + 1) * self.m
    }
}

/// A graph on m nodes contains an (n+1)-clique and is n-colorable.
pub fn gen_clique_color(m: u32, n: u32) -> Instance {
    assert!(m >= 1 && n >= 1, "clique coloring needs m, n >= 1");
    let v = CliqueColorVars { m, n };
    let mut inst = Instance::new(v.num_vars()).with_meta(InstanceMeta::family(
        "clique-color",
        &[("m", m.to_string()), ("n", n.to_string())],
    ));
    let cs = &mut inst.constraints;
    for (i, j) in (1..=m).tuple_combinations() {
        for l in 1..=n {
            cs.push(clause([v.e(i, j).negative(), v.c(i, l).negative(), v.c(j, l).negative()]));
        }
    }
    for i in 1..=m {
        cs.push(clause((1..=n).map(|l| v.c(i, l).positive())));
    }
    for k in 1..=n + 1 {
        cs.push(clause((1..=m).map(|i| v.q(k, i).positive())));
    }
    for i in 1..=m {
        for (k, k2) in (1..=n + 1).tuple_combinations() {
            cs.push(clause([v.q(k, i).negative(), v.q(k2, i).negative()]));
        }
    }
    for (i, j) in (1..=m).tuple_combinations() {
        for k in 1..=n + 1 {
            for l in (1..=n + 1).filter(|&l| l != k) {
                cs.push(clause([v.e(i, j).positive(), v.q(k, i).negative(), v.q(l, j).negative()]));
            }
        }
    }
    inst
}

/// Encoding of `Σ wᵢlᵢ ≡ residue (mod modulus)` as a pseudo-Boolean equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModEncoding {
    pub constraints: Vec<LinearConstraint>,
    pub aux: Vec<Var>,
}

/// Introduces `⌊w/m⌋` auxiliary variables `s` (numbered from `first_aux`) and the equality
/// `Σ wᵢlᵢ + Σ m·s = m⌊w/m⌋ + residue`, split into its two inequalities.
pub fn gen_mod_encoding(
    terms: &[(u64, Lit)],
    residue: u64,
    modulus: u64,
    first_aux: u32,
) -> Result<ModEncoding, GenError> {
    if modulus < 2 || residue >= modulus {
        return Err(GenError::Parameter(format!(
            "need 0 <= residue < modulus and modulus >= 2, got {residue} mod {modulus}"
        )));
    }
    if terms.iter().any(|&(w, _)| w == 0) {
        return Err(ModelError::ZeroWeight.into());
    }
    let w: u64 = terms.iter().map(|&(w, _)| w).sum();
    let count = w / modulus;
    let aux: Vec<Var> = (0..count)
        .map(|i| Var::new(first_aux + i as u32))
        .collect::<Result<_, _>>()?;
    let to_i64 = |x: u64| i64::try_from(x).map_err(|_| GenError::Model(ModelError::Overflow));
    let mut raw_terms = Vec::with_capacity(terms.len() + aux.len());
    for &(w, l) in terms {
        raw_terms.push((to_i64(w)?, l));
    }
    for &s in &aux {
        raw_terms.push((to_i64(modulus)?, s.positive()));
    }
    let rhs = to_i64(modulus * count + residue)?;
    let constraints = match normalize(&RawConstraint::eq(raw_terms, rhs))? {
        Normalized::Constraints(cs) => cs,
        Normalized::Unsatisfiable => vec![LinearConstraint::contradiction()],
    };
    Ok(ModEncoding { constraints, aux })
}

/// Random instance with a mix of clauses, cardinality constraints and weighted constraints.
pub fn random_mixed(num_vars: u32, num_constraints: usize, rng: &mut impl Rng) -> Instance {
    let mut inst = Instance::new(num_vars).with_meta(InstanceMeta::family(
        "random-mixed",
        &[("vars", num_vars.to_string()), ("constraints", num_constraints.to_string())],
    ));
    if num_vars == 0 {
        return inst;
    }
    let vars: Vec<u32> = (1..=num_vars).collect();
    for _ in 0..num_constraints {
        let len = rng.gen_range(1..=num_vars.min(6) as usize);
        let lits: Vec<Lit> = vars
            .choose_multiple(rng, len)
            .map(|&v| Lit::new(var(v), rng.gen_bool(0.5)))
            .collect();
        let c = match rng.gen_range(0..3) {
            0 => LinearConstraint::clause(lits),
            1 => LinearConstraint::cardinality(lits, rng.gen_range(1..=len as u64)),
            _ => {
                let terms: Vec<(u64, Lit)> = lits.into_iter().map(|l| (rng.gen_range(1..=5), l)).collect();
                let total: u64 = terms.iter().map(|t| t.0).sum();
                let degree = rng.gen_range(1..=total);
                LinearConstraint::new(terms, degree)
            }
        };
        inst.constraints.push(c.expect("random constraint is well formed"));
    }
    inst
}

/// Random XOR system over variables `1..=num_vars`.
pub fn random_gf2_system(
    num_vars: u32,
    num_equations: usize,
    rng: &mut impl Rng,
) -> Vec<(Vec<Lit>, bool)> {
    (0..num_equations)
        .map(|_| {
            let mut lits = Vec::new();
            for v in 1..=num_vars {
                if rng.gen_bool(0.3) {
                    lits.push(Lit::new(var(v), rng.gen_bool(0.8)));
                }
            }
            (lits, rng.gen_bool(0.5))
        })
        .collect()
}
