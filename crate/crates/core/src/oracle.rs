//! Independent reference procedures: exhaustive enumeration and Gaussian elimination over
//! GF(2). They share no code with the solver.

use thiserror::Error;

use crate::model::{Instance, LinearConstraint, Lit};

pub const DEFAULT_BRUTE_FORCE_CAP: u32 = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{num_vars} variables exceed the enumeration cap {cap}")]
    TooManyVars { num_vars: u32, cap: u32 },
}

fn check_cap(num_vars: u32, cap: u32) -> Result<(), OracleError> {
    if num_vars > cap || num_vars >= 63 {
        return Err(OracleError::TooManyVars { num_vars, cap });
    }
    Ok(())
}

fn holds(c: &LinearConstraint, a: &[bool]) -> bool {
    let sum: u64 = c
        .terms()
        .iter()
        .filter(|t| a[t.lit.var().index()] == t.lit.is_positive())
        .map(|t| t.weight)
        .sum();
    sum >= c.degree()
}

fn enumerate(num_vars: u32) -> impl Iterator<Item = Vec<bool>> {
    (0u64..1 << num_vars).map(move |mask| (0..num_vars).map(|i| mask >> i & 1 == 1).collect())
}

/// A satisfying assignment found by enumerating all `2^n` assignments, or `None`.
pub fn brute_force_sat(instance: &Instance, cap: u32) -> Result<Option<Vec<bool>>, OracleError> {
    check_cap(instance.num_vars, cap)?;
    Ok(enumerate(instance.num_vars).find(|a| instance.constraints.iter().all(|c| holds(c, a))))
}

pub fn count_models(instance: &Instance, cap: u32) -> Result<u64, OracleError> {
    check_cap(instance.num_vars, cap)?;
    Ok(enumerate(instance.num_vars)
        .filter(|a| instance.constraints.iter().all(|c| holds(c, a)))
        .count() as u64)
}

/// Whether every model of `instance` satisfies `c`.
pub fn implies(instance: &Instance, c: &LinearConstraint, cap: u32) -> Result<bool, OracleError> {
    check_cap(instance.num_vars, cap)?;
    Ok(enumerate(instance.num_vars)
        .filter(|a| instance.constraints.iter().all(|d| holds(d, a)))
        .all(|a| holds(c, &a)))
}

/// Solves a system of XOR equations, each a set of literals whose number of true members must
/// have the given parity. Free variables are set false. Variables are numbered up to
/// `num_vars`.
pub fn mod2_solve(system: &[(Vec<Lit>, bool)], num_vars: usize) -> Option<Vec<bool>> {
    let words = num_vars.div_ceil(64) + 1;
    // Column `num_vars` holds the right-hand side.
    let rhs_bit = num_vars;
    let mut rows: Vec<Vec<u64>> = system
        .iter()
        .map(|(lits, parity)| {
            let mut row = vec![0u64; words];
            let mut p = *parity;
            for l in lits {
                let v = l.var().index();
                row[v / 64] ^= 1 << (v % 64);
                // ¬x contributes 1 + x.
                if !l.is_positive() {
                    p = !p;
                }
            }
            if p {
                row[rhs_bit / 64] ^= 1 << (rhs_bit % 64);
            }
            row
        })
        .collect();
    let bit = |row: &[u64], col: usize| row[col / 64] >> (col % 64) & 1 == 1;
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..num_vars {
        let Some(p) = (r..rows.len()).find(|&i| bit(&rows[i], col)) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && bit(row, col) {
                for (w, pw) in row.iter_mut().zip(&pivot) {
                    *w ^= pw;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|row| bit(row, rhs_bit)) {
        return None;
    }
    let mut values = vec![false; num_vars];
    for (i, &col) in pivots.iter().enumerate() {
        values[col] = bit(&rows[i], rhs_bit);
    }
    Some(values)
}

/// Whether `values` satisfies every XOR equation.
pub fn gf2_satisfied(system: &[(Vec<Lit>, bool)], values: &[bool]) -> bool {
    system
        .iter()
        .all(|(lits, parity)| (lits.iter().filter(|l| l.eval(values)).count() % 2 == 1) == *parity)
}
