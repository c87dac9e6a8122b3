//! DIMACS CNF and OPB readers and writers, model files, and model verification.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{Instance, LinearConstraint, Lit, Model, ModelError, RawConstraint, Var};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Model { line: usize, source: ModelError },
    #[error("header declares {declared} constraints, found {found}")]
    CountMismatch { declared: usize, found: usize },
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Dimacs,
    Opb,
}

/// DIMACS if the first line that is not blank and not an OPB comment starts with `p` or `c`.
pub fn detect_format(text: &str) -> Format {
    for line in text.lines() {
        let t = line.trim_start();
        if t.is_empty() || t.starts_with('*') {
            continue;
        }
        return if t.starts_with('p') || t.starts_with('c') {
            Format::Dimacs
        } else {
            Format::Opb
        };
    }
    Format::Opb
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    match detect_format(text) {
        Format::Dimacs => parse_dimacs(text),
        Format::Opb => parse_opb(text),
    }
}

pub fn parse_dimacs(text: &str) -> Result<Instance, ParseError> {
    let mut header: Option<(u32, usize)> = None;
    let mut inst = Instance::new(0);
    let mut current: Vec<i64> = Vec::new();
    let mut found = 0usize;
    let mut last_line = 0;
    for (no, line) in text.lines().enumerate() {
        let no = no + 1;
        last_line = no;
        let t = line.trim();
        if t.is_empty() || t.starts_with('c') {
            continue;
        }
        if t.starts_with('%') {
            break;
        }
        if t.starts_with('p') {
            if header.is_some() {
                return Err(syntax(no, "duplicate header"));
            }
            let parts: Vec<&str> = t.split_whitespace().collect();
            let parsed = match parts[..] {
                ["p", "cnf", v, c] => v.parse::<u32>().ok().zip(c.parse::<usize>().ok()),
                _ => None,
            };
            let (v, c) = parsed.ok_or_else(|| syntax(no, "malformed header, expected `p cnf <vars> <clauses>`"))?;
            inst.num_vars = v;
            header = Some((v, c));
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(syntax(no, "clause before header"));
        };
        for tok in t.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| syntax(no, format!("expected an integer, found `{tok}`")))?;
            if v == 0 {
                let raw = RawConstraint::ge(current.drain(..).map(|l| (1, lit(l))).collect(), 1);
                inst.push_raw(&raw)
                    .map_err(|source| ParseError::Model { line: no, source })?;
                found += 1;
            } else {
                if v.unsigned_abs() > u64::from(num_vars) {
                    return Err(syntax(no, format!("literal {v} exceeds the declared {num_vars} variables")));
                }
                current.push(v);
            }
        }
    }
    let Some((_, declared)) = header else {
        return Err(syntax(last_line.max(1), "missing `p cnf` header"));
    };
    if !current.is_empty() {
        return Err(syntax(last_line, "last clause is missing its terminating 0"));
    }
    if found != declared {
        return Err(ParseError::CountMismatch { declared, found });
    }
    Ok(inst)
}

fn lit(v: i64) -> Lit {
    Lit::from_dimacs(v).expect("non-zero literal")
}

fn parse_opb_header(t: &str) -> Option<(u32, usize)> {
    let mut vars = None;
    let mut cons = None;
    let mut it = t.trim_start_matches('*').split_whitespace();
    while let Some(tok) = it.next() {
        match tok {
            "#variable=" => vars = it.next().and_then(|v| v.parse().ok()),
            "#constraint=" => cons = it.next().and_then(|v| v.parse().ok()),
            _ => {}
        }
    }
    vars.zip(cons)
}

fn parse_opb_var(tok: &str) -> Option<Lit> {
    let (neg, rest) = match tok.strip_prefix('~') {
        Some(r) => (true, r),
        None => (false, tok),
    };
    let index: u32 = rest.strip_prefix('x')?.parse().ok()?;
    let var = Var::new(index).ok()?;
    Some(Lit::new(var, !neg))
}

/// Parses the linear OPB subset: `[±w [~]x<i>]* (>=|=) k ;`.
pub fn parse_opb(text: &str) -> Result<Instance, ParseError> {
    let mut header: Option<(u32, usize)> = None;
    let mut raws: Vec<(usize, RawConstraint)> = Vec::new();
    let mut max_var = 0u32;
    for (no, line) in text.lines().enumerate() {
        let no = no + 1;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if t.starts_with('*') {
            if header.is_none() {
                header = parse_opb_header(t);
            }
            continue;
        }
        if t.starts_with("min:") || t.starts_with("max:") {
            return Err(syntax(no, "objective functions are not supported"));
        }
        let body = t
            .strip_suffix(';')
            .ok_or_else(|| syntax(no, "constraint must end with `;`"))?;
        let tokens: Vec<&str> = body.split_whitespace().collect();
        let rel = tokens
            .iter()
            .position(|&tok| tok == ">=" || tok == "=")
            .ok_or_else(|| syntax(no, "expected `>=` or `=`"))?;
        let rhs_tokens = &tokens[rel + 1..];
        let rhs: i64 = match rhs_tokens {
            [r] => r
                .trim_start_matches('+')
                .parse()
                .map_err(|_| syntax(no, format!("bad right-hand side `{r}`")))?,
            _ => return Err(syntax(no, "expected a single right-hand side")),
        };
        let lhs = &tokens[..rel];
        if lhs.len() % 2 != 0 {
            return Err(syntax(no, "terms must be `<weight> <literal>` pairs"));
        }
        let mut terms = Vec::with_capacity(lhs.len() / 2);
        for pair in lhs.chunks(2) {
            let w: i64 = pair[0]
                .trim_start_matches('+')
                .parse()
                .map_err(|_| syntax(no, format!("bad weight `{}`", pair[0])))?;
            let l = parse_opb_var(pair[1])
                .ok_or_else(|| syntax(no, format!("bad literal `{}`", pair[1])))?;
            if w != 0 {
                max_var = max_var.max(l.var().get());
                terms.push((w, l));
            }
        }
        let raw = if tokens[rel] == "=" {
            RawConstraint::eq(terms, rhs)
        } else {
            RawConstraint::ge(terms, rhs)
        };
        raws.push((no, raw));
    }
    let num_vars = match header {
        Some((v, declared)) => {
            if raws.len() != declared {
                return Err(ParseError::CountMismatch {
                    declared,
                    found: raws.len(),
                });
            }
            v
        }
        None => max_var,
    };
    let mut inst = Instance::new(num_vars);
    for (line, raw) in &raws {
        inst.push_raw(raw)
            .map_err(|source| ParseError::Model { line: *line, source })?;
    }
    Ok(inst)
}

fn meta_comment(inst: &Instance, prefix: &str, out: &mut String) {
    if let Some(family) = &inst.meta.family {
        let params: Vec<String> = inst.meta.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(out, "{prefix} {family} {}", params.join(" "));
    }
}

/// DIMACS text; fails if some constraint is not a clause.
pub fn write_dimacs(inst: &Instance) -> Result<String, ModelError> {
    let mut out = String::new();
    meta_comment(inst, "c", &mut out);
    let _ = writeln!(out, "p cnf {} {}", inst.num_vars, inst.len());
    for c in &inst.constraints {
        if !(c.is_clause() || c.is_contradiction()) {
            return Err(ModelError::NotCardinality);
        }
        for l in c.lits() {
            let _ = write!(out, "{} ", l.to_dimacs());
        }
        out.push_str("0\n");
    }
    Ok(out)
}

fn opb_constraint(c: &LinearConstraint, out: &mut String) {
    for t in c.terms() {
        let neg = if t.lit.is_positive() { "" } else { "~" };
        let _ = write!(out, "+{} {neg}x{} ", t.weight, t.lit.var().get());
    }
    let _ = writeln!(out, ">= {} ;", c.degree());
}

pub fn write_opb(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "* #variable= {} #constraint= {}", inst.num_vars, inst.len());
    meta_comment(inst, "*", &mut out);
    for c in &inst.constraints {
        opb_constraint(c, &mut out);
    }
    out
}

/// Writes clausal instances as DIMACS and everything else as OPB.
pub fn write_instance(inst: &Instance) -> String {
    if inst.is_cnf() {
        write_dimacs(inst).expect("clausal instance")
    } else {
        write_opb(inst)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelFileError {
    #[error("line {line}: expected a signed integer, found `{token}`")]
    BadToken { line: usize, token: String },
    #[error("variable {var} exceeds the instance's {num_vars} variables")]
    OutOfRange { var: u64, num_vars: u32 },
    #[error("variable {0} is assigned both values")]
    Conflicting(u64),
    #[error("partial model: variable {0} has no value")]
    Partial(u32),
}

/// Reads signed literals (optionally on `v ` lines, optionally 0-terminated). `s ` and `c `
/// lines are skipped. Every variable up to `num_vars` must receive a value.
pub fn parse_model(text: &str, num_vars: u32) -> Result<Model, ModelFileError> {
    let mut values: Vec<Option<bool>> = vec![None; num_vars as usize];
    for (no, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('s') || t.starts_with('c') {
            continue;
        }
        let t = t.strip_prefix('v').unwrap_or(t);
        for tok in t.split_whitespace() {
            let v: i64 = tok.parse().map_err(|_| ModelFileError::BadToken {
                line: no + 1,
                token: tok.to_string(),
            })?;
            if v == 0 {
                continue;
            }
            let var = v.unsigned_abs();
            if var > u64::from(num_vars) {
                return Err(ModelFileError::OutOfRange { var, num_vars });
            }
            let slot = &mut values[var as usize - 1];
            match *slot {
                Some(old) if old != (v > 0) => return Err(ModelFileError::Conflicting(var)),
                _ => *slot = Some(v > 0),
            }
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or(ModelFileError::Partial(i as u32 + 1)))
        .collect::<Result<_, _>>()?;
    Ok(Model::new(values))
}

/// `v ` lines of at most ten literals each, ending in 0.
pub fn write_model(model: &Model) -> String {
    let mut out = String::new();
    let lits = model.to_dimacs();
    for chunk in lits.chunks(10) {
        out.push('v');
        for l in chunk {
            let _ = write!(out, " {l}");
        }
        out.push('\n');
    }
    out.push_str("v 0\n");
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// Index and text of the first violated constraint.
    Fail(usize, LinearConstraint),
}

pub fn verify(inst: &Instance, model: &Model) -> Result<Verdict, ModelFileError> {
    if model.num_vars() < inst.num_vars as usize {
        return Err(ModelFileError::Partial(model.num_vars() as u32 + 1));
    }
    Ok(inst
        .constraints
        .iter()
        .position(|c| !c.is_satisfied_by(&model.values))
        .map_or(Verdict::Pass, |i| Verdict::Fail(i, inst.constraints[i].clone())))
}
