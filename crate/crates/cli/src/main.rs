use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use pbsolve_core::families::{
    gen_clique_color, gen_mod_encoding, gen_pigeonhole_cnf, gen_pigeonhole_pb, gen_tseitin,
    ChargedGraph,
};
use pbsolve_core::io::{parse_instance, parse_model, verify, write_instance, write_model, Verdict};
use pbsolve_core::{solve, EngineKind, Heuristic, Instance, Lit, SolverConfig, Status, Var};

#[derive(Parser)]
#[command(name = "pbsolve", version, about = "Pseudo-Boolean satisfiability solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a DIMACS CNF or OPB file (`-` reads standard input).
    Solve(SolveArgs),
    /// Generate a benchmark instance on standard output.
    Gen {
        #[command(subcommand)]
        family: Family,
        /// Write to this file instead of standard output.
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
    },
    /// Check a model file against an instance.
    Verify { instance: PathBuf, model: PathBuf },
    /// Run a benchmark suite and print a results table.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct SolverFlags {
    #[arg(long, default_value = "activity")]
    heuristic: Heuristic,
    #[arg(long, default_value = "watched")]
    engine: EngineKind,
    #[arg(long)]
    relevance_bound: Option<i64>,
    #[arg(long)]
    length_bound: Option<usize>,
    /// Strengthen constraints by probing before search.
    #[arg(long)]
    preprocess: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_decisions: Option<u64>,
    #[arg(long)]
    timeout_s: Option<f64>,
}

impl SolverFlags {
    fn config(&self) -> Result<SolverConfig> {
        let mut c = SolverConfig {
            heuristic: self.heuristic,
            engine: self.engine,
            preprocess: self.preprocess,
            seed: self.seed,
            max_decisions: self.max_decisions,
            ..SolverConfig::default()
        };
        if let Some(b) = self.relevance_bound {
            c.relevance_bound = b;
        }
        if let Some(b) = self.length_bound {
            c.length_bound = b;
        }
        if let Some(t) = self.timeout_s {
            if !(t.is_finite() && t >= 0.0) {
                bail!("--timeout-s must be a non-negative number");
            }
            c.time_limit = Some(Duration::from_secs_f64(t));
        }
        Ok(c)
    }
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[command(flatten)]
    flags: SolverFlags,
    /// Print search statistics as comment lines.
    #[arg(long)]
    stats: bool,
}

#[derive(Subcommand)]
enum Family {
    /// n+1 pigeons in n holes, clausal encoding.
    PigeonholeCnf { n: u32 },
    /// n+1 pigeons in n holes, one cardinality constraint per hole.
    PigeonholePb { n: u32 },
    /// Parity constraints of a charged graph.
    Tseitin {
        /// Graph file: a charge line, then one `u v` edge per line.
        #[arg(long, conflicts_with = "random")]
        graph: Option<PathBuf>,
        /// Random 3-regular graph on this many nodes.
        #[arg(long)]
        random: Option<usize>,
        /// Make the total charge of the random graph odd (unsatisfiable).
        #[arg(long)]
        odd: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// An (n+1)-clique in an n-colorable graph on m nodes.
    CliqueColor { m: u32, n: u32 },
    /// `w1 x1 + ... + wk xk ≡ residue (mod modulus)` as a pseudo-Boolean equality.
    ModEncode {
        modulus: u64,
        residue: u64,
        #[arg(required = true)]
        weights: Vec<u64>,
    },
}

#[derive(Args)]
struct BenchArgs {
    /// pigeonhole, tseitin or clique-color.
    suite: String,
    #[arg(long, default_value_t = 4)]
    min_n: u32,
    #[arg(long, default_value_t = 10)]
    max_n: u32,
    /// Per-instance limit.
    #[arg(long, default_value_t = 60.0)]
    instance_timeout_s: f64,
    #[command(flatten)]
    flags: SolverFlags,
}

fn read_input(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading standard input")?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    parse_instance(&read_input(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn run_solve(args: &SolveArgs) -> Result<ExitCode> {
    let instance = load_instance(&args.file)?;
    let result = solve(&instance, &args.flags.config()?);
    let mut out = io::stdout().lock();
    if args.stats {
        let s = &result.stats;
        writeln!(out, "c variables {} constraints {}", instance.num_vars, instance.len())?;
        writeln!(out, "c decisions {}", s.decisions)?;
        writeln!(out, "c propagations {}", s.propagations)?;
        writeln!(out, "c conflicts {}", s.conflicts)?;
        writeln!(out, "c learned {}", s.learned)?;
        writeln!(out, "c clausal-fallbacks {}", s.clausal_fallbacks)?;
        writeln!(out, "c deleted {}", s.deleted)?;
        writeln!(out, "c restarts {}", s.restarts)?;
        writeln!(out, "c max-db-size {}", s.max_db_size)?;
        if let Some(p) = &s.preprocess {
            writeln!(out, "c preprocess probes {} replacements {}", p.probes, p.replacements)?;
        }
        writeln!(out, "c time {:.3}s", s.wall_time.as_secs_f64())?;
    }
    let code = match result.status {
        Status::Sat => {
            writeln!(out, "s SATISFIABLE")?;
            let model = result.model.expect("satisfiable result has a model");
            write!(out, "{}", write_model(&model))?;
            10
        }
        Status::Unsat => {
            writeln!(out, "s UNSATISFIABLE")?;
            20
        }
        Status::Unknown(limit) => {
            writeln!(out, "c limit reached: {limit}")?;
            writeln!(out, "s UNKNOWN")?;
            0
        }
    };
    Ok(ExitCode::from(code))
}

fn generate(family: &Family) -> Result<Instance> {
    Ok(match family {
        Family::PigeonholeCnf { n } | Family::PigeonholePb { n } if *n == 0 => {
            bail!("pigeonhole needs n >= 1")
        }
        Family::PigeonholeCnf { n } => gen_pigeonhole_cnf(*n),
        Family::PigeonholePb { n } => gen_pigeonhole_pb(*n),
        Family::Tseitin {
            graph,
            random,
            odd,
            seed,
        } => {
            let g = match (graph, random) {
                (Some(path), _) => read_input(path)?
                    .parse::<ChargedGraph>()
                    .with_context(|| format!("parsing {}", path.display()))?,
                (None, Some(nodes)) => ChargedGraph::random_regular(*nodes, 3, *odd, *seed)?,
                (None, None) => bail!("tseitin needs --graph FILE or --random NODES"),
            };
            gen_tseitin(&g)?
        }
        Family::CliqueColor { m, n } => {
            if *m == 0 || *n == 0 {
                bail!("clique-color needs m, n >= 1");
            }
            gen_clique_color(*m, *n)
        }
        Family::ModEncode {
            modulus,
            residue,
            weights,
        } => {
            let k = weights.len() as u32;
            let terms: Vec<(u64, Lit)> = weights
                .iter()
                .enumerate()
                .map(|(i, &w)| Ok((w, Var::new(i as u32 + 1)?.positive())))
                .collect::<Result<_>>()?;
            let enc = gen_mod_encoding(&terms, *residue, *modulus, k + 1)?;
            let mut inst = Instance::new(k + enc.aux.len() as u32);
            for c in enc.constraints {
                inst.push(c)?;
            }
            inst
        }
    })
}

fn run_verify(instance: &Path, model: &Path) -> Result<ExitCode> {
    let inst = load_instance(instance)?;
    let model = parse_model(&read_input(model)?, inst.num_vars)
        .with_context(|| format!("reading model {}", model.display()))?;
    match verify(&inst, &model)? {
        Verdict::Pass => {
            println!("PASS");
            Ok(ExitCode::SUCCESS)
        }
        Verdict::Fail(i, c) => {
            println!("FAIL constraint {} violated: {c}", i + 1);
            Ok(ExitCode::from(1))
        }
    }
}

fn bench_instances(args: &BenchArgs) -> Result<Vec<(String, Instance, bool)>> {
    let range = args.min_n..=args.max_n;
    Ok(match args.suite.as_str() {
        "pigeonhole" => range
            .flat_map(|n| {
                [
                    (format!("hole{n}-cnf"), gen_pigeonhole_cnf(n), false),
                    (format!("hole{n}-pb+pre"), gen_pigeonhole_pb(n), true),
                ]
            })
            .collect(),
        "tseitin" => range
            .filter(|n| n % 2 == 0)
            .map(|n| {
                let g = ChargedGraph::random_regular(n as usize, 3, true, u64::from(n))?;
                Ok((format!("tseitin-3reg-{n}"), gen_tseitin(&g)?, false))
            })
            .collect::<Result<_>>()?,
        "clique-color" => range
            .filter(|&n| n >= 1)
            .map(|n| (format!("cc-{}-{n}", n + 1), gen_clique_color(n + 1, n), false))
            .collect(),
        other => bail!("unknown suite `{other}` (pigeonhole, tseitin, clique-color)"),
    })
}

fn run_bench(args: &BenchArgs) -> Result<ExitCode> {
    let base = args.flags.config()?;
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "{:<20} {:>8} {:>12} {:>12} {:>10}",
        "instance", "status", "decisions", "conflicts", "time(s)"
    )?;
    for (name, inst, preprocess) in bench_instances(args)? {
        let config = SolverConfig {
            preprocess: preprocess || base.preprocess,
            time_limit: Some(base.time_limit.unwrap_or(Duration::from_secs_f64(args.instance_timeout_s))),
            ..base.clone()
        };
        let r = solve(&inst, &config);
        let status = match r.status {
            Status::Sat => "SAT",
            Status::Unsat => "UNSAT",
            Status::Unknown(_) => "UNKNOWN",
        };
        writeln!(
            out,
            "{:<20} {:>8} {:>12} {:>12} {:>10.3}",
            name,
            status,
            r.stats.decisions,
            r.stats.conflicts,
            r.stats.wall_time.as_secs_f64()
        )?;
        out.flush()?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve(args) => run_solve(&args),
        Command::Gen { family, output } => {
            let text = write_instance(&generate(&family)?);
            match output {
                Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => io::stdout().lock().write_all(text.as_bytes())?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { instance, model } => run_verify(&instance, &model),
        Command::Bench(args) => run_bench(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
