//! Command-line driver.
//!
//! `omtlite [OPTIONS] [FILE]` solves a script from FILE (`-` for stdin) or,
//! with `--gen FAMILY`, a generated instance.  `omtlite bench` runs the full
//! configuration matrix over generated families and prints a CSV report.
//!
//! Exit codes: 0 optimal/sat, 20 unsat, 30 timeout, 1 usage or input error.

use std::fs;
use std::io::Read;
use std::process::exit;

use clap::{Parser, Subcommand, ValueEnum};

use omtlite::encoders::{ChunkPolicy, Encoding, NetworkKind};
use omtlite::omt::SearchStrategy;
use omtlite::smt::EpPolicy;

use omtlite_cli::ast::Script;
use omtlite_cli::bench::{default_matrix, run_bench};
use omtlite_cli::generate::{self, Family};
use omtlite_cli::parse;
use omtlite_cli::run::{self, EngineKind, EngineOpts, Execution};
use omtlite_cli::verify::{self, Verdict};

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    /// Solve-and-cut optimization on the SMT solver.
    Omt,
    /// Core-guided MaxSAT (single pure soft-clause objective only).
    Maxsat,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingArg {
    /// No network; cost bounds are enforced by the theory solver alone.
    None,
    /// Sequential-counter network.
    Seqcounter,
    /// Cardinality (merge-sorting) network.
    Cardnet,
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchArg {
    Linear,
    Binary,
    Adaptive,
}

#[derive(Clone, Copy, ValueEnum)]
enum EpArg {
    Off,
    Decision,
    Fixpoint,
}

fn parse_chunk(s: &str) -> Result<ChunkPolicy, String> {
    if s == "inf" {
        return Ok(ChunkPolicy::Unlimited);
    }
    match s.parse::<u32>() {
        Ok(n) if n > 0 => Ok(ChunkPolicy::Size(n)),
        _ => Err(format!("expected a positive integer or `inf`, got `{s}`")),
    }
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse()
}

#[derive(Parser)]
#[command(name = "omtlite", version, about = "MaxSMT solver for Boolean + linear rational arithmetic")]
struct Cli {
    #[command(subcommand)]
    command: Option<Cmd>,

    /// Input script path, `-` for stdin.
    #[arg(value_name = "FILE", conflicts_with = "family")]
    file: Option<String>,

    /// Optimization engine.
    #[arg(long, value_enum, default_value = "omt")]
    engine: EngineArg,

    /// Cost-bound network attached to soft-clause objectives.
    #[arg(long, value_enum, default_value = "none")]
    encoding: EncodingArg,

    /// Indicators per network chunk, or `inf` for one full-width network.
    #[arg(long, value_name = "N|inf", default_value = "inf", value_parser = parse_chunk)]
    chunk: ChunkPolicy,

    /// Objective search strategy.
    #[arg(long, value_enum, default_value = "linear")]
    search: SearchArg,

    /// Early-pruning policy for intermediate theory calls.
    #[arg(long, value_enum, default_value = "fixpoint")]
    ep: EpArg,

    /// Generator seed.
    #[arg(long, default_value_t = 0, requires = "family")]
    seed: u64,

    /// Wall-clock budget in milliseconds.
    #[arg(long, value_name = "MS")]
    timeout: Option<u64>,

    /// Re-check the reported optimum and model after solving.
    #[arg(long)]
    verify: bool,

    /// Print solver statistics as `; <name> <value>` comment lines.
    #[arg(long)]
    stats: bool,

    /// Write the first objective's network to PATH in DIMACS form.
    #[arg(long, value_name = "PATH")]
    dimacs_out: Option<String>,

    /// Generate an instance of this family instead of reading FILE.
    #[arg(long = "gen", value_name = "FAMILY", value_parser = parse_family)]
    family: Option<Family>,

    /// Instance size (soft-clause count) for --gen.
    #[arg(long, default_value_t = 8, requires = "family")]
    n: usize,

    /// Print the generated instance instead of solving it.
    #[arg(long, requires = "family")]
    emit: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the configuration matrix over generated instances; emit CSV.
    Bench {
        /// Instance families, comma separated.
        #[arg(long, value_delimiter = ',', value_parser = parse_family,
              default_values_t = Family::all())]
        families: Vec<Family>,

        /// Instance sizes, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8])]
        sizes: Vec<usize>,

        /// Generator seeds, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [0u64, 1])]
        seeds: Vec<u64>,

        /// Worker threads (default: available parallelism).
        #[arg(long)]
        jobs: Option<usize>,

        /// Per-run budget in milliseconds.
        #[arg(long, value_name = "MS")]
        timeout: Option<u64>,

        /// Write the CSV report here instead of stdout.
        #[arg(long, value_name = "PATH")]
        out: Option<String>,
    },
}

impl Cli {
    fn opts(&self) -> EngineOpts {
        EngineOpts {
            engine: match self.engine {
                EngineArg::Omt => EngineKind::Omt,
                EngineArg::Maxsat => EngineKind::Maxsat,
            },
            encoding: match self.encoding {
                EncodingArg::None => Encoding::None,
                EncodingArg::Seqcounter => Encoding::SeqCounter,
                EncodingArg::Cardnet => Encoding::CardNet,
            },
            chunk: self.chunk,
            search: match self.search {
                SearchArg::Linear => SearchStrategy::Linear,
                SearchArg::Binary => SearchStrategy::Binary,
                SearchArg::Adaptive => SearchStrategy::Adaptive,
            },
            ep: match self.ep {
                EpArg::Off => EpPolicy::Off,
                EpArg::Decision => EpPolicy::Decision,
                EpArg::Fixpoint => EpPolicy::Fixpoint,
            },
            timeout_ms: self.timeout,
        }
    }
}

/// Writes to stdout, ignoring a closed pipe (e.g. `omtlite ... | head`).
fn emit_stdout(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn read_input(path: &str) -> Result<String, String> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| format!("stdin: {e}"))?;
        Ok(text)
    } else {
        fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))
    }
}

fn export_dimacs(cli: &Cli, lowered: &omtlite_cli::lower::Lowered, path: &str) -> Result<(), String> {
    let kind = match cli.encoding {
        EncodingArg::Seqcounter => NetworkKind::SeqCounter,
        EncodingArg::Cardnet => NetworkKind::CardNet,
        EncodingArg::None => {
            return Err("--dimacs-out needs --encoding seqcounter or cardnet".to_string())
        }
    };
    let problem = lowered.engine_problem();
    let n = match problem.objectives.first() {
        Some(objective) if !objective.softs.is_empty() => objective.softs.len(),
        _ => return Err("--dimacs-out needs an objective with soft clauses".to_string()),
    };
    fs::write(path, omtlite::encoders::network_dimacs(kind, n)).map_err(|e| format!("{path}: {e}"))
}

fn print_stats(exec: &Execution) {
    let s = &exec.stats;
    for (name, value) in [
        ("decisions", s.search.decisions),
        ("propagations", s.search.propagations),
        ("conflicts", s.search.conflicts),
        ("restarts", s.search.restarts),
        ("learned", s.search.learned),
        ("deleted", s.search.deleted),
        ("theory_checks", s.theory_checks),
        ("theory_conflicts", s.theory_conflicts),
        ("objective_theory_conflicts", s.objective_theory_conflicts),
        ("cuts", exec.cuts as u64),
    ] {
        emit_stdout(&format!("; {name} {value}\n"));
    }
}

fn solve(cli: &Cli, script: &Script) -> i32 {
    let (lowered, exec) = match run::execute(script, &cli.opts()) {
        Ok(pair) => pair,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    emit_stdout(&exec.stdout);
    if let Some(path) = &cli.dimacs_out {
        if let Err(msg) = export_dimacs(cli, &lowered, path) {
            eprintln!("error: {msg}");
            return 1;
        }
    }
    if cli.stats {
        print_stats(&exec);
    }
    if cli.verify {
        match verify::verify_execution(&lowered, &exec) {
            Some(Verdict::Verified) => eprintln!("; verified"),
            Some(Verdict::Refuted(reason)) => {
                eprintln!("; refuted: {reason}");
                return 1;
            }
            None => {}
        }
    }
    exec.status.exit_code()
}

fn bench_cmd(
    families: &[Family],
    sizes: &[usize],
    seeds: &[u64],
    jobs: Option<usize>,
    timeout: Option<u64>,
    out: Option<&str>,
) -> i32 {
    let mut instances = Vec::new();
    for &family in families {
        for &n in sizes {
            for &seed in seeds {
                let name = generate::instance_name(family, n, seed);
                instances.push((name, generate::generate(family, n, seed)));
            }
        }
    }
    let jobs = jobs.unwrap_or_else(|| {
        std::thread::available_parallelism().map(usize::from).unwrap_or(1)
    });
    let csv = run_bench(&instances, &default_matrix(), jobs, timeout);
    match out {
        Some(path) => {
            if let Err(e) = fs::write(path, &csv) {
                eprintln!("error: {path}: {e}");
                return 1;
            }
            0
        }
        None => {
            emit_stdout(&csv);
            0
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            exit(code);
        }
    };

    if let Some(Cmd::Bench { families, sizes, seeds, jobs, timeout, out }) = &cli.command {
        exit(bench_cmd(families, sizes, seeds, *jobs, *timeout, out.as_deref()));
    }

    let script = if let Some(family) = cli.family {
        let script = generate::generate(family, cli.n, cli.seed);
        if cli.emit {
            emit_stdout(&script.to_string());
            exit(0);
        }
        script
    } else if let Some(path) = &cli.file {
        let text = match read_input(path) {
            Ok(text) => text,
            Err(msg) => {
                eprintln!("error: {msg}");
                exit(1);
            }
        };
        match parse::parse_script(&text) {
            Ok(script) => script,
            Err(e) => {
                eprintln!("error: {e}");
                exit(1);
            }
        }
    } else {
        eprintln!("error: no input; give FILE, `-`, or --gen FAMILY");
        exit(1);
    };

    exit(solve(&cli, &script));
}
