//! Script execution: lowering, engine dispatch, and output formatting.
//!
//! A script runs against one of two engines.  `omt` hands the whole
//! problem to the solve-and-cut optimizer with the configured search
//! strategy, network encoding, and multi-objective priority.  `maxsat`
//! requires a single pure soft-group objective and runs the core-guided
//! engine instead.  Results are rendered in the script's own order:
//! `check-sat` prints `sat`/`unsat`/`unknown`, `get-objectives` prints
//! one `(name value)` entry per objective in surface terms (open infima
//! as `(+ v epsilon)`, unbounded objectives as infinities), and
//! `get-model` prints `define-fun` entries for every declared constant.

use crate::ast::{Command, Script};
use crate::lower::{lower, Lowered};
use crate::parse::{ErrorKind, FrontError};
use omtlite::core::Rational;
use omtlite::encoders::{AttachConfig, ChunkPolicy, Encoding};
use omtlite::lra::LraVar;
use omtlite::maxsmt::{solve_core_guided, CoreGuidedConfig};
use omtlite::omt::{optimize, OmtConfig, OptStatus, Priority, SearchStrategy};
use omtlite::sat::{SolveLimits, SolveOutcome};
use omtlite::smt::{EpPolicy, SmtSolver, SmtStats};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum EngineKind {
    #[default]
    Omt,
    Maxsat,
}

/// Solver-side knobs, orthogonal to the script.
#[derive(Clone, Debug)]
pub struct EngineOpts {
    pub engine: EngineKind,
    pub encoding: Encoding,
    pub chunk: ChunkPolicy,
    pub search: SearchStrategy,
    pub ep: EpPolicy,
    pub timeout_ms: Option<u64>,
}

impl Default for EngineOpts {
    fn default() -> Self {
        EngineOpts {
            engine: EngineKind::Omt,
            encoding: Encoding::None,
            chunk: ChunkPolicy::Unlimited,
            search: SearchStrategy::Linear,
            ep: EpPolicy::Fixpoint,
            timeout_ms: None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RunStatus {
    Sat,
    Optimal,
    Unsat,
    Unbounded,
    Timeout,
}

impl RunStatus {
    pub fn label(self) -> &'static str {
        match self {
            RunStatus::Sat => "Sat",
            RunStatus::Optimal => "Optimal",
            RunStatus::Unsat => "Unsat",
            RunStatus::Unbounded => "Unbounded",
            RunStatus::Timeout => "Timeout",
        }
    }

    /// `check-sat` answer line.
    pub fn answer(self) -> &'static str {
        match self {
            RunStatus::Sat | RunStatus::Optimal | RunStatus::Unbounded => "sat",
            RunStatus::Unsat => "unsat",
            RunStatus::Timeout => "unknown",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Sat | RunStatus::Optimal | RunStatus::Unbounded => 0,
            RunStatus::Unsat => 20,
            RunStatus::Timeout => 30,
        }
    }
}

/// Reported value of one surface objective.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ObjValue {
    Known { value: Rational, attained: bool },
    Unbounded,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct Execution {
    pub status: RunStatus,
    /// Text produced by the query commands, in script order.
    pub stdout: String,
    /// Surface-side objective values.
    pub values: Vec<ObjValue>,
    /// Engine-side optima with attainment flags, for the verifier.
    pub engine_values: Vec<Option<(Rational, bool)>>,
    pub model: Option<(Vec<bool>, Vec<Rational>)>,
    pub stats: SmtStats,
    pub cuts: usize,
    /// Best surface-side bound proved before a timeout.
    pub best_bound: Option<Rational>,
}

fn add_stats(into: &mut SmtStats, from: &SmtStats) {
    into.search.decisions += from.search.decisions;
    into.search.propagations += from.search.propagations;
    into.search.conflicts += from.search.conflicts;
    into.search.restarts += from.search.restarts;
    into.search.learned += from.search.learned;
    into.search.deleted += from.search.deleted;
    into.theory_checks += from.theory_checks;
    into.theory_conflicts += from.theory_conflicts;
    into.objective_theory_conflicts += from.objective_theory_conflicts;
}

fn deadline_of(opts: &EngineOpts) -> Option<Instant> {
    opts.timeout_ms.map(|ms| Instant::now() + Duration::from_millis(ms))
}

/// SMT-LIB value form of a rational: `2`, `(/ 5 2)`, `(- (/ 5 2))`.
pub fn smt_real(r: &Rational) -> String {
    let abs = r.abs();
    let body = if abs.is_integer() {
        abs.to_string()
    } else {
        format!("(/ {} {})", abs.numer(), abs.denom())
    };
    if r.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

fn solve_plain(lowered: &Lowered, opts: &EngineOpts) -> Execution {
    let mut smt = SmtSolver::new(opts.ep);
    for _ in 0..lowered.num_bools() {
        smt.new_bool();
    }
    for _ in 0..lowered.num_reals() {
        smt.new_real();
    }
    for term in &lowered.hard {
        smt.assert_term(term);
    }
    let limits = SolveLimits { deadline: deadline_of(opts), ..SolveLimits::none() };
    let (status, model) = match smt.check_sat(&[], &limits) {
        SolveOutcome::Sat => {
            let delta = smt.model_delta();
            let bools =
                (0..lowered.num_bools()).map(|i| smt.bool_value(i).is_true()).collect();
            let reals = (0..lowered.num_reals())
                .map(|i| smt.concrete_value(LraVar(i), &delta))
                .collect();
            (RunStatus::Sat, Some((bools, reals)))
        }
        SolveOutcome::Unsat { .. } => (RunStatus::Unsat, None),
        SolveOutcome::Aborted => (RunStatus::Timeout, None),
    };
    Execution {
        status,
        stdout: String::new(),
        values: Vec::new(),
        engine_values: Vec::new(),
        model,
        stats: smt.stats(),
        cuts: 0,
        best_bound: None,
    }
}

fn solve_omt(lowered: &Lowered, opts: &EngineOpts) -> Execution {
    let problem = lowered.engine_problem();
    let cfg = OmtConfig {
        search: opts.search,
        attach: AttachConfig {
            encoding: opts.encoding,
            chunk: opts.chunk,
            symmetric: false,
        },
        ep: opts.ep,
        priority: lowered.priority,
        deadline: deadline_of(opts),
    };
    let multi = optimize(&problem, &cfg);
    let status = match multi.status {
        OptStatus::Optimal => RunStatus::Optimal,
        OptStatus::Unsat => RunStatus::Unsat,
        OptStatus::Unbounded => RunStatus::Unbounded,
        OptStatus::Timeout => RunStatus::Timeout,
    };
    let attained_of = |idx: usize| match lowered.priority {
        Priority::Lexicographic => multi.stages.get(idx).map(|s| s.attained).unwrap_or(false),
        Priority::MaxMin => multi.stages.first().map(|s| s.attained).unwrap_or(false),
    };
    let mut values = Vec::new();
    let mut engine_values = Vec::new();
    for (idx, engine_value) in multi.objective_values.iter().enumerate() {
        match engine_value {
            Some(v) => {
                let attained = attained_of(idx);
                values.push(ObjValue::Known {
                    value: lowered.report_value(idx, v),
                    attained,
                });
                engine_values.push(Some((v.clone(), attained)));
            }
            None => {
                let unbounded = multi.status == OptStatus::Unbounded
                    && lowered.priority == Priority::Lexicographic
                    && idx + 1 == multi.stages.len();
                values.push(if unbounded { ObjValue::Unbounded } else { ObjValue::Unknown });
                engine_values.push(None);
            }
        }
    }
    let mut stats = SmtStats::default();
    let mut cuts = 0;
    for stage in &multi.stages {
        add_stats(&mut stats, &stage.stats);
        cuts += stage.cuts.len();
    }
    let best_bound = match lowered.priority {
        Priority::Lexicographic => multi
            .stages
            .last()
            .and_then(|s| s.optimum.clone())
            .map(|v| lowered.report_value(multi.stages.len() - 1, &v)),
        Priority::MaxMin => multi.stages.first().and_then(|s| s.optimum.clone()),
    };
    Execution {
        status,
        stdout: String::new(),
        values,
        engine_values,
        model: multi.model.map(|m| (m.bools, m.reals)),
        stats,
        cuts,
        best_bound,
    }
}

fn solve_maxsat(lowered: &Lowered, opts: &EngineOpts) -> Result<Execution, FrontError> {
    let unsupported = |msg: &str| {
        let pos = lowered
            .objectives
            .first()
            .map(|s| s.pos)
            .unwrap_or(crate::ast::Pos { line: 1, col: 1 });
        Err(FrontError::new(pos, ErrorKind::Unsupported(msg.into())))
    };
    if lowered.objectives.len() != 1 {
        return unsupported("the maxsat engine needs exactly one objective");
    }
    let problem = lowered.engine_problem();
    if !problem.objectives[0].is_pure_pb() {
        return unsupported("the maxsat engine needs a pure soft-group objective");
    }
    let cfg = CoreGuidedConfig { deadline: deadline_of(opts), ep: opts.ep, ..CoreGuidedConfig::new() };
    let result = solve_core_guided(&problem, &cfg);
    let status = match result.status {
        OptStatus::Optimal => RunStatus::Optimal,
        OptStatus::Unsat => RunStatus::Unsat,
        OptStatus::Unbounded => RunStatus::Unbounded,
        OptStatus::Timeout => RunStatus::Timeout,
    };
    let (values, engine_values) = match &result.optimum {
        Some(v) => (
            vec![ObjValue::Known { value: lowered.report_value(0, v), attained: true }],
            vec![Some((v.clone(), true))],
        ),
        None => (vec![ObjValue::Unknown], vec![None]),
    };
    let best_bound = match status {
        RunStatus::Timeout => Some(lowered.report_value(0, &result.lower_bound)),
        _ => None,
    };
    Ok(Execution {
        status,
        stdout: String::new(),
        values,
        engine_values,
        model: result.model.map(|m| (m.bools, m.reals)),
        stats: result.stats,
        cuts: 0,
        best_bound,
    })
}

fn render_objectives(lowered: &Lowered, exec: &Execution) -> String {
    if exec.status == RunStatus::Unsat {
        return "(error \"no objectives available\")\n".to_owned();
    }
    let mut out = String::from("(objectives\n");
    for (spec, value) in lowered.objectives.iter().zip(&exec.values) {
        let rendered = match value {
            ObjValue::Known { value, attained: true } => value.to_string(),
            ObjValue::Known { value, attained: false } => {
                if spec.maximize {
                    format!("(- {value} epsilon)")
                } else {
                    format!("(+ {value} epsilon)")
                }
            }
            ObjValue::Unbounded => {
                if spec.maximize {
                    "(+ oo)".to_owned()
                } else {
                    "(- oo)".to_owned()
                }
            }
            ObjValue::Unknown => "unknown".to_owned(),
        };
        let _ = writeln!(out, "  ({} {rendered})", spec.surface);
    }
    out.push_str(")\n");
    out
}

fn render_model(lowered: &Lowered, exec: &Execution) -> String {
    let Some((bools, reals)) = &exec.model else {
        return "(error \"no model available\")\n".to_owned();
    };
    let mut out = String::from("(\n");
    for (name, value) in lowered.bool_names.iter().zip(bools) {
        let _ = writeln!(out, "  (define-fun {name} () Bool {value})");
    }
    for (name, value) in lowered.real_names.iter().zip(reals) {
        let _ = writeln!(out, "  (define-fun {name} () Real {})", smt_real(value));
    }
    out.push_str(")\n");
    out
}

/// Lowers and solves a script, rendering query output in script order.
pub fn execute(script: &Script, opts: &EngineOpts) -> Result<(Lowered, Execution), FrontError> {
    let lowered = lower(script)?;
    let mut exec = if !lowered.has_check {
        Execution {
            status: RunStatus::Sat,
            stdout: String::new(),
            values: Vec::new(),
            engine_values: Vec::new(),
            model: None,
            stats: SmtStats::default(),
            cuts: 0,
            best_bound: None,
        }
    } else if lowered.objectives.is_empty() {
        solve_plain(&lowered, opts)
    } else {
        match opts.engine {
            EngineKind::Omt => solve_omt(&lowered, opts),
            EngineKind::Maxsat => solve_maxsat(&lowered, opts)?,
        }
    };
    let mut out = String::new();
    let mut checked = false;
    for cmd in &script.commands {
        match &cmd.node {
            Command::CheckSat => {
                out.push_str(exec.status.answer());
                out.push('\n');
                checked = true;
            }
            Command::GetObjectives if checked => out.push_str(&render_objectives(&lowered, &exec)),
            Command::GetModel if checked => out.push_str(&render_model(&lowered, &exec)),
            Command::Exit => break,
            _ => {}
        }
    }
    exec.stdout = out;
    Ok((lowered, exec))
}
