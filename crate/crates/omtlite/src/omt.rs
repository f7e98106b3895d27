//! Optimization engine: minimize objectives by solve-and-cut over the SMT
//! kernel.
//!
//! ## Algorithm overview
//!
//! Each satisfiable Boolean frame is minimized exactly by the simplex
//! procedure, giving an upper bound, and a cost-bound cut is then learned as
//! a permanent level-0 unit clause: `cost < ub` when the bound is attained,
//! `cost <= ub` when it is an open infimum (which keeps frames that attain
//! the same value alive so attainment is reported correctly).  Because cuts
//! are ordinary threshold atoms, they canonicalize onto the same Boolean
//! variables as the threshold atoms wired to sorting-network outputs, and
//! unit propagation prunes over-budget soft-clause combinations without
//! touching the theory solver.
//!
//! Three search shapes share that step.  Linear search repeats it until
//! unsatisfiability proves the last bound optimal.  Binary search brackets
//! the optimum in `[lb, ub]`, querying the midpoint under an assumption:
//! satisfiable answers jump `ub` down to the frame minimum, refutations
//! learn the negated assumption, raise `lb`, and run an assumption-free
//! probe that detects optimality early.  The adaptive strategy runs binary
//! steps until the bracket has halved, then switches to linear.
//!
//! Multiple objectives compose lexicographically (a fresh solver per stage,
//! pinning earlier objectives to their optima) or by minimizing the maximum
//! of range-normalized objective values.

use std::time::Instant;

use crate::core::Rational;
use crate::encoders::{
    attach_objective, encode_mixed_objective, encode_soft_objective, AttachConfig,
    AttachmentReport, PbObjective, SoftClause,
};
use crate::lra::{LinExpr, LraVar, MinimizeOutcome};
use crate::sat::{SolveLimits, SolveOutcome};
use crate::smt::{AtomOp, EpPolicy, SmtSolver, SmtStats, Term};

/// How the optimum is searched for.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum SearchStrategy {
    #[default]
    Linear,
    Binary,
    Adaptive,
}

/// How multiple objectives combine.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Priority {
    #[default]
    Lexicographic,
    MaxMin,
}

#[derive(Clone, Debug, Default)]
pub struct OmtConfig {
    pub search: SearchStrategy,
    pub attach: AttachConfig,
    pub ep: EpPolicy,
    pub priority: Priority,
    pub deadline: Option<Instant>,
}

/// One objective: minimize `linear + weighted count of violated softs`.
/// A missing linear part makes it pseudo-Boolean, with every reachable cost
/// on the weight grid.
#[derive(Clone, Debug)]
pub struct Objective {
    pub linear: Option<LinExpr>,
    pub softs: Vec<SoftClause>,
}

impl Objective {
    pub fn is_pure_pb(&self) -> bool {
        self.linear.is_none()
    }
}

/// A complete problem: symbols, constraints, objectives.  Boolean symbols
/// are `Term::Bool(0..num_bools)`; arithmetic variables in `hard` and the
/// objectives are `LraVar(0..num_reals)`.
#[derive(Clone, Debug, Default)]
pub struct OmtProblem {
    pub num_bools: u32,
    pub num_reals: u32,
    pub hard: Vec<Term>,
    pub objectives: Vec<Objective>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OptStatus {
    Optimal,
    Unsat,
    Unbounded,
    Timeout,
}

/// Which unit clause a step learned.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CutKind {
    /// `cost < bound` after an attained minimum.
    UpperStrict,
    /// `cost <= bound` after an open infimum.
    UpperWeak,
    /// `cost > bound` after a refuted binary-search pivot.
    Lower,
}

/// Trace of one learned cut, with solver counters at the moment it was
/// added.
#[derive(Clone, Debug)]
pub struct CutRecord {
    pub kind: CutKind,
    pub bound: Rational,
    pub stats_at: SmtStats,
}

/// A concrete model: Boolean symbols and problem arithmetic variables, with
/// delta made rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    pub bools: Vec<bool>,
    pub reals: Vec<Rational>,
    pub cost: Rational,
}

/// Result of optimizing one objective.
#[derive(Clone, Debug)]
pub struct OptimizationOutcome {
    pub status: OptStatus,
    /// Exact infimum of the objective (meaningful unless Unsat/Unbounded;
    /// under Timeout it is the best bound found so far, if any).
    pub optimum: Option<Rational>,
    /// Whether some model attains the infimum.
    pub attained: bool,
    pub model: Option<Model>,
    /// Values of the caller's tracked variables at the reported model.
    pub tracked_values: Vec<Rational>,
    pub cuts: Vec<CutRecord>,
    pub stats: SmtStats,
    pub attach_report: AttachmentReport,
    /// The strategy actually used (mixed objectives fall back to linear).
    pub search_used: SearchStrategy,
}

/// Result of a whole optimization run.
#[derive(Clone, Debug)]
pub struct MultiOutcome {
    pub status: OptStatus,
    /// Per-stage details: one per objective under lexicographic priority,
    /// a single synthetic stage under maxmin.
    pub stages: Vec<OptimizationOutcome>,
    /// Final value of each original objective, in declaration order.
    pub objective_values: Vec<Option<Rational>>,
    pub model: Option<Model>,
    /// Zero-range objectives dropped from a maxmin combination.
    pub dropped_objectives: usize,
    /// Lexicographic optimization stopped early because a stage's optimum
    /// was an open infimum, which no model attains to pin.
    pub truncated_lex: bool,
}

pub fn optimize(problem: &OmtProblem, cfg: &OmtConfig) -> MultiOutcome {
    assert!(!problem.objectives.is_empty(), "nothing to optimize");
    match cfg.priority {
        Priority::Lexicographic => optimize_lex(problem, cfg),
        Priority::MaxMin => optimize_maxmin(problem, cfg),
    }
}

fn fresh_solver(problem: &OmtProblem, cfg: &OmtConfig) -> SmtSolver {
    let mut smt = SmtSolver::new(cfg.ep);
    for _ in 0..problem.num_bools {
        smt.new_bool();
    }
    for _ in 0..problem.num_reals {
        smt.new_real();
    }
    for h in &problem.hard {
        smt.assert_term(h);
    }
    smt
}

fn encode_objective(smt: &mut SmtSolver, obj: &Objective) -> PbObjective {
    match &obj.linear {
        Some(expr) => encode_mixed_objective(smt, expr, &obj.softs),
        None => encode_soft_objective(smt, &obj.softs),
    }
}

fn extract_model(smt: &SmtSolver, problem: &OmtProblem, cost: LraVar) -> Model {
    let delta = smt.model_delta();
    Model {
        bools: (0..problem.num_bools).map(|i| smt.bool_value(i).is_true()).collect(),
        reals: (0..problem.num_reals)
            .map(|i| smt.concrete_value(LraVar(i), &delta))
            .collect(),
        cost: smt.concrete_value(cost, &delta),
    }
}

struct Incumbent {
    value: Rational,
    attained: bool,
    model: Model,
    tracked_values: Vec<Rational>,
}

/// Shared solve-minimize-cut step.  Returns the new incumbent, or the
/// terminal outcome when the step ended the search.
enum Step {
    Improved,
    Unsat,
    Timeout,
    Unbounded,
}

struct StageState<'a> {
    smt: SmtSolver,
    problem: &'a OmtProblem,
    cost: LraVar,
    tracked: Vec<LraVar>,
    best: Option<Incumbent>,
    cuts: Vec<CutRecord>,
    deadline: Option<Instant>,
}

impl StageState<'_> {
    fn limits(&self) -> SolveLimits {
        SolveLimits { deadline: self.deadline, max_conflicts: None }
    }

    fn out_of_time(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    /// Solves under `assumptions`; on Sat, minimizes the cost, updates the
    /// incumbent, and learns the cut that excludes the current frame.
    fn step(&mut self, assumptions: &[crate::core::Lit]) -> Step {
        if self.out_of_time() {
            return Step::Timeout;
        }
        match self.smt.check_sat(assumptions, &self.limits()) {
            SolveOutcome::Aborted => return Step::Timeout,
            SolveOutcome::Unsat { .. } => return Step::Unsat,
            SolveOutcome::Sat => {}
        }
        let MinimizeOutcome::Bounded(value) = self.smt.minimize(self.cost) else {
            return Step::Unbounded;
        };
        let attained = value.coeff().is_zero();
        let bound = value.real().clone();
        let model = extract_model(&self.smt, self.problem, self.cost);
        let delta = self.smt.model_delta();
        let tracked_values: Vec<Rational> =
            self.tracked.iter().map(|&v| self.smt.concrete_value(v, &delta)).collect();
        let better = match &self.best {
            None => true,
            Some(inc) => bound < inc.value || (bound == inc.value && attained && !inc.attained),
        };
        if better {
            self.best = Some(Incumbent { value: bound.clone(), attained, model, tracked_values });
        }
        self.smt.reset_to_root();
        let (op, kind) = if attained {
            (AtomOp::Lt, CutKind::UpperStrict)
        } else {
            (AtomOp::Le, CutKind::UpperWeak)
        };
        self.cuts.push(CutRecord { kind, bound: bound.clone(), stats_at: self.smt.stats() });
        let cut = self.smt.lit_of_atom(&LinExpr::var(self.cost), op, &bound);
        self.smt.add_clause_lits(vec![cut]);
        Step::Improved
    }

    fn learn_lower_cut(&mut self, pivot: &Rational) {
        self.smt.reset_to_root();
        self.cuts.push(CutRecord {
            kind: CutKind::Lower,
            bound: pivot.clone(),
            stats_at: self.smt.stats(),
        });
        let lit = self.smt.lit_of_atom(&LinExpr::var(self.cost), AtomOp::Gt, pivot);
        self.smt.add_clause_lits(vec![lit]);
    }

    fn finish(
        self,
        status: OptStatus,
        attach_report: AttachmentReport,
        search_used: SearchStrategy,
    ) -> OptimizationOutcome {
        let stats = self.smt.stats();
        let (optimum, attained, model, tracked_values) = match self.best {
            Some(inc) => (Some(inc.value), inc.attained, Some(inc.model), inc.tracked_values),
            None => (None, false, None, Vec::new()),
        };
        OptimizationOutcome {
            status,
            optimum,
            attained,
            model,
            tracked_values,
            cuts: self.cuts,
            stats,
            attach_report,
            search_used,
        }
    }
}

/// Minimizes one objective inside an already-built solver.  Values of the
/// `tracked` variables at the winning model are reported back.
fn optimize_stage(
    smt: SmtSolver,
    problem: &OmtProblem,
    pb: &PbObjective,
    tracked: Vec<LraVar>,
    attach_report: AttachmentReport,
    cfg: &OmtConfig,
) -> OptimizationOutcome {
    let search = if pb.pure_pb { cfg.search } else { SearchStrategy::Linear };
    let mut state = StageState {
        smt,
        problem,
        cost: pb.cost,
        tracked,
        best: None,
        cuts: Vec::new(),
        deadline: cfg.deadline,
    };
    // Every strategy starts with one unconstrained solve to establish an
    // upper bound (and satisfiability).
    match state.step(&[]) {
        Step::Unsat => return state.finish(OptStatus::Unsat, attach_report, search),
        Step::Timeout => return state.finish(OptStatus::Timeout, attach_report, search),
        Step::Unbounded => return state.finish(OptStatus::Unbounded, attach_report, search),
        Step::Improved => {}
    }
    match search {
        SearchStrategy::Linear => loop {
            match state.step(&[]) {
                Step::Improved => {}
                Step::Unsat => return state.finish(OptStatus::Optimal, attach_report, search),
                Step::Timeout => return state.finish(OptStatus::Timeout, attach_report, search),
                Step::Unbounded => {
                    return state.finish(OptStatus::Unbounded, attach_report, search)
                }
            }
        },
        SearchStrategy::Binary | SearchStrategy::Adaptive => {
            // Pure PB objectives are bounded below by zero.
            let mut lb = Rational::zero();
            let initial_gap = &state.best.as_ref().unwrap().value - &lb;
            let mut linear_mode = false;
            loop {
                let ub = state.best.as_ref().unwrap().value.clone();
                if search == SearchStrategy::Adaptive
                    && !linear_mode
                    && &(&ub - &lb) * &Rational::from_int(2) <= initial_gap
                {
                    linear_mode = true;
                }
                if linear_mode {
                    match state.step(&[]) {
                        Step::Improved => continue,
                        Step::Unsat => {
                            return state.finish(OptStatus::Optimal, attach_report, search)
                        }
                        Step::Timeout => {
                            return state.finish(OptStatus::Timeout, attach_report, search)
                        }
                        Step::Unbounded => {
                            return state.finish(OptStatus::Unbounded, attach_report, search)
                        }
                    }
                }
                if lb >= ub {
                    return state.finish(OptStatus::Optimal, attach_report, search);
                }
                let pivot = &(&lb + &ub) * &Rational::new(1, 2).unwrap();
                if state.out_of_time() {
                    return state.finish(OptStatus::Timeout, attach_report, search);
                }
                let assumption =
                    state.smt.lit_of_atom(&LinExpr::var(state.cost), AtomOp::Le, &pivot);
                match state.step(&[assumption]) {
                    Step::Improved => {}
                    Step::Timeout => {
                        return state.finish(OptStatus::Timeout, attach_report, search)
                    }
                    Step::Unbounded => {
                        return state.finish(OptStatus::Unbounded, attach_report, search)
                    }
                    Step::Unsat => {
                        // Refuted pivot: everything at or below it is gone.
                        state.learn_lower_cut(&pivot);
                        lb = pivot;
                        // Assumption-free probe: either the incumbent is
                        // already optimal, or the probe improves it.
                        match state.step(&[]) {
                            Step::Improved => {}
                            Step::Unsat => {
                                return state.finish(OptStatus::Optimal, attach_report, search)
                            }
                            Step::Timeout => {
                                return state.finish(OptStatus::Timeout, attach_report, search)
                            }
                            Step::Unbounded => {
                                return state.finish(OptStatus::Unbounded, attach_report, search)
                            }
                        }
                    }
                }
            }
        }
    }
}

fn optimize_lex(problem: &OmtProblem, cfg: &OmtConfig) -> MultiOutcome {
    let mut stages: Vec<OptimizationOutcome> = Vec::new();
    let mut pinned: Vec<Rational> = Vec::new();
    let mut truncated = false;
    for (k, objective) in problem.objectives.iter().enumerate() {
        let mut smt = fresh_solver(problem, cfg);
        // Re-encode earlier objectives and pin them to their optima.
        for (prior, value) in problem.objectives[..k].iter().zip(&pinned) {
            let pb = encode_objective(&mut smt, prior);
            let pin = smt.lit_of_atom(&LinExpr::var(pb.cost), AtomOp::Eq, value);
            smt.add_clause_lits(vec![pin]);
        }
        let pb = encode_objective(&mut smt, objective);
        let report = attach_objective(&mut smt, &pb, &cfg.attach);
        let outcome = optimize_stage(smt, problem, &pb, Vec::new(), report, cfg);
        let done = outcome.status != OptStatus::Optimal;
        let open_infimum = outcome.status == OptStatus::Optimal && !outcome.attained;
        stages.push(outcome);
        if done {
            break;
        }
        if open_infimum && k + 1 < problem.objectives.len() {
            // No model attains the optimum, so later stages cannot pin it.
            truncated = true;
            break;
        }
        pinned.push(stages.last().unwrap().optimum.clone().unwrap());
    }
    let last = stages.last().unwrap();
    let status = last.status;
    let model = last.model.clone();
    let mut objective_values: Vec<Option<Rational>> =
        stages.iter().map(|s| s.optimum.clone()).collect();
    objective_values.resize(problem.objectives.len(), None);
    MultiOutcome {
        status,
        stages,
        objective_values,
        model,
        dropped_objectives: 0,
        truncated_lex: truncated,
    }
}

fn optimize_maxmin(problem: &OmtProblem, cfg: &OmtConfig) -> MultiOutcome {
    let mut smt = fresh_solver(problem, cfg);
    let mut pbs: Vec<PbObjective> = Vec::new();
    let mut reports: Vec<AttachmentReport> = Vec::new();
    for objective in &problem.objectives {
        assert!(
            objective.is_pure_pb(),
            "maxmin combines pseudo-Boolean objectives only"
        );
        let pb = encode_objective(&mut smt, objective);
        reports.push(attach_objective(&mut smt, &pb, &cfg.attach));
        pbs.push(pb);
    }
    // mm bounds the range-normalized cost of every kept objective;
    // zero-range objectives carry no information and are dropped.
    let mm = smt.new_real();
    let mut dropped = 0usize;
    let mut kept = 0usize;
    for pb in &pbs {
        let range = pb.total_weight();
        if range.is_zero() {
            dropped += 1;
            continue;
        }
        kept += 1;
        // cost - range * mm <= 0.
        let expr = LinExpr::new(vec![(pb.cost, Rational::one()), (mm, -range)]);
        let l = smt.lit_of_atom(&expr, AtomOp::Le, &Rational::zero());
        smt.add_clause_lits(vec![l]);
    }
    // Without a floor the objective would be unbounded; zero is tight since
    // all costs are nonnegative.
    let floor = smt.lit_of_atom(&LinExpr::var(mm), AtomOp::Ge, &Rational::zero());
    smt.add_clause_lits(vec![floor]);
    // Attachment already registered each objective's machinery and cost;
    // the combined variable joins the cost set.
    smt.extend_objective_vars(std::iter::empty(), [mm]);
    let mut total_report = AttachmentReport::default();
    for r in reports {
        total_report.networks += r.networks;
        total_report.aux_vars += r.aux_vars;
        total_report.clauses += r.clauses;
        total_report.skipped_singletons += r.skipped_singletons;
        total_report.materialized_targets += r.materialized_targets;
    }
    let synthetic = PbObjective {
        cost: mm,
        indicators: Vec::new(),
        linear_vars: Vec::new(),
        pure_pb: false,
    };
    let tracked: Vec<LraVar> = pbs.iter().map(|pb| pb.cost).collect();
    if kept == 0 {
        // All objectives are constant zero: one plain satisfiability check.
        let mut outcome = optimize_stage(smt, problem, &synthetic, tracked, total_report, cfg);
        let status = outcome.status;
        let model = outcome.model.take();
        let n = problem.objectives.len();
        let objective_values = if model.is_some() {
            vec![Some(Rational::zero()); n]
        } else {
            vec![None; n]
        };
        return MultiOutcome {
            status,
            stages: vec![outcome],
            objective_values,
            model,
            dropped_objectives: dropped,
            truncated_lex: false,
        };
    }
    let mut outcome = optimize_stage(smt, problem, &synthetic, tracked, total_report, cfg);
    let objective_values: Vec<Option<Rational>> = if outcome.tracked_values.is_empty() {
        vec![None; pbs.len()]
    } else {
        outcome.tracked_values.iter().cloned().map(Some).collect()
    };
    let status = outcome.status;
    let model = outcome.model.take();
    MultiOutcome {
        status,
        stages: vec![outcome],
        objective_values,
        model,
        dropped_objectives: dropped,
        truncated_lex: false,
    }
}
