//! Core-guided weighted MaxSMT and an engine cross-check harness.
//!
//! ## Algorithm overview
//!
//! The core-guided engine solves weighted MaxSMT without an arithmetic cost
//! variable, in the style of WPM1.  Every soft clause gets a fresh blocking
//! variable `b` and is asserted as `(C or b)`; solving under the assumptions
//! `not b` demands that all softs hold.  Each unsatisfiable core is a set of
//! softs that cannot all hold together: the minimum weight `w` in the core
//! moves into the lower bound, every member is split into a residual copy
//! at `weight - w` (keeping its blocker) and a relaxed copy `(C or r)` at
//! weight `w` with a fresh blocker, and an at-most-one constraint over the
//! relaxation variables allows exactly one member to be forgiven per core.
//! When the solver finally answers Sat, the lower bound is the optimum and
//! the model attains it.  Small cores are first shrunk greedily by re-solving
//! with one member dropped at a time.
//!
//! The cross-check harness runs the same problem through the cut-based
//! optimizer under every sorting-network configuration and through the
//! core-guided engine, and reports whether all lanes agree, which makes
//! disagreements between independently implemented engines loud.

use std::time::Instant;

use crate::core::{Lit, Rational, Var};
use crate::encoders::{build_network, AttachConfig, Encoding, NetworkKind};
use crate::lra::LraVar;
use crate::omt::{optimize, Model, OmtConfig, OmtProblem, OptStatus, SearchStrategy};
use crate::sat::{SolveLimits, SolveOutcome};
use crate::smt::{EpPolicy, SmtSolver, SmtStats};

#[derive(Clone, Debug, Default)]
pub struct CoreGuidedConfig {
    pub ep: EpPolicy,
    pub deadline: Option<Instant>,
    /// Greedily shrink small cores before splitting them.
    pub minimize_cores: bool,
}

impl CoreGuidedConfig {
    pub fn new() -> CoreGuidedConfig {
        CoreGuidedConfig { ep: EpPolicy::default(), deadline: None, minimize_cores: true }
    }
}

#[derive(Clone, Debug)]
pub struct CoreGuidedResult {
    pub status: OptStatus,
    /// Total weight of violated softs at the optimum.
    pub optimum: Option<Rational>,
    pub model: Option<Model>,
    /// Proven lower bound on the optimum (equals it when Optimal).
    pub lower_bound: Rational,
    pub cores: usize,
    /// Soft clauses removed from cores by greedy minimization.
    pub core_minimization_drops: usize,
    pub stats: SmtStats,
}

/// One active soft clause: `lits or blocker` is asserted, and the
/// assumption `not blocker` demands the clause while weight is positive.
struct Active {
    lits: Vec<Lit>,
    blocker: Var,
    weight: Rational,
}

/// Drops core members one at a time while the rest stays unsatisfiable.
/// Only worthwhile for small cores; larger ones are split as-is.
fn shrink_core(
    smt: &mut SmtSolver,
    mut core: Vec<Lit>,
    limits: &SolveLimits,
) -> (Vec<Lit>, usize) {
    if core.len() > 8 || core.len() <= 1 {
        return (core, 0);
    }
    let mut drops = 0;
    let mut i = 0;
    while i < core.len() && core.len() > 1 {
        let mut test = core.clone();
        test.remove(i);
        match smt.check_sat(&test, limits) {
            SolveOutcome::Unsat { core: smaller } => {
                drops += core.len() - smaller.len();
                core = smaller;
                if core.is_empty() {
                    break;
                }
            }
            _ => i += 1,
        }
    }
    (core, drops)
}

pub fn solve_core_guided(problem: &OmtProblem, cfg: &CoreGuidedConfig) -> CoreGuidedResult {
    assert_eq!(problem.objectives.len(), 1, "core-guided search takes one objective");
    let objective = &problem.objectives[0];
    assert!(objective.is_pure_pb(), "core-guided search takes pseudo-Boolean objectives");

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
    let mut active: Vec<Active> = objective
        .softs
        .iter()
        .map(|sc| {
            let c = smt.lit_of_term(&sc.term);
            let blocker = smt.new_sat_var();
            smt.add_clause_lits(vec![c, Lit::positive(blocker)]);
            Active { lits: vec![c], blocker, weight: sc.weight.clone() }
        })
        .collect();

    let limits = SolveLimits { deadline: cfg.deadline, max_conflicts: None };
    let mut lb = Rational::zero();
    let mut cores = 0;
    let mut drops = 0;

    let finish = |smt: &SmtSolver,
                  status: OptStatus,
                  optimum: Option<Rational>,
                  model: Option<Model>,
                  lb: Rational,
                  cores: usize,
                  drops: usize| CoreGuidedResult {
        status,
        optimum,
        model,
        lower_bound: lb,
        cores,
        core_minimization_drops: drops,
        stats: smt.stats(),
    };

    loop {
        if cfg.deadline.is_some_and(|d| Instant::now() >= d) {
            return finish(&smt, OptStatus::Timeout, None, None, lb, cores, drops);
        }
        let assumptions: Vec<Lit> = active
            .iter()
            .filter(|a| a.weight.is_positive())
            .map(|a| Lit::negative(a.blocker))
            .collect();
        match smt.check_sat(&assumptions, &limits) {
            SolveOutcome::Aborted => {
                return finish(&smt, OptStatus::Timeout, None, None, lb, cores, drops);
            }
            SolveOutcome::Sat => {
                let delta = smt.model_delta();
                let model = Model {
                    bools: (0..problem.num_bools).map(|i| smt.bool_value(i).is_true()).collect(),
                    reals: (0..problem.num_reals)
                        .map(|i| smt.concrete_value(LraVar(i), &delta))
                        .collect(),
                    cost: lb.clone(),
                };
                let optimum = lb.clone();
                return finish(&smt, OptStatus::Optimal, Some(optimum), Some(model), lb, cores, drops);
            }
            SolveOutcome::Unsat { core } => {
                smt.reset_to_root();
                if core.is_empty() {
                    return finish(&smt, OptStatus::Unsat, None, None, lb, cores, drops);
                }
                cores += 1;
                let core = if cfg.minimize_cores {
                    let (core, d) = shrink_core(&mut smt, core, &limits);
                    smt.reset_to_root();
                    drops += d;
                    core
                } else {
                    core
                };
                if core.is_empty() {
                    return finish(&smt, OptStatus::Unsat, None, None, lb, cores, drops);
                }
                let members: Vec<usize> = active
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| core.contains(&Lit::negative(a.blocker)))
                    .map(|(i, _)| i)
                    .collect();
                assert!(!members.is_empty(), "core must name active softs");
                let w_min =
                    members.iter().map(|&i| active[i].weight.clone()).min().unwrap();
                lb += &w_min;
                let mut relax_lits = Vec::new();
                let mut split: Vec<Active> = Vec::new();
                for &i in &members {
                    let r = Lit::positive(smt.new_sat_var());
                    let blocker = smt.new_sat_var();
                    let mut lits = active[i].lits.clone();
                    lits.push(r);
                    let mut clause = lits.clone();
                    clause.push(Lit::positive(blocker));
                    smt.add_clause_lits(clause);
                    relax_lits.push(r);
                    split.push(Active { lits, blocker, weight: w_min.clone() });
                    active[i].weight = &active[i].weight - &w_min;
                }
                // At most one member of the core may be forgiven: the
                // second-largest sorted output must stay false.
                if relax_lits.len() >= 2 {
                    let outs = build_network(&mut smt, NetworkKind::CardNet, &relax_lits);
                    smt.add_clause_lits(vec![!outs[1]]);
                }
                active.extend(split);
            }
        }
    }
}

/// One engine configuration's answer in a cross-check run.
#[derive(Clone, Debug)]
pub struct AgreementRun {
    pub label: String,
    pub status: OptStatus,
    pub optimum: Option<Rational>,
}

/// Outcome of running all engine lanes on the same problem.
#[derive(Clone, Debug)]
pub struct AgreementReport {
    pub runs: Vec<AgreementRun>,
    pub agreed: bool,
    /// The common optimum when all lanes agree (None also covers agreement
    /// on unsatisfiability).
    pub optimum: Option<Rational>,
}

/// Runs the cut-based optimizer under every network encoding plus the
/// core-guided engine and compares answers.
pub fn cross_check(problem: &OmtProblem, ep: EpPolicy, deadline: Option<Instant>) -> AgreementReport {
    let mut runs = Vec::new();
    for (label, search, encoding) in [
        ("omt-linear-none", SearchStrategy::Linear, Encoding::None),
        ("omt-linear-seqcounter", SearchStrategy::Linear, Encoding::SeqCounter),
        ("omt-linear-cardnet", SearchStrategy::Linear, Encoding::CardNet),
        ("omt-binary-none", SearchStrategy::Binary, Encoding::None),
        ("omt-adaptive-cardnet", SearchStrategy::Adaptive, Encoding::CardNet),
    ] {
        let cfg = OmtConfig {
            search,
            attach: AttachConfig { encoding, ..AttachConfig::default() },
            ep,
            deadline,
            ..OmtConfig::default()
        };
        let out = optimize(problem, &cfg);
        runs.push(AgreementRun {
            label: label.to_string(),
            status: out.status,
            optimum: out.objective_values[0].clone(),
        });
    }
    let cg = solve_core_guided(
        problem,
        &CoreGuidedConfig { ep, deadline, minimize_cores: true },
    );
    runs.push(AgreementRun {
        label: "core-guided".to_string(),
        status: cg.status,
        optimum: cg.optimum.clone(),
    });
    let agreed = runs
        .windows(2)
        .all(|pair| pair[0].status == pair[1].status && pair[0].optimum == pair[1].optimum);
    let optimum = if agreed { runs[0].optimum.clone() } else { None };
    AgreementReport { runs, agreed, optimum }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::omt::Objective;
    use crate::smt::Term;
    use crate::testutil::{eval_term, model_cost, rng, RandomOmt};

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn soft(term: Term, weight: &str) -> crate::encoders::SoftClause {
        crate::encoders::SoftClause { term, weight: r(weight) }
    }

    #[test]
    fn random_instances_agree_with_oracle() {
        let mut next = rng(0xC0FFEE0DDBA11);
        for round in 0..25 {
            let inst = RandomOmt::generate(&mut next, 1);
            let problem = inst.problem();
            let want = inst.oracle().minimize_single();
            let out = solve_core_guided(&problem, &CoreGuidedConfig::new());
            match &want {
                None => assert_eq!(out.status, OptStatus::Unsat, "round {round}"),
                Some(w) => {
                    assert_eq!(out.status, OptStatus::Optimal, "round {round}");
                    assert_eq!(out.optimum.as_ref(), Some(w), "round {round}");
                    assert_eq!(&out.lower_bound, w, "round {round}");
                    let model = out.model.as_ref().unwrap();
                    for h in &problem.hard {
                        assert!(
                            eval_term(h, &model.bools, &model.reals),
                            "round {round}: model violates a hard constraint"
                        );
                    }
                    assert_eq!(&model_cost(&problem.objectives[0], model), w, "round {round}");
                }
            }
        }
    }

    #[test]
    fn core_shrinking_disabled_still_agrees() {
        let mut next = rng(0xDEADBEEFCAFE);
        let cfg = CoreGuidedConfig { minimize_cores: false, ..CoreGuidedConfig::new() };
        for round in 0..12 {
            let inst = RandomOmt::generate(&mut next, 1);
            let want = inst.oracle().minimize_single();
            let out = solve_core_guided(&inst.problem(), &cfg);
            assert_eq!(out.optimum, want, "round {round}");
        }
    }

    #[test]
    fn rational_weights_split_exactly() {
        let problem = OmtProblem {
            num_bools: 2,
            num_reals: 0,
            hard: vec![Term::or(vec![
                Term::not(Term::Bool(0)),
                Term::not(Term::Bool(1)),
            ])],
            objectives: vec![Objective {
                linear: None,
                softs: vec![soft(Term::Bool(0), "3/2"), soft(Term::Bool(1), "1")],
            }],
        };
        let out = solve_core_guided(&problem, &CoreGuidedConfig::new());
        assert_eq!(out.status, OptStatus::Optimal);
        assert_eq!(out.optimum, Some(r("1")));
        assert!(out.cores >= 1);
        let model = out.model.as_ref().unwrap();
        assert!(model.bools[0]);
        assert!(!model.bools[1]);
    }

    #[test]
    fn unsat_hard_constraints_reported() {
        let problem = OmtProblem {
            num_bools: 1,
            num_reals: 0,
            hard: vec![Term::Bool(0), Term::not(Term::Bool(0))],
            objectives: vec![Objective {
                linear: None,
                softs: vec![soft(Term::Bool(0), "1")],
            }],
        };
        let out = solve_core_guided(&problem, &CoreGuidedConfig::new());
        assert_eq!(out.status, OptStatus::Unsat);
        assert_eq!(out.optimum, None);
        assert!(out.model.is_none());
    }

    #[test]
    fn expired_deadline_reports_timeout() {
        let problem = OmtProblem {
            num_bools: 1,
            num_reals: 0,
            hard: vec![],
            objectives: vec![Objective {
                linear: None,
                softs: vec![soft(Term::Bool(0), "1")],
            }],
        };
        let cfg = CoreGuidedConfig {
            deadline: Some(Instant::now()),
            ..CoreGuidedConfig::new()
        };
        let out = solve_core_guided(&problem, &cfg);
        assert_eq!(out.status, OptStatus::Timeout);
        assert_eq!(out.optimum, None);
    }

    #[test]
    fn core_guided_is_deterministic() {
        let mut next = rng(0x1234ABCD5678);
        let inst = RandomOmt::generate(&mut next, 1);
        let problem = inst.problem();
        let a = solve_core_guided(&problem, &CoreGuidedConfig::new());
        let b = solve_core_guided(&problem, &CoreGuidedConfig::new());
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn cross_check_lanes_agree_on_random_instances() {
        let mut next = rng(0xFACEFEED1234);
        for round in 0..8 {
            let inst = RandomOmt::generate(&mut next, 1);
            let problem = inst.problem();
            let want = inst.oracle().minimize_single();
            let report = cross_check(&problem, EpPolicy::Fixpoint, None);
            assert!(report.agreed, "round {round}: lanes disagree: {:?}", report.runs);
            assert_eq!(report.runs.len(), 6);
            assert_eq!(report.optimum, want, "round {round}");
        }
    }

    #[test]
    fn forced_violations_accumulate_cores() {
        // Three independently violated softs force three cores of one
        // clause each.
        let problem = OmtProblem {
            num_bools: 3,
            num_reals: 0,
            hard: (0..3).map(|i| Term::not(Term::Bool(i))).collect(),
            objectives: vec![Objective {
                linear: None,
                softs: (0..3).map(|i| soft(Term::Bool(i), "1")).collect(),
            }],
        };
        let out = solve_core_guided(&problem, &CoreGuidedConfig::new());
        assert_eq!(out.status, OptStatus::Optimal);
        assert_eq!(out.optimum, Some(r("3")));
        assert_eq!(out.cores, 3);
    }
}
