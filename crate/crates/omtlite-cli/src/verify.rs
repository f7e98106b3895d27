//! Independent certification of optimization results.
//!
//! A claimed optimum is checked three ways, none of which reuse the
//! optimizing solver path: (a) the model satisfies every hard assertion
//! under direct evaluation, (b) each objective evaluated at the model
//! equals its claimed optimum, and (c) a fresh solver proves that no
//! model beats the claim, by asserting the hard constraints together
//! with `cost < optimum` (at most `optimum` for an open infimum, which
//! no model may reach) and expecting unsatisfiability.  Lexicographic
//! claims pin every earlier objective to its optimum before bounding the
//! next; best-worst-group claims bound all group ratios below the
//! claimed worst simultaneously.  Any failure names the violated clause
//! or the improving witness.

use crate::lower::{eval_term, Lowered};
use crate::run::{Execution, RunStatus};
use omtlite::core::Rational;
use omtlite::lra::{LinExpr, LraVar};
use omtlite::omt::{OmtProblem, Priority};
use omtlite::sat::{SolveLimits, SolveOutcome};
use omtlite::smt::{AtomOp, EpPolicy, SmtSolver};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Verdict {
    Verified,
    Refuted(String),
}

impl Verdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, Verdict::Verified)
    }
}

/// An engine-level result to certify: per-objective optima in engine
/// orientation, with attainment flags, plus the witness model.
pub struct Claim<'a> {
    pub problem: &'a OmtProblem,
    pub priority: Priority,
    pub values: &'a [Option<(Rational, bool)>],
    pub bools: &'a [bool],
    pub reals: &'a [Rational],
}

fn soft_weight_sum(problem: &OmtProblem, idx: usize) -> Rational {
    let mut sum = Rational::zero();
    for soft in &problem.objectives[idx].softs {
        sum += &soft.weight;
    }
    sum
}

fn objective_cost(problem: &OmtProblem, idx: usize, bools: &[bool], reals: &[Rational]) -> Rational {
    let objective = &problem.objectives[idx];
    let mut cost = Rational::zero();
    if let Some(linear) = &objective.linear {
        for (v, c) in linear.terms() {
            cost += &(c * &reals[v.0 as usize]);
        }
    }
    for soft in &objective.softs {
        if !eval_term(&soft.term, bools, reals) {
            cost += &soft.weight;
        }
    }
    cost
}

fn fresh_solver(problem: &OmtProblem) -> SmtSolver {
    let mut smt = SmtSolver::new(EpPolicy::Fixpoint);
    for _ in 0..problem.num_bools {
        smt.new_bool();
    }
    for _ in 0..problem.num_reals {
        smt.new_real();
    }
    for term in &problem.hard {
        smt.assert_term(term);
    }
    smt
}

fn encode_objective(smt: &mut SmtSolver, problem: &OmtProblem, idx: usize) -> LraVar {
    let objective = &problem.objectives[idx];
    let pb = match &objective.linear {
        Some(linear) => omtlite::encoders::encode_mixed_objective(smt, linear, &objective.softs),
        None => omtlite::encoders::encode_soft_objective(smt, &objective.softs),
    };
    pb.cost
}

fn is_unsat(smt: &mut SmtSolver) -> Option<bool> {
    match smt.check_sat(&[], &SolveLimits::none()) {
        SolveOutcome::Unsat { .. } => Some(true),
        SolveOutcome::Sat => Some(false),
        SolveOutcome::Aborted => None,
    }
}

fn check_no_better(claim: &Claim) -> Verdict {
    let problem = claim.problem;
    match claim.priority {
        Priority::Lexicographic => {
            for (k, value) in claim.values.iter().enumerate() {
                let Some((bound, attained)) = value else { continue };
                let mut smt = fresh_solver(problem);
                for (j, prior) in claim.values.iter().enumerate().take(k) {
                    let Some((pin, _)) = prior else { continue };
                    let cost = encode_objective(&mut smt, problem, j);
                    let lit = smt.lit_of_atom(&LinExpr::var(cost), AtomOp::Eq, pin);
                    smt.add_clause_lits(vec![lit]);
                }
                let cost = encode_objective(&mut smt, problem, k);
                let op = if *attained { AtomOp::Lt } else { AtomOp::Le };
                let lit = smt.lit_of_atom(&LinExpr::var(cost), op, bound);
                smt.add_clause_lits(vec![lit]);
                match is_unsat(&mut smt) {
                    Some(true) => {}
                    Some(false) => {
                        return Verdict::Refuted(format!(
                            "objective {k}: a model beats the claimed optimum {bound}"
                        ))
                    }
                    None => return Verdict::Refuted(format!("objective {k}: bound check aborted")),
                }
            }
            Verdict::Verified
        }
        Priority::MaxMin => {
            let mut worst: Option<Rational> = None;
            for (j, value) in claim.values.iter().enumerate() {
                let Some((v, _)) = value else { continue };
                let range = soft_weight_sum(problem, j);
                if range.is_zero() {
                    continue;
                }
                let ratio = v * &range.recip().unwrap();
                worst = Some(match worst {
                    Some(w) => w.max(ratio),
                    None => ratio,
                });
            }
            let Some(worst) = worst else { return Verdict::Verified };
            let mut smt = fresh_solver(problem);
            let mut nontrivial = false;
            for j in 0..problem.objectives.len() {
                let range = soft_weight_sum(problem, j);
                if range.is_zero() {
                    continue;
                }
                nontrivial = true;
                let cost = encode_objective(&mut smt, problem, j);
                let bound = &range * &worst;
                let lit = smt.lit_of_atom(&LinExpr::var(cost), AtomOp::Lt, &bound);
                smt.add_clause_lits(vec![lit]);
            }
            if !nontrivial {
                return Verdict::Verified;
            }
            match is_unsat(&mut smt) {
                Some(true) => Verdict::Verified,
                Some(false) => Verdict::Refuted(format!(
                    "a model beats the claimed worst group ratio {worst}"
                )),
                None => Verdict::Refuted("worst-group bound check aborted".into()),
            }
        }
    }
}

/// Certifies an engine-level optimal claim.
pub fn verify_claim(claim: &Claim) -> Verdict {
    let problem = claim.problem;
    if claim.bools.len() != problem.num_bools as usize
        || claim.reals.len() != problem.num_reals as usize
    {
        return Verdict::Refuted("model has the wrong shape".into());
    }
    for (k, term) in problem.hard.iter().enumerate() {
        if !eval_term(term, claim.bools, claim.reals) {
            return Verdict::Refuted(format!("hard assertion #{k} is violated by the model"));
        }
    }
    for (idx, value) in claim.values.iter().enumerate() {
        let Some((claimed, attained)) = value else {
            return Verdict::Refuted(format!("objective {idx} has no claimed value"));
        };
        let cost = objective_cost(problem, idx, claim.bools, claim.reals);
        if *attained && claim.priority == Priority::Lexicographic && cost != *claimed {
            return Verdict::Refuted(format!(
                "objective {idx} evaluates to {cost}, claimed {claimed}"
            ));
        }
        if claim.priority == Priority::MaxMin && cost != *claimed {
            return Verdict::Refuted(format!(
                "objective {idx} evaluates to {cost}, claimed {claimed}"
            ));
        }
        if !attained && cost <= *claimed {
            return Verdict::Refuted(format!(
                "objective {idx} claims an open infimum {claimed} but the model reaches {cost}"
            ));
        }
    }
    check_no_better(claim)
}

/// Certifies a script execution.  `None` when the result is not an
/// optimality claim (plain sat, unsat, unbounded, or timeout).
pub fn verify_execution(lowered: &Lowered, exec: &Execution) -> Option<Verdict> {
    if exec.status != RunStatus::Optimal || lowered.objectives.is_empty() {
        return None;
    }
    let problem = lowered.engine_problem();
    let Some((bools, reals)) = &exec.model else {
        return Some(Verdict::Refuted("optimal result carries no model".into()));
    };
    let verdict = verify_claim(&Claim {
        problem: &problem,
        priority: lowered.priority,
        values: &exec.engine_values,
        bools,
        reals,
    });
    if let Verdict::Refuted(reason) = &verdict {
        for (k, term) in problem.hard.iter().enumerate() {
            if !eval_term(term, bools, reals) {
                return Some(Verdict::Refuted(format!(
                    "{reason}; hard assertion: {}",
                    lowered.hard_surface[k]
                )));
            }
        }
    }
    Some(verdict)
}
