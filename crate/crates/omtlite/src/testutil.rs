//! Shared test support: a random problem generator realized both as solver
//! terms and as an oracle instance, plus model evaluation helpers.

use crate::core::Rational;
use crate::encoders::SoftClause;
use crate::lra::{LinExpr, LraVar};
use crate::omt::{Model, Objective, OmtProblem};
use crate::oracle::brute::{OracleFormula, OracleInstance, OracleObjective};
use crate::oracle::fm::LinearConstraint;
use crate::smt::{AtomOp, Term};

pub fn rng(seed: u64) -> impl FnMut() -> u32 {
    let mut state = seed;
    move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 33) as u32
    }
}

pub fn eval_term(term: &Term, bools: &[bool], reals: &[Rational]) -> bool {
    match term {
        Term::True => true,
        Term::False => false,
        Term::Bool(i) => bools[*i as usize],
        Term::Atom(a) => {
            let mut lhs = Rational::zero();
            for (v, c) in a.expr.terms() {
                lhs += &(c * &reals[v.index()]);
            }
            match a.op {
                AtomOp::Le => lhs <= a.rhs,
                AtomOp::Lt => lhs < a.rhs,
                AtomOp::Ge => lhs >= a.rhs,
                AtomOp::Gt => lhs > a.rhs,
                AtomOp::Eq => lhs == a.rhs,
            }
        }
        Term::Not(t) => !eval_term(t, bools, reals),
        Term::And(ts) => ts.iter().all(|t| eval_term(t, bools, reals)),
        Term::Or(ts) => ts.iter().any(|t| eval_term(t, bools, reals)),
    }
}

/// Total weight of the objective's softs the model violates.
pub fn model_cost(objective: &Objective, model: &Model) -> Rational {
    let mut cost = Rational::zero();
    for sc in &objective.softs {
        if !eval_term(&sc.term, &model.bools, &model.reals) {
            cost += &sc.weight;
        }
    }
    cost
}

/// A clause of (positive, pool index) literals; the pool covers the
/// Boolean symbols first, then the atoms.
pub type PoolClause = Vec<(bool, usize)>;
type AtomSpec = (Vec<(u32, i64)>, AtomOp, i64);

/// Random problems over a shared literal pool of Boolean symbols and
/// arithmetic atoms.
pub struct RandomOmt {
    pub num_bools: u32,
    pub num_reals: u32,
    pub atoms: Vec<AtomSpec>,
    pub hard: Vec<PoolClause>,
    pub objectives: Vec<Vec<(PoolClause, Rational)>>,
}

fn random_clause(next: &mut impl FnMut() -> u32, pool: usize, max_len: u32) -> PoolClause {
    let len = 1 + (next() % max_len) as usize;
    (0..len).map(|_| (next().is_multiple_of(2), (next() % pool as u32) as usize)).collect()
}

impl RandomOmt {
    pub fn generate(next: &mut impl FnMut() -> u32, num_objectives: usize) -> RandomOmt {
        let num_bools = 1 + next() % 3;
        let num_reals = 1 + next() % 2;
        let num_atoms = 1 + (next() % 3) as usize;
        let mut atoms = Vec::new();
        for _ in 0..num_atoms {
            let nterms = 1 + (next() % 2) as usize;
            let mut terms = Vec::new();
            for _ in 0..nterms {
                terms.push((next() % num_reals, [1i64, -1, 2][(next() % 3) as usize]));
            }
            let op = [AtomOp::Le, AtomOp::Lt, AtomOp::Ge, AtomOp::Gt][(next() % 4) as usize];
            atoms.push((terms, op, (next() % 7) as i64 - 3));
        }
        let pool = num_bools as usize + atoms.len();
        let num_hard = 1 + (next() % 3) as usize;
        let hard = (0..num_hard).map(|_| random_clause(next, pool, 3)).collect();
        let weights = ["1", "2", "3", "1/2"];
        let objectives = (0..num_objectives)
            .map(|_| {
                let num_soft = 2 + (next() % 3) as usize;
                (0..num_soft)
                    .map(|_| {
                        let clause = random_clause(next, pool, 2);
                        (clause, weights[(next() % 4) as usize].parse().unwrap())
                    })
                    .collect()
            })
            .collect();
        RandomOmt { num_bools, num_reals, atoms, hard, objectives }
    }

    fn literal_term(&self, positive: bool, idx: usize) -> Term {
        let base = if idx < self.num_bools as usize {
            Term::Bool(idx as u32)
        } else {
            let (terms, op, rhs) = &self.atoms[idx - self.num_bools as usize];
            Term::atom(
                LinExpr::new(
                    terms.iter().map(|&(v, c)| (LraVar(v), Rational::from_int(c))).collect(),
                ),
                *op,
                Rational::from_int(*rhs),
            )
        };
        if positive { base } else { Term::not(base) }
    }

    fn clause_term(&self, clause: &[(bool, usize)]) -> Term {
        Term::or(clause.iter().map(|&(p, i)| self.literal_term(p, i)).collect())
    }

    pub fn problem(&self) -> OmtProblem {
        OmtProblem {
            num_bools: self.num_bools,
            num_reals: self.num_reals,
            hard: self.hard.iter().map(|c| self.clause_term(c)).collect(),
            objectives: self
                .objectives
                .iter()
                .map(|softs| Objective {
                    linear: None,
                    softs: softs
                        .iter()
                        .map(|(c, w)| SoftClause {
                            term: self.clause_term(c),
                            weight: w.clone(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn oracle(&self) -> OracleInstance {
        let mut constraints = Vec::new();
        let mut atom_f = Vec::new();
        for (terms, op, rhs) in &self.atoms {
            let coeffs: Vec<(usize, Rational)> =
                terms.iter().map(|&(v, c)| (v as usize, Rational::from_int(c))).collect();
            let rhs = Rational::from_int(*rhs);
            let neg: Vec<(usize, Rational)> = coeffs.iter().map(|(v, c)| (*v, -c)).collect();
            let (coeffs, strict, rhs) = match op {
                AtomOp::Le => (coeffs, false, rhs),
                AtomOp::Lt => (coeffs, true, rhs),
                AtomOp::Ge => (neg, false, -&rhs),
                AtomOp::Gt => (neg, true, -&rhs),
                AtomOp::Eq => unreachable!("equality atoms are not generated"),
            };
            constraints.push(LinearConstraint::new(coeffs, strict, rhs));
            atom_f.push(OracleFormula::Atom(constraints.len() - 1));
        }
        let lit_f = |positive: bool, idx: usize| {
            let base = if idx < self.num_bools as usize {
                OracleFormula::Bool(idx)
            } else {
                atom_f[idx - self.num_bools as usize].clone()
            };
            if positive { base } else { OracleFormula::Not(Box::new(base)) }
        };
        let clause_f = |clause: &[(bool, usize)]| {
            OracleFormula::Or(clause.iter().map(|&(p, i)| lit_f(p, i)).collect())
        };
        let hard: Vec<OracleFormula> = self.hard.iter().map(|c| clause_f(c)).collect();
        let objectives: Vec<OracleObjective> = self
            .objectives
            .iter()
            .map(|softs| OracleObjective {
                softs: softs.iter().map(|(c, w)| (clause_f(c), w.clone())).collect(),
            })
            .collect();
        OracleInstance { num_bools: self.num_bools as usize, atoms: constraints, hard, objectives }
    }
}
