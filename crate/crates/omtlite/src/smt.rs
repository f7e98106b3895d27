//! SMT kernel: CDCL(T) for Boolean logic plus linear rational arithmetic.
//!
//! ## Algorithm overview
//!
//! Formulas arrive as [`Term`] trees and are reduced to CNF by Tseitin
//! transformation with full two-sided definitions and structure sharing, so
//! a repeated subterm reuses its definition variable.  Arithmetic atoms are
//! canonicalized before they meet the SAT solver: every relation becomes
//! `expr <= c` or `expr < c` with the leading coefficient scaled to +1,
//! negating the polarity when the scale factor is negative.  Two
//! syntactically different atoms with the same canonical form therefore map
//! to the same Boolean variable, which is what lets unit propagation connect
//! cost-bound cuts with threshold atoms introduced by objective encodings.
//! Equalities are split into a defined conjunction of the two weak
//! inequalities.
//!
//! The [`TheoryBridge`] couples the SAT trail to the simplex solver: newly
//! assigned atom literals become bounds, truncations rewind them, and
//! consistency checks run per the early-pruning policy (never on partial
//! assignments, after each decision, or at every propagation fixpoint).
//! Theory conflicts come back as clauses over the very literals that caused
//! them.  The bridge also classifies each conflict against the registered
//! objective variables, counting those that involve only objective
//! machinery and at least one cost threshold; optimization reports this
//! counter to show how much of the theory's work the Boolean encodings
//! absorb.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::core::{DeltaRational, LBool, Lit, Rational, Var};
use crate::lra::{BoundKind, LinExpr, LraSolver, LraVar, MinimizeOutcome};
use crate::sat::{
    SearchStats, SolveLimits, SolveOutcome, Solver, TheoryCheck, TheoryClient, TheoryResult,
};

/// Relation of a linear atom.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum AtomOp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

/// A linear constraint `expr op rhs` as written, before canonicalization.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LinearAtom {
    pub expr: LinExpr,
    pub op: AtomOp,
    pub rhs: Rational,
}

/// Propositional structure over Boolean symbols and linear atoms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    True,
    False,
    Bool(u32),
    Atom(LinearAtom),
    Not(Box<Term>),
    And(Vec<Term>),
    Or(Vec<Term>),
}

impl Term {
    #[allow(clippy::should_implement_trait)]
    pub fn not(t: Term) -> Term {
        Term::Not(Box::new(t))
    }

    pub fn and(ts: Vec<Term>) -> Term {
        Term::And(ts)
    }

    pub fn or(ts: Vec<Term>) -> Term {
        Term::Or(ts)
    }

    pub fn implies(a: Term, b: Term) -> Term {
        Term::Or(vec![Term::not(a), b])
    }

    pub fn iff(a: Term, b: Term) -> Term {
        Term::And(vec![
            Term::implies(a.clone(), b.clone()),
            Term::implies(b, a),
        ])
    }

    pub fn atom(expr: LinExpr, op: AtomOp, rhs: Rational) -> Term {
        Term::Atom(LinearAtom { expr, op, rhs })
    }
}

/// When the bridge runs a full simplex consistency check on a partial
/// assignment.  The final check on complete assignments always runs.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum EpPolicy {
    /// Only immediate bound clashes are caught early.
    Off,
    /// Check at the propagation fixpoint after each decision.
    Decision,
    /// Check at every propagation fixpoint.
    #[default]
    Fixpoint,
}

/// How an atom relates to the registered objective structure.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum AtomClass {
    /// Single-variable atom on a cost variable: a threshold on the
    /// objective's value.
    CostThreshold,
    /// Atom mentioning only objective machinery and cost variables.
    ObjectiveMachinery,
    Other,
}

#[derive(Clone, Debug)]
struct AtomBinding {
    /// Variable whose bounds realize the atom (the expression itself or a
    /// slack variable defined as it).
    lra_var: LraVar,
    strict: bool,
    rhs: Rational,
    /// Variables of the canonical expression, for conflict classification.
    vars: Vec<LraVar>,
}

/// Theory client gluing the simplex solver onto the SAT trail.
pub struct TheoryBridge {
    lra: LraSolver,
    bindings: HashMap<Var, AtomBinding>,
    /// How much of the trail has been fed to the simplex solver.
    cursor: usize,
    /// Simplex trail mark taken just before consuming each trail literal.
    marks: Vec<usize>,
    ep: EpPolicy,
    theory_conflicts: u64,
    objective_theory_conflicts: u64,
    machinery_vars: BTreeSet<LraVar>,
    cost_vars: BTreeSet<LraVar>,
}

impl TheoryBridge {
    fn new(ep: EpPolicy) -> Self {
        TheoryBridge {
            lra: LraSolver::new(),
            bindings: HashMap::new(),
            cursor: 0,
            marks: Vec::new(),
            ep,
            theory_conflicts: 0,
            objective_theory_conflicts: 0,
            machinery_vars: BTreeSet::new(),
            cost_vars: BTreeSet::new(),
        }
    }

    fn classify(&self, binding: &AtomBinding) -> AtomClass {
        if let [v] = binding.vars.as_slice() {
            if self.cost_vars.contains(v) {
                return AtomClass::CostThreshold;
            }
        }
        if !binding.vars.is_empty()
            && binding
                .vars
                .iter()
                .all(|v| self.machinery_vars.contains(v) || self.cost_vars.contains(v))
        {
            AtomClass::ObjectiveMachinery
        } else {
            AtomClass::Other
        }
    }

    fn conflict(&mut self, explanation: Vec<Lit>) -> TheoryResult {
        self.theory_conflicts += 1;
        let mut saw_threshold = false;
        let mut restricted = true;
        for l in &explanation {
            match self.bindings.get(&l.var()).map(|b| self.classify(b)) {
                Some(AtomClass::CostThreshold) => saw_threshold = true,
                Some(AtomClass::ObjectiveMachinery) => {}
                _ => restricted = false,
            }
        }
        if restricted && saw_threshold {
            self.objective_theory_conflicts += 1;
        }
        TheoryResult::Conflict(explanation.iter().map(|&l| !l).collect())
    }
}

impl TheoryClient for TheoryBridge {
    fn process(&mut self, trail: &[Lit], check: TheoryCheck) -> TheoryResult {
        while self.cursor < trail.len() {
            let lit = trail[self.cursor];
            let mark = self.lra.mark();
            if let Some(b) = self.bindings.get(&lit.var()).cloned() {
                // The positive literal is `expr <= rhs` (or `<`); the
                // negative one is the reversed strict complement.
                let (kind, value) = if lit.is_positive() {
                    let v = if b.strict {
                        DeltaRational::just_below(b.rhs.clone())
                    } else {
                        DeltaRational::from_rational(b.rhs.clone())
                    };
                    (BoundKind::Upper, v)
                } else {
                    let v = if b.strict {
                        DeltaRational::from_rational(b.rhs.clone())
                    } else {
                        DeltaRational::just_above(b.rhs.clone())
                    };
                    (BoundKind::Lower, v)
                };
                if let Err(expl) = self.lra.assert_bound(b.lra_var, kind, value, lit) {
                    self.lra.backtrack_to(mark);
                    return self.conflict(expl);
                }
            }
            self.marks.push(mark);
            self.cursor += 1;
        }
        let run_check = match check {
            TheoryCheck::Final => true,
            TheoryCheck::Fixpoint { after_decision } => match self.ep {
                EpPolicy::Off => false,
                EpPolicy::Decision => after_decision,
                EpPolicy::Fixpoint => true,
            },
        };
        if run_check {
            if let Err(expl) = self.lra.check() {
                return self.conflict(expl);
            }
        }
        TheoryResult::Ok
    }

    fn backtrack_trail(&mut self, new_len: usize) {
        if self.cursor > new_len {
            self.lra.backtrack_to(self.marks[new_len]);
            self.marks.truncate(new_len);
            self.cursor = new_len;
        }
    }
}

/// Counters exposed to the optimization layers.
#[derive(Clone, Debug, Default)]
pub struct SmtStats {
    pub search: SearchStats,
    /// Simplex consistency checks (early pruning plus final checks).
    pub theory_checks: u64,
    pub theory_conflicts: u64,
    /// Theory conflicts built entirely from objective machinery atoms with
    /// at least one cost-threshold atom among them.
    pub objective_theory_conflicts: u64,
}

type CanonicalKey = (LinExpr, bool, Rational);

/// The SMT solver facade used by the optimization engines and the frontend.
pub struct SmtSolver {
    sat: Solver<TheoryBridge>,
    true_lit: Lit,
    bool_vars: Vec<Var>,
    memo: HashMap<Term, Lit>,
    eq_memo: BTreeMap<(LinExpr, Rational), Lit>,
    atom_vars: BTreeMap<CanonicalKey, Var>,
}

impl SmtSolver {
    pub fn new(ep: EpPolicy) -> Self {
        let mut sat = Solver::with_theory(TheoryBridge::new(ep));
        let tv = sat.new_var();
        let true_lit = Lit::positive(tv);
        sat.add_clause(vec![true_lit]);
        SmtSolver {
            sat,
            true_lit,
            bool_vars: Vec::new(),
            memo: HashMap::new(),
            eq_memo: BTreeMap::new(),
            atom_vars: BTreeMap::new(),
        }
    }

    /// A literal fixed to true, for encoding constants.
    pub fn true_lit(&self) -> Lit {
        self.true_lit
    }

    /// Allocates a Boolean symbol usable as [`Term::Bool`].
    pub fn new_bool(&mut self) -> u32 {
        let v = self.sat.new_var();
        self.bool_vars.push(v);
        (self.bool_vars.len() - 1) as u32
    }

    /// Allocates an anonymous SAT variable (encoder plumbing).
    pub fn new_sat_var(&mut self) -> Var {
        self.sat.new_var()
    }

    /// Allocates an arithmetic variable.
    pub fn new_real(&mut self) -> LraVar {
        self.sat.theory_mut().lra.new_var()
    }

    /// Registers which arithmetic variables make up the objective encoding,
    /// enabling classification of theory conflicts.
    pub fn set_objective_vars(
        &mut self,
        machinery: impl IntoIterator<Item = LraVar>,
        cost: impl IntoIterator<Item = LraVar>,
    ) {
        let bridge = self.sat.theory_mut();
        bridge.machinery_vars = machinery.into_iter().collect();
        bridge.cost_vars = cost.into_iter().collect();
    }

    /// Like [`set_objective_vars`](Self::set_objective_vars) but adds to the
    /// registered sets, for problems with several encoded objectives.
    pub fn extend_objective_vars(
        &mut self,
        machinery: impl IntoIterator<Item = LraVar>,
        cost: impl IntoIterator<Item = LraVar>,
    ) {
        let bridge = self.sat.theory_mut();
        bridge.machinery_vars.extend(machinery);
        bridge.cost_vars.extend(cost);
    }

    /// Rewrites `expr op rhs` (op in {Le, Lt, Ge, Gt}) into the canonical
    /// `expr' <= rhs'` or `expr' < rhs'` with leading coefficient +1, plus
    /// the polarity relating the original to the canonical atom.
    fn canonicalize(expr: &LinExpr, op: AtomOp, rhs: &Rational) -> (CanonicalKey, bool) {
        let (expr, op, rhs) = match op {
            AtomOp::Ge => (expr.scale(&-Rational::one()), AtomOp::Le, -rhs),
            AtomOp::Gt => (expr.scale(&-Rational::one()), AtomOp::Lt, -rhs),
            AtomOp::Le | AtomOp::Lt => (expr.clone(), op, rhs.clone()),
            AtomOp::Eq => unreachable!("equalities are split before canonicalization"),
        };
        let lead = expr.leading().expect("nonempty expression").1.clone();
        let inv = lead.recip().expect("leading coefficient is nonzero");
        let scaled_expr = expr.scale(&inv);
        let scaled_rhs = &rhs * &inv;
        if lead.is_positive() {
            ((scaled_expr, op == AtomOp::Lt, scaled_rhs), true)
        } else {
            // Negative scaling reverses the relation; the canonical atom is
            // the complement, referenced negatively.
            ((scaled_expr, op == AtomOp::Le, scaled_rhs), false)
        }
    }

    /// The literal asserting `expr op rhs`, creating the canonical atom's
    /// Boolean variable and simplex slack on first sight.
    pub fn lit_of_atom(&mut self, expr: &LinExpr, op: AtomOp, rhs: &Rational) -> Lit {
        if expr.is_empty() {
            let holds = match op {
                AtomOp::Le => !rhs.is_negative(),
                AtomOp::Lt => rhs.is_positive(),
                AtomOp::Ge => !rhs.is_positive(),
                AtomOp::Gt => rhs.is_negative(),
                AtomOp::Eq => rhs.is_zero(),
            };
            return if holds { self.true_lit } else { !self.true_lit };
        }
        if op == AtomOp::Eq {
            return self.equality_lit(expr, rhs);
        }
        let (key, positive) = Self::canonicalize(expr, op, rhs);
        let var = match self.atom_vars.get(&key) {
            Some(&v) => v,
            None => {
                let v = self.sat.new_var();
                let bridge = self.sat.theory_mut();
                let lra_var = bridge.lra.var_for_expr(&key.0);
                bridge.bindings.insert(
                    v,
                    AtomBinding {
                        lra_var,
                        strict: key.1,
                        rhs: key.2.clone(),
                        vars: key.0.terms().iter().map(|&(tv, _)| tv).collect(),
                    },
                );
                self.atom_vars.insert(key, v);
                v
            }
        };
        Lit::new(var, positive)
    }

    /// The literal asserting `expr = rhs`, defined once per canonical
    /// equality as the conjunction of the two weak inequalities.
    fn equality_lit(&mut self, expr: &LinExpr, rhs: &Rational) -> Lit {
        let lead = expr.leading().expect("nonempty expression").1.clone();
        let inv = lead.recip().expect("leading coefficient is nonzero");
        let key = (expr.scale(&inv), rhs * &inv);
        if let Some(&l) = self.eq_memo.get(&key) {
            return l;
        }
        let le = self.lit_of_atom(&key.0, AtomOp::Le, &key.1);
        let ge = self.lit_of_atom(&key.0, AtomOp::Ge, &key.1);
        let e = Lit::positive(self.sat.new_var());
        self.sat.add_clause(vec![!e, le]);
        self.sat.add_clause(vec![!e, ge]);
        self.sat.add_clause(vec![e, !le, !ge]);
        self.eq_memo.insert(key, e);
        e
    }

    /// The literal equivalent to `term`, introducing Tseitin definitions
    /// for compound subterms (shared across calls).
    pub fn lit_of_term(&mut self, term: &Term) -> Lit {
        match term {
            Term::True => self.true_lit,
            Term::False => !self.true_lit,
            Term::Bool(i) => Lit::positive(self.bool_vars[*i as usize]),
            Term::Atom(a) => self.lit_of_atom(&a.expr, a.op, &a.rhs),
            Term::Not(t) => !self.lit_of_term(t),
            Term::And(ts) => {
                if ts.is_empty() {
                    return self.true_lit;
                }
                if let [t] = ts.as_slice() {
                    return self.lit_of_term(t);
                }
                if let Some(&l) = self.memo.get(term) {
                    return l;
                }
                let lits: Vec<Lit> = ts.iter().map(|t| self.lit_of_term(t)).collect();
                let p = Lit::positive(self.sat.new_var());
                let mut closing = vec![p];
                for &l in &lits {
                    self.sat.add_clause(vec![!p, l]);
                    closing.push(!l);
                }
                self.sat.add_clause(closing);
                self.memo.insert(term.clone(), p);
                p
            }
            Term::Or(ts) => {
                if ts.is_empty() {
                    return !self.true_lit;
                }
                if let [t] = ts.as_slice() {
                    return self.lit_of_term(t);
                }
                if let Some(&l) = self.memo.get(term) {
                    return l;
                }
                let lits: Vec<Lit> = ts.iter().map(|t| self.lit_of_term(t)).collect();
                let p = Lit::positive(self.sat.new_var());
                let mut closing = vec![!p];
                for &l in &lits {
                    self.sat.add_clause(vec![p, !l]);
                    closing.push(l);
                }
                self.sat.add_clause(closing);
                self.memo.insert(term.clone(), p);
                p
            }
        }
    }

    /// Asserts `term` at the top level: conjunctions flatten into separate
    /// assertions and disjunctions become one clause over their members'
    /// literals.
    pub fn assert_term(&mut self, term: &Term) {
        match term {
            Term::True => {}
            Term::False => self.sat.add_clause(Vec::new()),
            Term::And(ts) => {
                for t in ts {
                    self.assert_term(t);
                }
            }
            Term::Or(_) => {
                let mut lits = Vec::new();
                self.collect_or_lits(term, &mut lits);
                self.sat.add_clause(lits);
            }
            _ => {
                let l = self.lit_of_term(term);
                self.sat.add_clause(vec![l]);
            }
        }
    }

    fn collect_or_lits(&mut self, term: &Term, lits: &mut Vec<Lit>) {
        match term {
            Term::Or(ts) => {
                for t in ts {
                    self.collect_or_lits(t, lits);
                }
            }
            _ => lits.push(self.lit_of_term(term)),
        }
    }

    /// Adds a raw clause (encoder output).
    pub fn add_clause_lits(&mut self, lits: Vec<Lit>) {
        self.sat.add_clause(lits);
    }

    pub fn check_sat(&mut self, assumptions: &[Lit], limits: &SolveLimits) -> SolveOutcome {
        self.sat.solve(assumptions, limits)
    }

    pub fn is_unsat(&self) -> bool {
        self.sat.is_unsat()
    }

    /// Minimizes an arithmetic variable over the current (satisfying) state;
    /// call only right after a Sat answer.
    pub fn minimize(&mut self, objective: LraVar) -> MinimizeOutcome {
        self.sat.theory_mut().lra.minimize(objective)
    }

    /// Exact value of an arithmetic variable in the current valuation.
    pub fn value_of(&self, v: LraVar) -> DeltaRational {
        self.sat.theory().lra.value(v).clone()
    }

    /// Truth value of a Boolean symbol in the current assignment.
    pub fn bool_value(&self, sym: u32) -> LBool {
        self.sat.value(self.bool_vars[sym as usize])
    }

    pub fn lit_value(&self, lit: Lit) -> LBool {
        self.sat.value_lit(lit)
    }

    /// A delta small enough to concretize the current valuation.
    pub fn model_delta(&self) -> Rational {
        self.sat.theory().lra.concrete_delta()
    }

    /// Concrete rational value of an arithmetic variable under `delta`.
    pub fn concrete_value(&self, v: LraVar, delta: &Rational) -> Rational {
        self.sat.theory().lra.concrete_value(v, delta)
    }

    /// Backtracks everything, keeping learned clauses and level-0 facts.
    pub fn reset_to_root(&mut self) {
        self.sat.reset_to_root();
    }

    pub fn stats(&self) -> SmtStats {
        let bridge = self.sat.theory();
        SmtStats {
            search: self.sat.stats().clone(),
            theory_checks: bridge.lra.checks(),
            theory_conflicts: bridge.theory_conflicts,
            objective_theory_conflicts: bridge.objective_theory_conflicts,
        }
    }

    pub fn num_sat_vars(&self) -> usize {
        self.sat.num_vars()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::fm::LinearConstraint;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn x(v: LraVar) -> LinExpr {
        LinExpr::var(v)
    }

    fn atom(expr: LinExpr, op: AtomOp, rhs: &str) -> Term {
        Term::atom(expr, op, r(rhs))
    }

    #[test]
    fn boolean_reasoning_without_theory() {
        let mut s = SmtSolver::new(EpPolicy::Fixpoint);
        let a = s.new_bool();
        let b = s.new_bool();
        s.assert_term(&Term::or(vec![Term::Bool(a), Term::Bool(b)]));
        s.assert_term(&Term::not(Term::Bool(a)));
        assert_eq!(s.check_sat(&[], &SolveLimits::none()), SolveOutcome::Sat);
        assert!(s.bool_value(b).is_true());
    }

    #[test]
    fn tseitin_definitions_are_shared() {
        let mut s = SmtSolver::new(EpPolicy::Fixpoint);
        let a = s.new_bool();
        let b = s.new_bool();
        let conj = Term::and(vec![Term::Bool(a), Term::Bool(b)]);
        let l1 = s.lit_of_term(&conj);
        let before = s.num_sat_vars();
        let l2 = s.lit_of_term(&conj);
        assert_eq!(l1, l2);
        assert_eq!(s.num_sat_vars(), before);
    }

    #[test]
    fn canonicalization_merges_equivalent_atoms() {
        let mut s = SmtSolver::new(EpPolicy::Fixpoint);
        let v = s.new_real();
        // 2x <= 4 and x <= 2 are the same atom.
        let l1 = s.lit_of_atom(&LinExpr::new(vec![(v, r("2"))]), AtomOp::Le, &r("4"));
        let l2 = s.lit_of_atom(&x(v), AtomOp::Le, &r("2"));
        assert_eq!(l1, l2);
        // x >= 2 is the negation of x < 2.
        let ge = s.lit_of_atom(&x(v), AtomOp::Ge, &r("2"));
        let lt = s.lit_of_atom(&x(v), AtomOp::Lt, &r("2"));
        assert_eq!(ge, !lt);
        // -x <= -2 is x >= 2 again.
        let neg = s.lit_of_atom(&LinExpr::new(vec![(v, r("-1"))]), AtomOp::Le, &r("-2"));
        assert_eq!(neg, ge);
    }

    #[test]
    fn cut_and_threshold_atoms_share_a_variable() {
        // The optimization cut not(3 <= cost) and an encoding threshold
        // (3 <= cost) must hit the same Boolean variable for propagation to
        // connect them.
        let mut s = SmtSolver::new(EpPolicy::Fixpoint);
        let cost = s.new_real();
        let threshold =
            s.lit_of_atom(&LinExpr::new(vec![(cost, r("-1"))]), AtomOp::Le, &r("-3"));
        let cut = s.lit_of_atom(&x(cost), AtomOp::Lt, &r("3"));
        assert_eq!(cut, !threshold);
    }

    #[test]
    fn simple_theory_conflict_is_unsat() {
        let mut s = SmtSolver::new(EpPolicy::Fixpoint);
        let v = s.new_real();
        s.assert_term(&atom(x(v), AtomOp::Le, "1"));
        s.assert_term(&atom(x(v), AtomOp::Ge, "2"));
        assert!(matches!(
            s.check_sat(&[], &SolveLimits::none()),
            SolveOutcome::Unsat { .. }
        ));
    }

    #[test]
    fn disjunctive_theory_reasoning_finds_the_feasible_branch() {
        let mut s = SmtSolver::new(EpPolicy::Fixpoint);
        let v = s.new_real();
        s.assert_term(&Term::or(vec![
            atom(x(v), AtomOp::Lt, "0"),
            atom(x(v), AtomOp::Gt, "5"),
        ]));
        s.assert_term(&atom(x(v), AtomOp::Ge, "0"));
        s.assert_term(&atom(x(v), AtomOp::Le, "6"));
        assert_eq!(s.check_sat(&[], &SolveLimits::none()), SolveOutcome::Sat);
        let delta = s.model_delta();
        let val = s.concrete_value(v, &delta);
        assert!(val > r("5") && val <= r("6"), "got {val}");
    }

    #[test]
    fn equalities_split_and_solve() {
        let mut s = SmtSolver::new(EpPolicy::Fixpoint);
        let v = s.new_real();
        s.assert_term(&atom(x(v), AtomOp::Eq, "3"));
        assert_eq!(s.check_sat(&[], &SolveLimits::none()), SolveOutcome::Sat);
        let delta = s.model_delta();
        assert_eq!(s.concrete_value(v, &delta), r("3"));

        let mut s2 = SmtSolver::new(EpPolicy::Fixpoint);
        let w = s2.new_real();
        s2.assert_term(&atom(x(w), AtomOp::Eq, "3"));
        s2.assert_term(&atom(x(w), AtomOp::Eq, "4"));
        assert!(matches!(
            s2.check_sat(&[], &SolveLimits::none()),
            SolveOutcome::Unsat { .. }
        ));
    }

    #[test]
    fn negated_equality_picks_a_strictly_different_value() {
        let mut s = SmtSolver::new(EpPolicy::Fixpoint);
        let v = s.new_real();
        s.assert_term(&Term::not(atom(x(v), AtomOp::Eq, "3")));
        s.assert_term(&atom(x(v), AtomOp::Ge, "29/10"));
        s.assert_term(&atom(x(v), AtomOp::Le, "31/10"));
        assert_eq!(s.check_sat(&[], &SolveLimits::none()), SolveOutcome::Sat);
        let delta = s.model_delta();
        let val = s.concrete_value(v, &delta);
        assert!(val != r("3") && val >= r("29/10") && val <= r("31/10"), "got {val}");
    }

    #[test]
    fn assumption_core_spans_theory_reasoning() {
        let mut s = SmtSolver::new(EpPolicy::Fixpoint);
        let v = s.new_real();
        let le1 = s.lit_of_atom(&x(v), AtomOp::Le, &r("1"));
        let ge2 = s.lit_of_atom(&x(v), AtomOp::Ge, &r("2"));
        let free = Lit::positive(s.new_sat_var());
        let SolveOutcome::Unsat { core } =
            s.check_sat(&[free, le1, ge2], &SolveLimits::none())
        else {
            panic!("expected unsat");
        };
        assert!(core.contains(&le1) && core.contains(&ge2));
        assert!(!core.contains(&free));
        // Still solvable without the clashing assumptions.
        assert_eq!(s.check_sat(&[le1], &SolveLimits::none()), SolveOutcome::Sat);
    }

    #[test]
    fn objective_conflict_counter_tracks_registered_vars() {
        let mut s = SmtSolver::new(EpPolicy::Fixpoint);
        let cost = s.new_real();
        let unrelated = s.new_real();
        s.set_objective_vars([], [cost]);
        // Conflict purely among cost thresholds.
        s.assert_term(&atom(x(cost), AtomOp::Ge, "5"));
        s.assert_term(&atom(x(cost), AtomOp::Le, "4"));
        // Irrelevant satisfiable constraint.
        s.assert_term(&atom(x(unrelated), AtomOp::Ge, "0"));
        assert!(matches!(
            s.check_sat(&[], &SolveLimits::none()),
            SolveOutcome::Unsat { .. }
        ));
        let stats = s.stats();
        assert!(stats.theory_conflicts >= 1);
        assert_eq!(stats.objective_theory_conflicts, stats.theory_conflicts);

        // The same conflict without registration counts as unrestricted.
        let mut s2 = SmtSolver::new(EpPolicy::Fixpoint);
        let cost2 = s2.new_real();
        s2.assert_term(&atom(x(cost2), AtomOp::Ge, "5"));
        s2.assert_term(&atom(x(cost2), AtomOp::Le, "4"));
        assert!(matches!(
            s2.check_sat(&[], &SolveLimits::none()),
            SolveOutcome::Unsat { .. }
        ));
        assert_eq!(s2.stats().objective_theory_conflicts, 0);
    }

    /// Splittable description of a random instance, realized both as terms
    /// for the solver and as an oracle instance.
    type AtomSpec = (Vec<(usize, i64)>, AtomOp, i64);

    struct RandomInstance {
        num_bools: usize,
        num_reals: usize,
        atoms: Vec<AtomSpec>,
        clauses: Vec<Vec<(bool, usize)>>,
    }

    impl RandomInstance {
        fn generate(next: &mut impl FnMut() -> u32) -> RandomInstance {
            let num_bools = 1 + (next() % 3) as usize;
            let num_reals = 1 + (next() % 3) as usize;
            let num_atoms = 1 + (next() % 4) as usize;
            let mut atoms = Vec::new();
            for _ in 0..num_atoms {
                let nterms = 1 + (next() % 2) as usize;
                let mut terms = Vec::new();
                for _ in 0..nterms {
                    terms.push((
                        (next() % num_reals as u32) as usize,
                        [1i64, -1, 2][(next() % 3) as usize],
                    ));
                }
                let op = [AtomOp::Le, AtomOp::Lt, AtomOp::Ge, AtomOp::Gt, AtomOp::Eq]
                    [(next() % 5) as usize];
                atoms.push((terms, op, (next() % 7) as i64 - 3));
            }
            let num_clauses = 2 + (next() % 5) as usize;
            let literal_pool = num_bools + atoms.len();
            let mut clauses = Vec::new();
            for _ in 0..num_clauses {
                let len = 1 + (next() % 3) as usize;
                let mut clause = Vec::new();
                for _ in 0..len {
                    clause.push((next().is_multiple_of(2), (next() % literal_pool as u32) as usize));
                }
                clauses.push(clause);
            }
            RandomInstance { num_bools, num_reals, atoms, clauses }
        }

        fn atom_term(&self, idx: usize, vars: &[LraVar]) -> Term {
            let (terms, op, rhs) = &self.atoms[idx];
            Term::atom(
                LinExpr::new(
                    terms.iter().map(|&(v, c)| (vars[v], Rational::from_int(c))).collect(),
                ),
                *op,
                Rational::from_int(*rhs),
            )
        }

        fn literal_term(&self, positive: bool, idx: usize, vars: &[LraVar]) -> Term {
            let base = if idx < self.num_bools {
                Term::Bool(idx as u32)
            } else {
                self.atom_term(idx - self.num_bools, vars)
            };
            if positive {
                base
            } else {
                Term::not(base)
            }
        }

        fn assert_into(&self, s: &mut SmtSolver) -> Vec<LraVar> {
            for _ in 0..self.num_bools {
                s.new_bool();
            }
            let vars: Vec<LraVar> = (0..self.num_reals).map(|_| s.new_real()).collect();
            for clause in &self.clauses {
                let members: Vec<Term> = clause
                    .iter()
                    .map(|&(pos, idx)| self.literal_term(pos, idx, &vars))
                    .collect();
                s.assert_term(&Term::or(members));
            }
            vars
        }

        fn oracle(&self) -> crate::oracle::brute::OracleInstance {
            use crate::oracle::brute::{OracleFormula as F, OracleInstance};
            // Equality atoms expand to a conjunction of two constraints.
            let mut constraints = Vec::new();
            let mut atom_formula = Vec::new();
            for (terms, op, rhs) in &self.atoms {
                let coeffs: Vec<(usize, Rational)> =
                    terms.iter().map(|&(v, c)| (v, Rational::from_int(c))).collect();
                let rhs = Rational::from_int(*rhs);
                let mut le = |coeffs: Vec<(usize, Rational)>, strict: bool, rhs: Rational| {
                    constraints.push(LinearConstraint::new(coeffs, strict, rhs));
                    F::Atom(constraints.len() - 1)
                };
                let neg = |coeffs: &[(usize, Rational)]| {
                    coeffs.iter().map(|(v, c)| (*v, -c)).collect::<Vec<_>>()
                };
                let f = match op {
                    AtomOp::Le => le(coeffs, false, rhs),
                    AtomOp::Lt => le(coeffs, true, rhs),
                    AtomOp::Ge => le(neg(&coeffs), false, -&rhs),
                    AtomOp::Gt => le(neg(&coeffs), true, -&rhs),
                    AtomOp::Eq => {
                        let a = le(coeffs.clone(), false, rhs.clone());
                        let b = le(neg(&coeffs), false, -&rhs);
                        F::And(vec![a, b])
                    }
                };
                atom_formula.push(f);
            }
            let hard: Vec<F> = self
                .clauses
                .iter()
                .map(|clause| {
                    F::Or(clause
                        .iter()
                        .map(|&(pos, idx)| {
                            let base = if idx < self.num_bools {
                                F::Bool(idx)
                            } else {
                                atom_formula[idx - self.num_bools].clone()
                            };
                            if pos {
                                base
                            } else {
                                F::Not(Box::new(base))
                            }
                        })
                        .collect())
                })
                .collect();
            OracleInstance {
                num_bools: self.num_bools,
                atoms: constraints,
                hard,
                objectives: Vec::new(),
            }
        }

        fn eval_term(&self, term: &Term, s: &SmtSolver, reals: &[Rational]) -> bool {
            match term {
                Term::True => true,
                Term::False => false,
                Term::Bool(i) => s.bool_value(*i).is_true(),
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
                Term::Not(t) => !self.eval_term(t, s, reals),
                Term::And(ts) => ts.iter().all(|t| self.eval_term(t, s, reals)),
                Term::Or(ts) => ts.iter().any(|t| self.eval_term(t, s, reals)),
            }
        }
    }

    fn run_random_agreement(ep: EpPolicy, seed: u64, rounds: usize) {
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as u32
        };
        for round in 0..rounds {
            let inst = RandomInstance::generate(&mut next);
            let mut s = SmtSolver::new(ep);
            let vars = inst.assert_into(&mut s);
            let got = s.check_sat(&[], &SolveLimits::none());
            let want = inst.oracle().is_satisfiable();
            match got {
                SolveOutcome::Sat => {
                    assert!(want, "round {round}: solver sat, oracle unsat");
                    // The model must actually satisfy every clause.
                    let delta = s.model_delta();
                    let reals: Vec<Rational> = (0..s.sat.theory().lra.num_vars())
                        .map(|i| s.concrete_value(LraVar(i), &delta))
                        .collect();
                    for clause in &inst.clauses {
                        let ok = clause.iter().any(|&(pos, idx)| {
                            let t = inst.literal_term(pos, idx, &vars);
                            inst.eval_term(&t, &s, &reals)
                        });
                        assert!(ok, "round {round}: model violates a clause");
                    }
                }
                SolveOutcome::Unsat { .. } => {
                    assert!(!want, "round {round}: solver unsat, oracle sat");
                }
                SolveOutcome::Aborted => panic!("round {round}: aborted without limits"),
            }
        }
    }

    #[test]
    fn random_instances_agree_with_oracle_fixpoint_ep() {
        run_random_agreement(EpPolicy::Fixpoint, 0x2545f4914f6cdd1d, 150);
    }

    #[test]
    fn random_instances_agree_with_oracle_decision_ep() {
        run_random_agreement(EpPolicy::Decision, 0x9e3779b97f4a7c15, 150);
    }

    #[test]
    fn random_instances_agree_with_oracle_ep_off() {
        run_random_agreement(EpPolicy::Off, 0xd1342543de82ef95, 150);
    }
}
