//! CDCL SAT solver with a pluggable theory client.
//!
//! ## Algorithm overview
//!
//! The solver is a conventional conflict-driven clause learner: two-watched
//! literal propagation, first-UIP conflict analysis with backjumping, VSIDS
//! variable activities with deterministic tie-breaking (lowest variable index
//! wins), Luby-sequence restarts, and activity-based deletion of learned
//! clauses.  Decisions always assign false first.
//!
//! Incremental use follows the MiniSat assumption interface: `solve` takes a
//! list of assumption literals that are forced before any free decision, and
//! an unsatisfiable answer under assumptions comes with an unsat core, the
//! subset of assumptions that participated in the final conflict.
//!
//! A [`TheoryClient`] observes the growing trail and may report conflict
//! clauses or lemmas at propagation fixpoints, which is how the DPLL(T)
//! kernel in [`crate::smt`] plugs in arithmetic reasoning.  Theory conflict
//! clauses must be valid in the theory, so they are learned permanently.
//! Pure Boolean solving uses [`NoTheory`].

pub mod dimacs;

use std::time::Instant;

use crate::core::{Clause, LBool, Lit, NormalizedClause, Var};

/// A CNF formula as a plain clause list, used by the DIMACS pipeline and the
/// standalone propagation checker.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(num_vars: usize) -> Self {
        CnfFormula { num_vars, clauses: Vec::new() }
    }

    /// Adds a clause after normalization; tautologies are dropped.
    pub fn add(&mut self, lits: Vec<Lit>) {
        match Clause::normalize(lits) {
            NormalizedClause::Clause(c) => {
                for lit in c.iter() {
                    self.num_vars = self.num_vars.max(lit.var().index() + 1);
                }
                self.clauses.push(c);
            }
            NormalizedClause::Tautology => {}
        }
    }
}

/// Unit propagation to fixpoint by naive clause scanning.
///
/// This is a reference implementation kept deliberately independent of the
/// watched-literal machinery in [`Solver`]; the propagation-strength test
/// suites rely on it.  Returns `None` if propagation derives a conflict,
/// otherwise the derived assignment.
pub fn bcp_closure(formula: &CnfFormula, assumptions: &[Lit]) -> Option<Vec<LBool>> {
    let mut assign = vec![LBool::Undef; formula.num_vars];
    for &lit in assumptions {
        let v = lit.var().index();
        let value = LBool::from_bool(lit.is_positive());
        if assign[v] == !value {
            return None;
        }
        assign[v] = value;
    }
    loop {
        let mut changed = false;
        for clause in &formula.clauses {
            let mut unassigned = None;
            let mut n_unassigned = 0;
            let mut satisfied = false;
            for &lit in clause.iter() {
                match lit.apply(assign[lit.var().index()]) {
                    LBool::True => {
                        satisfied = true;
                        break;
                    }
                    LBool::Undef => {
                        n_unassigned += 1;
                        unassigned = Some(lit);
                    }
                    LBool::False => {}
                }
            }
            if satisfied {
                continue;
            }
            match n_unassigned {
                0 => return None,
                1 => {
                    let lit = unassigned.unwrap();
                    assign[lit.var().index()] = LBool::from_bool(lit.is_positive());
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            return Some(assign);
        }
    }
}

/// When the solver hands the trail to the theory.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TheoryCheck {
    /// A propagation fixpoint was reached; `after_decision` is true when the
    /// latest trail growth started from a decision rather than a backjump.
    Fixpoint { after_decision: bool },
    /// Every variable is assigned; the theory must answer definitively.
    Final,
}

/// Theory verdict for a batch of trail literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TheoryResult {
    Ok,
    /// Clauses implied by the theory; each must contain at most one literal
    /// not currently false, and single-literal lemmas may only be produced
    /// at decision level 0.
    Lemmas(Vec<Vec<Lit>>),
    /// A theory-valid clause falsified by the current assignment.
    Conflict(Vec<Lit>),
}

/// Observer coupled into the search loop.
///
/// The solver guarantees that `process` sees the trail only grow between
/// calls, except that `backtrack_trail` announces truncations.  A client
/// tracks its own cursor into the trail.
pub trait TheoryClient {
    fn process(&mut self, trail: &[Lit], check: TheoryCheck) -> TheoryResult;
    fn backtrack_trail(&mut self, new_len: usize);
}

/// Trivial client for pure Boolean solving.
#[derive(Default)]
pub struct NoTheory;

impl TheoryClient for NoTheory {
    fn process(&mut self, _trail: &[Lit], _check: TheoryCheck) -> TheoryResult {
        TheoryResult::Ok
    }
    fn backtrack_trail(&mut self, _new_len: usize) {}
}

/// Search counters, cumulative over the solver's lifetime.
#[derive(Clone, Debug, Default)]
pub struct SearchStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub restarts: u64,
    pub learned: u64,
    pub deleted: u64,
}

/// Resource limits for one `solve` call.
#[derive(Clone, Debug, Default)]
pub struct SolveLimits {
    pub deadline: Option<Instant>,
    pub max_conflicts: Option<u64>,
}

impl SolveLimits {
    pub fn none() -> Self {
        SolveLimits::default()
    }
}

/// Outcome of a `solve` call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Sat,
    /// Unsatisfiable; `core` is the subset of the assumptions whose
    /// conjunction the solver refuted (empty when the clause set itself is
    /// unsatisfiable).
    Unsat { core: Vec<Lit> },
    /// A limit from [`SolveLimits`] was hit first.
    Aborted,
}

/// Knobs that deviate from hard-wired defaults only in tests.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Apply local learned-clause minimization during conflict analysis.
    pub minimize_learned: bool,
    /// Conflicts before the first restart; later restarts follow the Luby
    /// sequence scaled by this base.
    pub restart_base: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { minimize_learned: false, restart_base: 64 }
    }
}

type ClauseRef = u32;

struct ClauseSlot {
    lits: Vec<Lit>,
    learned: bool,
    activity: f64,
    deleted: bool,
}

#[derive(Clone, Copy)]
struct Watcher {
    cref: ClauseRef,
    blocker: Lit,
}

const VAR_ACTIVITY_DECAY: f64 = 0.95;
const CLAUSE_ACTIVITY_DECAY: f64 = 0.999;
const ACTIVITY_RESCALE: f64 = 1e100;

/// CDCL solver over a theory client `T`.
///
/// `watches[l.index()]` lists the clauses in which literal `l` is one of the
/// two watched literals; the list is visited when `l` becomes false.
pub struct Solver<T: TheoryClient> {
    clauses: Vec<ClauseSlot>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<LBool>,
    levels: Vec<u32>,
    reasons: Vec<Option<ClauseRef>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    clause_inc: f64,
    seen: Vec<bool>,
    unsat: bool,
    stats: SearchStats,
    config: SolverConfig,
    theory: T,
}

impl Solver<NoTheory> {
    pub fn new() -> Self {
        Solver::with_theory(NoTheory)
    }
}

impl Default for Solver<NoTheory> {
    fn default() -> Self {
        Solver::new()
    }
}

impl<T: TheoryClient> Solver<T> {
    pub fn with_theory(theory: T) -> Self {
        Solver {
            clauses: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            levels: Vec::new(),
            reasons: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            clause_inc: 1.0,
            seen: Vec::new(),
            unsat: false,
            stats: SearchStats::default(),
            config: SolverConfig::default(),
            theory,
        }
    }

    pub fn set_config(&mut self, config: SolverConfig) {
        self.config = config;
    }

    pub fn theory(&self) -> &T {
        &self.theory
    }

    pub fn theory_mut(&mut self) -> &mut T {
        &mut self.theory
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn new_var(&mut self) -> Var {
        let v = Var(self.assigns.len() as u32);
        self.assigns.push(LBool::Undef);
        self.levels.push(0);
        self.reasons.push(None);
        self.activity.push(0.0);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        v
    }

    pub fn value(&self, var: Var) -> LBool {
        self.assigns[var.index()]
    }

    pub fn value_lit(&self, lit: Lit) -> LBool {
        lit.apply(self.assigns[lit.var().index()])
    }

    pub fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn level(&self, var: Var) -> u32 {
        self.levels[var.index()]
    }

    /// True once the clause set is unsatisfiable independent of assumptions.
    pub fn is_unsat(&self) -> bool {
        self.unsat
    }

    /// Adds a problem clause.  Must be called at decision level 0; literals
    /// already false at level 0 are removed and satisfied clauses dropped.
    pub fn add_clause(&mut self, lits: Vec<Lit>) {
        assert_eq!(self.decision_level(), 0, "clauses are added at level 0");
        if self.unsat {
            return;
        }
        let clause = match Clause::normalize(lits) {
            NormalizedClause::Clause(c) => c,
            NormalizedClause::Tautology => return,
        };
        let mut reduced = Vec::with_capacity(clause.len());
        for &lit in clause.iter() {
            match self.value_lit(lit) {
                LBool::True => return,
                LBool::False => {}
                LBool::Undef => reduced.push(lit),
            }
        }
        match reduced.len() {
            0 => self.unsat = true,
            1 => {
                self.enqueue(reduced[0], None);
                if self.propagate().is_some() {
                    self.unsat = true;
                }
            }
            _ => {
                self.attach_clause(reduced, false);
            }
        }
    }

    fn attach_clause(&mut self, lits: Vec<Lit>, learned: bool) -> ClauseRef {
        debug_assert!(lits.len() >= 2);
        let cref = self.clauses.len() as ClauseRef;
        self.watches[lits[0].index()].push(Watcher { cref, blocker: lits[1] });
        self.watches[lits[1].index()].push(Watcher { cref, blocker: lits[0] });
        self.clauses.push(ClauseSlot { lits, learned, activity: 0.0, deleted: false });
        if learned {
            self.stats.learned += 1;
        }
        cref
    }

    fn enqueue(&mut self, lit: Lit, reason: Option<ClauseRef>) {
        debug_assert!(self.value_lit(lit).is_undef());
        let v = lit.var().index();
        self.assigns[v] = LBool::from_bool(lit.is_positive());
        self.levels[v] = self.decision_level() as u32;
        self.reasons[v] = reason;
        self.trail.push(lit);
    }

    /// Two-watched-literal propagation to fixpoint.  Returns a conflicting
    /// clause reference if one is found.
    fn propagate(&mut self) -> Option<ClauseRef> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let watch_idx = false_lit.index();
            let mut watchers = std::mem::take(&mut self.watches[watch_idx]);
            let mut i = 0;
            let mut j = 0;
            let mut confl = None;
            while i < watchers.len() {
                let w = watchers[i];
                i += 1;
                if self.value_lit(w.blocker).is_true() {
                    watchers[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref as usize;
                if self.clauses[cref].deleted {
                    continue;
                }
                if self.clauses[cref].lits[0] == false_lit {
                    self.clauses[cref].lits.swap(0, 1);
                }
                debug_assert_eq!(self.clauses[cref].lits[1], false_lit);
                let first = self.clauses[cref].lits[0];
                if first != w.blocker && self.value_lit(first).is_true() {
                    watchers[j] = Watcher { cref: w.cref, blocker: first };
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..self.clauses[cref].lits.len() {
                    let cand = self.clauses[cref].lits[k];
                    if !self.value_lit(cand).is_false() {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[cand.index()].push(Watcher { cref: w.cref, blocker: first });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                // No replacement watch: clause is unit or conflicting.
                watchers[j] = w;
                j += 1;
                if self.value_lit(first).is_false() {
                    confl = Some(w.cref);
                    self.qhead = self.trail.len();
                    while i < watchers.len() {
                        watchers[j] = watchers[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(w.cref));
                }
            }
            watchers.truncate(j);
            debug_assert!(self.watches[watch_idx].is_empty());
            self.watches[watch_idx] = watchers;
            if confl.is_some() {
                return confl;
            }
        }
        None
    }

    fn new_decision_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    fn cancel_until(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let bound = self.trail_lim[level];
        for idx in (bound..self.trail.len()).rev() {
            let v = self.trail[idx].var().index();
            self.assigns[v] = LBool::Undef;
            self.reasons[v] = None;
        }
        self.trail.truncate(bound);
        self.trail_lim.truncate(level);
        self.qhead = self.qhead.min(bound);
        self.theory.backtrack_trail(bound);
    }

    fn bump_var(&mut self, var: Var) {
        self.activity[var.index()] += self.var_inc;
        if self.activity[var.index()] > ACTIVITY_RESCALE {
            for a in &mut self.activity {
                *a *= 1.0 / ACTIVITY_RESCALE;
            }
            self.var_inc *= 1.0 / ACTIVITY_RESCALE;
        }
    }

    fn bump_clause(&mut self, cref: ClauseRef) {
        let slot = &mut self.clauses[cref as usize];
        if !slot.learned {
            return;
        }
        slot.activity += self.clause_inc;
        if slot.activity > ACTIVITY_RESCALE {
            for s in &mut self.clauses {
                s.activity *= 1.0 / ACTIVITY_RESCALE;
            }
            self.clause_inc *= 1.0 / ACTIVITY_RESCALE;
        }
    }

    fn decay_activities(&mut self) {
        self.var_inc *= 1.0 / VAR_ACTIVITY_DECAY;
        self.clause_inc *= 1.0 / CLAUSE_ACTIVITY_DECAY;
    }

    /// First-UIP conflict analysis.  Returns the learned clause (asserting
    /// literal first, a highest-level literal second) and the backjump level.
    fn analyze(&mut self, confl: ClauseRef) -> (Vec<Lit>, usize) {
        let current = self.decision_level() as u32;
        debug_assert!(current > 0);
        let mut learnt: Vec<Lit> = Vec::new();
        let mut counter = 0usize;
        let mut cref = confl;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        loop {
            self.bump_clause(cref);
            let lits = self.clauses[cref as usize].lits.clone();
            for &q in lits.iter() {
                if Some(q) == p {
                    continue;
                }
                let v = q.var();
                if !self.seen[v.index()] && self.level(v) > 0 {
                    self.seen[v.index()] = true;
                    self.bump_var(v);
                    if self.level(v) >= current {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] {
                    break;
                }
            }
            let lit = self.trail[index];
            self.seen[lit.var().index()] = false;
            counter -= 1;
            if counter == 0 {
                p = Some(lit);
                break;
            }
            cref = self.reasons[lit.var().index()]
                .expect("literal below the first UIP has a reason clause");
            p = Some(lit);
        }
        let asserting = !p.unwrap();
        let kept: Vec<Lit> = if self.config.minimize_learned {
            learnt.iter().copied().filter(|&l| !self.is_redundant(l)).collect()
        } else {
            learnt.clone()
        };
        for &l in &learnt {
            self.seen[l.var().index()] = false;
        }
        let mut clause = Vec::with_capacity(kept.len() + 1);
        clause.push(asserting);
        clause.extend(kept);
        let backjump = if clause.len() == 1 {
            0
        } else {
            // Move the highest-level non-asserting literal to position 1 so
            // it serves as the second watch.
            let mut best = 1;
            for k in 2..clause.len() {
                if self.level(clause[k].var()) > self.level(clause[best].var()) {
                    best = k;
                }
            }
            clause.swap(1, best);
            self.level(clause[1].var()) as usize
        };
        (clause, backjump)
    }

    /// Local redundancy test: a literal is dropped when its reason clause
    /// contains only literals already in the learned clause or at level 0.
    fn is_redundant(&self, lit: Lit) -> bool {
        let Some(cref) = self.reasons[lit.var().index()] else {
            return false;
        };
        self.clauses[cref as usize]
            .lits
            .iter()
            .all(|&q| q == !lit || self.seen[q.var().index()] || self.level(q.var()) == 0)
    }

    /// Builds the unsat core after assumption literal `failed` was found
    /// false, by following reasons back to assumption decisions.
    fn analyze_final(&mut self, failed: Lit, assumptions: &[Lit]) -> Vec<Lit> {
        let mut core = vec![failed];
        if self.decision_level() == 0 {
            return core;
        }
        self.seen[failed.var().index()] = true;
        for idx in (self.trail_lim[0]..self.trail.len()).rev() {
            let lit = self.trail[idx];
            let v = lit.var();
            if !self.seen[v.index()] {
                continue;
            }
            match self.reasons[v.index()] {
                None => {
                    if assumptions.contains(&lit) && lit != failed {
                        core.push(lit);
                    }
                }
                Some(cref) => {
                    for &q in &self.clauses[cref as usize].lits {
                        if self.level(q.var()) > 0 {
                            self.seen[q.var().index()] = true;
                        }
                    }
                }
            }
            self.seen[v.index()] = false;
        }
        self.seen[failed.var().index()] = false;
        core.sort_unstable();
        core.dedup();
        core
    }

    /// Records a learned clause, enqueues its asserting literal, and returns
    /// whether search can continue (false means level-0 unsatisfiability).
    fn learn(&mut self, clause: Vec<Lit>, backjump: usize) -> bool {
        self.stats.conflicts += 1;
        self.cancel_until(backjump);
        match clause.len() {
            0 => {
                self.unsat = true;
                return false;
            }
            1 => {
                debug_assert_eq!(self.decision_level(), 0);
                match self.value_lit(clause[0]) {
                    LBool::False => {
                        self.unsat = true;
                        return false;
                    }
                    LBool::True => {}
                    LBool::Undef => self.enqueue(clause[0], None),
                }
            }
            _ => {
                let cref = self.attach_clause(clause.clone(), true);
                self.bump_clause(cref);
                self.enqueue(clause[0], Some(cref));
            }
        }
        self.decay_activities();
        true
    }

    /// Handles a conflicting clause supplied by the theory.  Returns false on
    /// level-0 unsatisfiability.
    fn handle_theory_conflict(&mut self, mut lits: Vec<Lit>) -> bool {
        debug_assert!(lits.iter().all(|&l| self.value_lit(l).is_false()));
        lits.sort_unstable();
        lits.dedup();
        if lits.is_empty() {
            self.unsat = true;
            return false;
        }
        // The clause is theory-valid, so a single-literal clause is a root
        // fact regardless of where the conflict was found.
        if lits.len() == 1 {
            return self.learn(lits, 0);
        }
        lits.sort_by(|a, b| self.level(b.var()).cmp(&self.level(a.var())).then(a.cmp(b)));
        let max_level = self.level(lits[0].var()) as usize;
        if max_level == 0 {
            self.unsat = true;
            return false;
        }
        self.cancel_until(max_level);
        // With only one literal at the conflict level the clause is already
        // asserting; analysis would resolve nothing.
        if self.level(lits[1].var()) < self.level(lits[0].var()) {
            let backjump = self.level(lits[1].var()) as usize;
            return self.learn(lits, backjump);
        }
        let cref = self.attach_clause(lits, true);
        let (clause, backjump) = self.analyze(cref);
        self.learn(clause, backjump)
    }

    /// Integrates theory lemmas; returns false on level-0 unsatisfiability.
    fn integrate_lemmas(&mut self, lemmas: Vec<Vec<Lit>>) -> bool {
        for lemma in lemmas {
            let false_count =
                lemma.iter().filter(|&&l| self.value_lit(l).is_false()).count();
            if false_count == lemma.len() {
                if !self.handle_theory_conflict(lemma) {
                    return false;
                }
                continue;
            }
            debug_assert_eq!(false_count + 1, lemma.len(), "lemma must be unit or conflicting");
            if lemma.len() == 1 {
                debug_assert_eq!(self.decision_level(), 0);
                if self.value_lit(lemma[0]).is_undef() {
                    self.enqueue(lemma[0], None);
                }
                continue;
            }
            let mut lits = lemma;
            // Watch the non-false literal and the highest-level false one.
            let pos = lits.iter().position(|&l| !self.value_lit(l).is_false()).unwrap();
            lits.swap(0, pos);
            let mut best = 1;
            for k in 2..lits.len() {
                if self.level(lits[k].var()) > self.level(lits[best].var()) {
                    best = k;
                }
            }
            lits.swap(1, best);
            let propagate_now = self.value_lit(lits[0]).is_undef();
            let first = lits[0];
            let cref = self.attach_clause(lits, true);
            if propagate_now {
                self.enqueue(first, Some(cref));
            }
        }
        true
    }

    /// The i-th element (1-based) of the Luby sequence 1 1 2 1 1 2 4 ...
    fn luby(i: u64) -> u64 {
        let mut x = i - 1;
        let mut size = 1u64;
        let mut seq = 0u32;
        while size < x + 1 {
            seq += 1;
            size = 2 * size + 1;
        }
        while size - 1 != x {
            size = (size - 1) >> 1;
            seq -= 1;
            x %= size;
        }
        1u64 << seq
    }

    fn reduce_learned(&mut self) {
        let mut candidates: Vec<(f64, ClauseRef)> = Vec::new();
        for (idx, slot) in self.clauses.iter().enumerate() {
            let cref = idx as ClauseRef;
            if !slot.learned || slot.deleted || slot.lits.len() <= 2 || self.is_locked(cref) {
                continue;
            }
            candidates.push((slot.activity, cref));
        }
        candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let n_delete = candidates.len() / 2;
        for &(_, cref) in candidates.iter().take(n_delete) {
            self.detach_clause(cref);
            self.stats.deleted += 1;
        }
    }

    fn is_locked(&self, cref: ClauseRef) -> bool {
        let lit = self.clauses[cref as usize].lits[0];
        self.reasons[lit.var().index()] == Some(cref) && self.value_lit(lit).is_true()
    }

    fn detach_clause(&mut self, cref: ClauseRef) {
        let slot = &mut self.clauses[cref as usize];
        slot.deleted = true;
        let w0 = slot.lits[0].index();
        let w1 = slot.lits[1].index();
        self.watches[w0].retain(|w| w.cref != cref);
        self.watches[w1].retain(|w| w.cref != cref);
    }

    fn pick_branch_var(&self) -> Option<Var> {
        let mut best: Option<Var> = None;
        let mut best_act = f64::NEG_INFINITY;
        for (idx, &value) in self.assigns.iter().enumerate() {
            if value.is_undef() && self.activity[idx] > best_act {
                best_act = self.activity[idx];
                best = Some(Var(idx as u32));
            }
        }
        best
    }

    /// Solves under the given assumptions.
    pub fn solve(&mut self, assumptions: &[Lit], limits: &SolveLimits) -> SolveOutcome {
        if self.unsat {
            return SolveOutcome::Unsat { core: Vec::new() };
        }
        self.cancel_until(0);
        let budget_start = self.stats.conflicts;
        let mut restart_mark = self.stats.conflicts;
        let mut restart_number = 0u64;
        let mut after_decision = false;
        let mut reduce_threshold = 2048u64;
        loop {
            if let Some(deadline) = limits.deadline {
                if Instant::now() >= deadline {
                    self.cancel_until(0);
                    return SolveOutcome::Aborted;
                }
            }
            if let Some(max) = limits.max_conflicts {
                if self.stats.conflicts - budget_start > max {
                    self.cancel_until(0);
                    return SolveOutcome::Aborted;
                }
            }
            if let Some(confl) = self.propagate() {
                if self.decision_level() == 0 {
                    self.unsat = true;
                    return SolveOutcome::Unsat { core: Vec::new() };
                }
                let (clause, backjump) = self.analyze(confl);
                if !self.learn(clause, backjump) {
                    return SolveOutcome::Unsat { core: Vec::new() };
                }
                after_decision = false;
                continue;
            }
            match self.theory.process(&self.trail, TheoryCheck::Fixpoint { after_decision }) {
                TheoryResult::Ok => {}
                TheoryResult::Lemmas(lemmas) => {
                    if !self.integrate_lemmas(lemmas) {
                        return SolveOutcome::Unsat { core: Vec::new() };
                    }
                    after_decision = false;
                    continue;
                }
                TheoryResult::Conflict(lits) => {
                    if !self.handle_theory_conflict(lits) {
                        return SolveOutcome::Unsat { core: Vec::new() };
                    }
                    after_decision = false;
                    continue;
                }
            }
            after_decision = false;
            if self.stats.conflicts - restart_mark
                >= self.config.restart_base * Self::luby(restart_number + 1)
            {
                restart_number += 1;
                restart_mark = self.stats.conflicts;
                self.stats.restarts += 1;
                self.cancel_until(0);
                continue;
            }
            if self.stats.learned.saturating_sub(self.stats.deleted) >= reduce_threshold {
                reduce_threshold += 512;
                self.reduce_learned();
            }
            // Consume assumptions, one decision level each.
            if self.decision_level() < assumptions.len() {
                let a = assumptions[self.decision_level()];
                match self.value_lit(a) {
                    LBool::True => {
                        self.new_decision_level();
                    }
                    LBool::False => {
                        let core = self.analyze_final(a, assumptions);
                        self.cancel_until(0);
                        return SolveOutcome::Unsat { core };
                    }
                    LBool::Undef => {
                        self.new_decision_level();
                        self.enqueue(a, None);
                        after_decision = true;
                    }
                }
                continue;
            }
            match self.pick_branch_var() {
                Some(v) => {
                    self.stats.decisions += 1;
                    self.new_decision_level();
                    self.enqueue(Lit::negative(v), None);
                    after_decision = true;
                }
                None => {
                    match self.theory.process(&self.trail, TheoryCheck::Final) {
                        TheoryResult::Ok => return SolveOutcome::Sat,
                        TheoryResult::Lemmas(lemmas) => {
                            if !self.integrate_lemmas(lemmas) {
                                return SolveOutcome::Unsat { core: Vec::new() };
                            }
                        }
                        TheoryResult::Conflict(lits) => {
                            if !self.handle_theory_conflict(lits) {
                                return SolveOutcome::Unsat { core: Vec::new() };
                            }
                        }
                    }
                }
            }
        }
    }

    /// The current complete assignment; meaningful right after a Sat answer.
    pub fn model(&self) -> Vec<LBool> {
        self.assigns.clone()
    }

    /// Backtracks everything, keeping learned clauses and level-0 facts.
    pub fn reset_to_root(&mut self) {
        self.cancel_until(0);
    }
}
