//! Incremental linear rational arithmetic solver.
//!
//! ## Algorithm overview
//!
//! This is the simplex-for-DPLL(T) procedure of Dutertre and de Moura: the
//! constraint set is a tableau of definitional rows `basic = sum of
//! coefficients * nonbasic` that is never backtracked, plus per-variable
//! upper and lower bounds that are asserted and retracted as search
//! proceeds.  Strict inequalities are handled by bounds with an
//! infinitesimal component ([`DeltaRational`]).  `check` restores bound
//! satisfaction by Bland-rule pivoting (always the smallest eligible
//! variable index), which guarantees termination; a variable that cannot be
//! repaired yields a conflict explanation assembled from the bound reasons
//! of its row.
//!
//! `minimize` runs bounded-variable primal simplex on a dedicated objective
//! row, again under Bland's rule, and reports the exact infimum as a
//! [`DeltaRational`]: a nonzero infinitesimal component means the infimum is
//! approached but not attained (it is pinned by a strict bound).
//!
//! Bound assertions carry the [`Lit`] that caused them, so explanations are
//! clauses over the Boolean skeleton, ready for the SAT solver to learn.

use std::collections::BTreeMap;
use std::fmt;

use crate::core::{DeltaRational, Lit, Rational};

/// An arithmetic variable, numbered from 0 within the LRA solver.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LraVar(pub u32);

impl LraVar {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for LraVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A linear expression `sum of coeff * var`, kept sorted by variable with no
/// zero coefficients, so equal expressions compare equal.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Debug)]
pub struct LinExpr {
    terms: Vec<(LraVar, Rational)>,
}

impl LinExpr {
    pub fn new(terms: Vec<(LraVar, Rational)>) -> Self {
        let mut expr = LinExpr::default();
        for (v, c) in terms {
            expr.add_term(v, c);
        }
        expr
    }

    pub fn var(v: LraVar) -> Self {
        LinExpr { terms: vec![(v, Rational::one())] }
    }

    pub fn terms(&self) -> &[(LraVar, Rational)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff_of(&self, v: LraVar) -> Option<&Rational> {
        self.terms.binary_search_by_key(&v, |&(tv, _)| tv).ok().map(|i| &self.terms[i].1)
    }

    pub fn add_term(&mut self, v: LraVar, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.binary_search_by_key(&v, |&(tv, _)| tv) {
            Ok(i) => {
                self.terms[i].1 += &c;
                if self.terms[i].1.is_zero() {
                    self.terms.remove(i);
                }
            }
            Err(i) => self.terms.insert(i, (v, c)),
        }
    }

    pub fn add_scaled(&mut self, other: &LinExpr, k: &Rational) {
        for (v, c) in &other.terms {
            self.add_term(*v, c * k);
        }
    }

    pub fn scale(&self, k: &Rational) -> LinExpr {
        if k.is_zero() {
            return LinExpr::default();
        }
        LinExpr { terms: self.terms.iter().map(|(v, c)| (*v, c * k)).collect() }
    }

    /// The term with the smallest variable index.
    pub fn leading(&self) -> Option<&(LraVar, Rational)> {
        self.terms.first()
    }

    pub fn evaluate(&self, value_of: impl Fn(LraVar) -> DeltaRational) -> DeltaRational {
        let mut acc = DeltaRational::zero();
        for (v, c) in &self.terms {
            acc += &value_of(*v).scale(c);
        }
        acc
    }
}

/// Which side of a variable a bound constrains.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BoundKind {
    Lower,
    Upper,
}

#[derive(Clone, Debug)]
struct Bound {
    value: DeltaRational,
    reason: Lit,
}

#[derive(Clone, Debug)]
struct TrailEntry {
    var: LraVar,
    kind: BoundKind,
    previous: Option<Bound>,
}

/// Outcome of minimizing a variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MinimizeOutcome {
    /// The exact infimum of the objective over the current constraints; a
    /// nonzero delta component means no feasible point attains it.
    Bounded(DeltaRational),
    Unbounded,
}

/// Conflict explanation: asserted literals whose bounds are jointly
/// inconsistent.  The negation of this set is a theory-valid clause.
pub type Explanation = Vec<Lit>;

/// The simplex solver.
pub struct LraSolver {
    num_vars: u32,
    /// Rows of the tableau: `var = expr` where `expr` ranges over nonbasic
    /// variables only.
    rows: BTreeMap<LraVar, LinExpr>,
    values: Vec<DeltaRational>,
    lower: Vec<Option<Bound>>,
    upper: Vec<Option<Bound>>,
    trail: Vec<TrailEntry>,
    expr_vars: BTreeMap<LinExpr, LraVar>,
    checks: u64,
}

impl Default for LraSolver {
    fn default() -> Self {
        Self::new()
    }
}

impl LraSolver {
    pub fn new() -> Self {
        LraSolver {
            num_vars: 0,
            rows: BTreeMap::new(),
            values: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            trail: Vec::new(),
            expr_vars: BTreeMap::new(),
            checks: 0,
        }
    }

    pub fn new_var(&mut self) -> LraVar {
        let v = LraVar(self.num_vars);
        self.num_vars += 1;
        self.values.push(DeltaRational::zero());
        self.lower.push(None);
        self.upper.push(None);
        v
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    /// Number of `check` calls so far.
    pub fn checks(&self) -> u64 {
        self.checks
    }

    /// Returns a variable constrained to equal `expr`, creating a
    /// definitional row (and fresh variable) on first use.  A single-term
    /// expression with coefficient 1 is returned as is.
    pub fn var_for_expr(&mut self, expr: &LinExpr) -> LraVar {
        assert!(!expr.is_empty(), "cannot define a variable for an empty expression");
        if let [(v, c)] = expr.terms() {
            if *c == Rational::one() {
                return *v;
            }
        }
        if let Some(&v) = self.expr_vars.get(expr) {
            return v;
        }
        let v = self.new_var();
        // Rows may only mention nonbasic variables, so substitute any basic
        // ones away before installing the definition.
        let mut row = LinExpr::default();
        for (tv, c) in expr.terms() {
            match self.rows.get(tv) {
                Some(def) => row.add_scaled(&def.clone(), c),
                None => row.add_term(*tv, c.clone()),
            }
        }
        self.values[v.index()] = row.evaluate(|tv| self.values[tv.index()].clone());
        self.rows.insert(v, row);
        self.expr_vars.insert(expr.clone(), v);
        v
    }

    pub fn value(&self, v: LraVar) -> &DeltaRational {
        &self.values[v.index()]
    }

    pub fn lower_bound(&self, v: LraVar) -> Option<(&DeltaRational, Lit)> {
        self.lower[v.index()].as_ref().map(|b| (&b.value, b.reason))
    }

    pub fn upper_bound(&self, v: LraVar) -> Option<(&DeltaRational, Lit)> {
        self.upper[v.index()].as_ref().map(|b| (&b.value, b.reason))
    }

    /// Position for later [`Self::backtrack_to`].
    pub fn mark(&self) -> usize {
        self.trail.len()
    }

    /// Retracts every bound asserted after `mark`.  Tableau rows and pivots
    /// are kept; they are definitional and do not affect the solution set.
    pub fn backtrack_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let entry = self.trail.pop().unwrap();
            let slot = match entry.kind {
                BoundKind::Lower => &mut self.lower[entry.var.index()],
                BoundKind::Upper => &mut self.upper[entry.var.index()],
            };
            *slot = entry.previous;
        }
    }

    /// Asserts `var >= value` or `var <= value` depending on `kind`, with
    /// `reason` recording the literal responsible.  Detects an immediate
    /// clash with the opposite bound; deeper inconsistencies surface at the
    /// next [`Self::check`].
    pub fn assert_bound(
        &mut self,
        var: LraVar,
        kind: BoundKind,
        value: DeltaRational,
        reason: Lit,
    ) -> Result<(), Explanation> {
        match kind {
            BoundKind::Upper => {
                if let Some(lb) = &self.lower[var.index()] {
                    if value < lb.value {
                        return Err(vec![lb.reason, reason]);
                    }
                }
                let current = &self.upper[var.index()];
                if current.as_ref().is_none_or(|ub| value < ub.value) {
                    self.trail.push(TrailEntry {
                        var,
                        kind,
                        previous: self.upper[var.index()].take(),
                    });
                    self.upper[var.index()] = Some(Bound { value: value.clone(), reason });
                    if !self.rows.contains_key(&var) && self.values[var.index()] > value {
                        self.shift_nonbasic(var, value);
                    }
                }
            }
            BoundKind::Lower => {
                if let Some(ub) = &self.upper[var.index()] {
                    if value > ub.value {
                        return Err(vec![ub.reason, reason]);
                    }
                }
                let current = &self.lower[var.index()];
                if current.as_ref().is_none_or(|lb| value > lb.value) {
                    self.trail.push(TrailEntry {
                        var,
                        kind,
                        previous: self.lower[var.index()].take(),
                    });
                    self.lower[var.index()] = Some(Bound { value: value.clone(), reason });
                    if !self.rows.contains_key(&var) && self.values[var.index()] < value {
                        self.shift_nonbasic(var, value);
                    }
                }
            }
        }
        Ok(())
    }

    /// Moves nonbasic `var` to `target`, updating every dependent basic.
    fn shift_nonbasic(&mut self, var: LraVar, target: DeltaRational) {
        let delta = &target - &self.values[var.index()];
        for (basic, row) in &self.rows {
            if let Some(c) = row.coeff_of(var) {
                let shift = delta.scale(c);
                let idx = basic.index();
                // Borrow juggling: values and rows are disjoint fields.
                let updated = &self.values[idx] + &shift;
                self.values[idx] = updated;
            }
        }
        self.values[var.index()] = target;
    }

    fn violated_basic(&self) -> Option<(LraVar, BoundKind)> {
        for &v in self.rows.keys() {
            if let Some(lb) = &self.lower[v.index()] {
                if self.values[v.index()] < lb.value {
                    return Some((v, BoundKind::Lower));
                }
            }
            if let Some(ub) = &self.upper[v.index()] {
                if self.values[v.index()] > ub.value {
                    return Some((v, BoundKind::Upper));
                }
            }
        }
        None
    }

    fn can_increase(&self, v: LraVar) -> bool {
        self.upper[v.index()].as_ref().is_none_or(|b| self.values[v.index()] < b.value)
    }

    fn can_decrease(&self, v: LraVar) -> bool {
        self.lower[v.index()].as_ref().is_none_or(|b| self.values[v.index()] > b.value)
    }

    /// Swaps basic `leaving` with nonbasic `entering` in the tableau.
    fn pivot(&mut self, leaving: LraVar, entering: LraVar) {
        let row = self.rows.remove(&leaving).expect("leaving variable is basic");
        let a = row.coeff_of(entering).expect("entering variable occurs in the row").clone();
        // leaving = ... + a * entering + ...  =>
        // entering = (leaving - rest) / a
        let inv = a.recip().expect("pivot coefficient is nonzero");
        let mut entering_row = LinExpr::default();
        entering_row.add_term(leaving, inv.clone());
        for (v, c) in row.terms() {
            if *v != entering {
                entering_row.add_term(*v, c * &(-&inv));
            }
        }
        let dependents: Vec<LraVar> = self
            .rows
            .iter()
            .filter(|(_, r)| r.coeff_of(entering).is_some())
            .map(|(&v, _)| v)
            .collect();
        for v in dependents {
            let mut r = self.rows.remove(&v).unwrap();
            let b = r.coeff_of(entering).unwrap().clone();
            r.add_term(entering, -&b);
            r.add_scaled(&entering_row, &b);
            self.rows.insert(v, r);
        }
        self.rows.insert(entering, entering_row);
    }

    /// Sets violated basic `leaving` to `target` by moving `entering`, then
    /// pivots them.
    fn pivot_and_update(&mut self, leaving: LraVar, entering: LraVar, target: DeltaRational) {
        let row = &self.rows[&leaving];
        let a = row.coeff_of(entering).unwrap().clone();
        let theta = (&target - &self.values[leaving.index()])
            .scale(&a.recip().expect("pivot coefficient is nonzero"));
        let new_entering = &self.values[entering.index()] + &theta;
        self.shift_nonbasic(entering, new_entering);
        debug_assert_eq!(self.values[leaving.index()], target);
        self.pivot(leaving, entering);
    }

    fn explain_blocked_row(&self, basic: LraVar, kind: BoundKind) -> Explanation {
        let row = &self.rows[&basic];
        let mut expl = Vec::with_capacity(row.len() + 1);
        let own = match kind {
            BoundKind::Lower => self.lower[basic.index()].as_ref(),
            BoundKind::Upper => self.upper[basic.index()].as_ref(),
        };
        expl.push(own.expect("violated bound exists").reason);
        for (v, c) in row.terms() {
            // To raise the basic above its lower bound, positive-coefficient
            // variables would have to increase and negative ones decrease;
            // each is pinned by the bound recorded here.  Dually for upper.
            let blocking = match (kind, c.is_positive()) {
                (BoundKind::Lower, true) | (BoundKind::Upper, false) => {
                    self.upper[v.index()].as_ref()
                }
                _ => self.lower[v.index()].as_ref(),
            };
            expl.push(blocking.expect("blocking bound exists").reason);
        }
        expl.sort_unstable();
        expl.dedup();
        expl
    }

    /// Restores every variable into its bounds, or explains why that is
    /// impossible.
    pub fn check(&mut self) -> Result<(), Explanation> {
        self.checks += 1;
        loop {
            let Some((basic, kind)) = self.violated_basic() else {
                return Ok(());
            };
            let row = self.rows[&basic].clone();
            let entering = row.terms().iter().find(|(v, c)| match kind {
                BoundKind::Lower => {
                    // The basic must increase.
                    if c.is_positive() {
                        self.can_increase(*v)
                    } else {
                        self.can_decrease(*v)
                    }
                }
                BoundKind::Upper => {
                    if c.is_positive() {
                        self.can_decrease(*v)
                    } else {
                        self.can_increase(*v)
                    }
                }
            });
            match entering {
                None => return Err(self.explain_blocked_row(basic, kind)),
                Some((v, _)) => {
                    let target = match kind {
                        BoundKind::Lower => self.lower[basic.index()].as_ref().unwrap(),
                        BoundKind::Upper => self.upper[basic.index()].as_ref().unwrap(),
                    }
                    .value
                    .clone();
                    self.pivot_and_update(basic, *v, target);
                }
            }
        }
    }

    /// Largest step the nonbasic `xj` can take in the given direction before
    /// it or a dependent basic variable hits a bound, as `(step, blocker)`.
    /// `None` means the step is unlimited.
    fn ratio_limit(&self, xj: LraVar, increasing: bool) -> Option<(DeltaRational, LraVar)> {
        let mut limit: Option<(DeltaRational, LraVar)> = None;
        let consider = |theta: DeltaRational, var: LraVar, limit: &mut Option<(DeltaRational, LraVar)>| {
            debug_assert!(theta >= DeltaRational::zero());
            match limit {
                Some((best, bv)) => {
                    if theta < *best || (theta == *best && var < *bv) {
                        *limit = Some((theta, var));
                    }
                }
                None => *limit = Some((theta, var)),
            }
        };
        if increasing {
            if let Some(ub) = &self.upper[xj.index()] {
                consider(&ub.value - &self.values[xj.index()], xj, &mut limit);
            }
        } else if let Some(lb) = &self.lower[xj.index()] {
            consider(&self.values[xj.index()] - &lb.value, xj, &mut limit);
        }
        for (&xk, rk) in &self.rows {
            let Some(b) = rk.coeff_of(xj) else { continue };
            // xk changes by b * (signed step).
            let grows = b.is_positive() == increasing;
            if grows {
                if let Some(ub) = &self.upper[xk.index()] {
                    let room = &ub.value - &self.values[xk.index()];
                    consider(room.scale(&b.abs().recip().unwrap()), xk, &mut limit);
                }
            } else if let Some(lb) = &self.lower[xk.index()] {
                let room = &self.values[xk.index()] - &lb.value;
                consider(room.scale(&b.abs().recip().unwrap()), xk, &mut limit);
            }
        }
        limit
    }

    /// Minimizes the variable `objective`, which must currently satisfy all
    /// bounds (call [`Self::check`] first).  Bounds on the objective itself
    /// (cost cuts, for instance) participate like any other constraint.  The
    /// valuation afterwards realizes the reported infimum in
    /// delta-arithmetic.
    pub fn minimize(&mut self, objective: LraVar) -> MinimizeOutcome {
        loop {
            let Some(row) = self.rows.get(&objective) else {
                // Nonbasic: the objective moves by itself.
                if !self.can_decrease(objective) {
                    return MinimizeOutcome::Bounded(self.values[objective.index()].clone());
                }
                let Some((theta, blocker)) = self.ratio_limit(objective, false) else {
                    return MinimizeOutcome::Unbounded;
                };
                let target = &self.values[objective.index()] - &theta;
                self.shift_nonbasic(objective, target);
                if blocker == objective {
                    return MinimizeOutcome::Bounded(self.values[objective.index()].clone());
                }
                self.pivot(blocker, objective);
                continue;
            };
            // Basic: pick the smallest-index entering variable whose movement
            // decreases the objective.
            let entering = row.terms().iter().find_map(|(v, c)| {
                if c.is_positive() && self.can_decrease(*v) {
                    Some((*v, false))
                } else if c.is_negative() && self.can_increase(*v) {
                    Some((*v, true))
                } else {
                    None
                }
            });
            let Some((xj, increasing)) = entering else {
                return MinimizeOutcome::Bounded(self.values[objective.index()].clone());
            };
            let Some((theta, blocker)) = self.ratio_limit(xj, increasing) else {
                return MinimizeOutcome::Unbounded;
            };
            let signed = if increasing { theta } else { -theta };
            let target = &self.values[xj.index()] + &signed;
            self.shift_nonbasic(xj, target);
            if blocker == objective {
                // The objective is pinned at its own bound; nothing feasible
                // lies below it.
                return MinimizeOutcome::Bounded(self.values[objective.index()].clone());
            }
            if blocker != xj {
                self.pivot(blocker, xj);
            }
        }
    }

    /// A concrete positive rational small enough that replacing delta with
    /// it keeps every current bound satisfied by the current valuation.
    pub fn concrete_delta(&self) -> Rational {
        let mut best: Option<Rational> = None;
        let mut consider = |gap_real: Rational, gap_delta: Rational| {
            // Need gap_real + gap_delta * d >= 0 with gap_real >= 0; only a
            // negative delta gap constrains d.
            if gap_delta.is_negative() && gap_real.is_positive() {
                let cap = &gap_real / &(-gap_delta);
                if best.as_ref().is_none_or(|b| cap < *b) {
                    best = Some(cap);
                }
            }
        };
        for idx in 0..self.num_vars as usize {
            let val = &self.values[idx];
            if let Some(lb) = &self.lower[idx] {
                consider(val.real() - lb.value.real(), val.coeff() - lb.value.coeff());
            }
            if let Some(ub) = &self.upper[idx] {
                consider(ub.value.real() - val.real(), ub.value.coeff() - val.coeff());
            }
        }
        match best {
            None => Rational::one(),
            Some(cap) => Rational::one().min(cap * Rational::new(1, 2).unwrap()),
        }
    }

    /// The current valuation with delta made concrete.
    pub fn concrete_value(&self, v: LraVar, delta: &Rational) -> Rational {
        self.values[v.index()].evaluate(delta)
    }
}
