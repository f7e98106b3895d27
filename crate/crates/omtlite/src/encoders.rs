//! Pseudo-Boolean objective encodings with bidirectional sorting networks.
//!
//! ## Algorithm overview
//!
//! A weighted MaxSMT objective becomes arithmetic: each soft clause `C_i` of
//! weight `w_i` gets a fresh indicator `A_i`, true exactly when the penalty
//! is paid, with clause `(A_i or C_i)` and a companion variable `x_i` tied
//! to it by `(A_i -> x_i = w_i)` and `(not A_i -> x_i = 0)` plus redundant
//! bounds `0 <= x_i <= w_i`; the objective is the defined sum
//! `cost = sum x_i`.
//!
//! On top of that sits the contribution this crate demonstrates: the
//! indicators of each weight group feed a bidirectional sorting network
//! whose outputs `B_1 >= B_2 >= ...` count how many indicators are true.
//! Output `B_i` is tied to the threshold atom `i*w <= t` on the group's sum
//! `t`, so a cost-bound cut learned by the optimization loop falsifies
//! threshold atoms, unit propagation pushes `not B_i` into the network, and
//! the network's backward propagation disables soft-clause combinations
//! that would breach the bound, all without consulting the simplex solver.
//! Two network constructions are provided: a sequential unary counter
//! (quadratic, excellent propagation) and a Batcher odd-even sorting
//! network over 3-clause-per-direction comparators (quasilinear).  Grouped
//! activation clauses relate per-group thresholds to global cost
//! thresholds when several networks coexist.

use std::collections::BTreeMap;

use crate::core::{Lit, Rational};
use crate::lra::{LinExpr, LraVar};
use crate::sat::{dimacs, CnfFormula};
use crate::smt::{AtomOp, SmtSolver, Term};

/// A soft constraint: pay `weight` unless `term` holds.
#[derive(Clone, Debug)]
pub struct SoftClause {
    pub term: Term,
    pub weight: Rational,
}

/// Indicator bookkeeping for one soft clause.
#[derive(Clone, Debug)]
pub struct Indicator {
    /// True exactly when the penalty is paid.
    pub lit: Lit,
    /// Companion variable: `weight` when the penalty is paid, else 0.
    pub x: LraVar,
    pub weight: Rational,
}

/// An objective in pseudo-Boolean form: `cost` is a defined arithmetic
/// variable equal to the sum of the indicator companions (plus a linear
/// part, for mixed objectives).
#[derive(Clone, Debug)]
pub struct PbObjective {
    pub cost: LraVar,
    pub indicators: Vec<Indicator>,
    /// Arithmetic variables outside the indicators that feed `cost`.
    pub linear_vars: Vec<LraVar>,
    /// True when `cost` is exactly the indicator sum, so every reachable
    /// cost value lies on the weight grid and global threshold atoms can be
    /// attached to it directly.
    pub pure_pb: bool,
}

impl PbObjective {
    /// Sum of all weights: the largest cost any model can pay through the
    /// indicators.
    pub fn total_weight(&self) -> Rational {
        let mut total = Rational::zero();
        for ind in &self.indicators {
            total += &ind.weight;
        }
        total
    }

    pub fn machinery_vars(&self) -> Vec<LraVar> {
        let mut vars: Vec<LraVar> = self.indicators.iter().map(|i| i.x).collect();
        vars.extend(self.linear_vars.iter().copied());
        vars
    }
}

fn unit_atom(smt: &mut SmtSolver, expr: LinExpr, op: AtomOp, rhs: Rational) {
    let l = smt.lit_of_atom(&expr, op, &rhs);
    smt.add_clause_lits(vec![l]);
}

/// Encodes soft clauses into indicators, companions, and a defined cost
/// variable.  Hard constraints are asserted by the caller.
pub fn encode_soft_objective(smt: &mut SmtSolver, soft: &[SoftClause]) -> PbObjective {
    let cost = smt.new_real();
    let mut indicators = Vec::with_capacity(soft.len());
    let mut sum_terms = vec![(cost, Rational::one())];
    for sc in soft {
        assert!(sc.weight.is_positive(), "soft weights must be positive");
        let a = Lit::positive(smt.new_sat_var());
        let c = smt.lit_of_term(&sc.term);
        smt.add_clause_lits(vec![a, c]);
        let x = smt.new_real();
        let pay = smt.lit_of_atom(&LinExpr::var(x), AtomOp::Eq, &sc.weight);
        let free = smt.lit_of_atom(&LinExpr::var(x), AtomOp::Eq, &Rational::zero());
        smt.add_clause_lits(vec![!a, pay]);
        smt.add_clause_lits(vec![a, free]);
        // Redundant bounds sharpen theory reasoning on partial assignments.
        unit_atom(smt, LinExpr::var(x), AtomOp::Ge, Rational::zero());
        unit_atom(smt, LinExpr::var(x), AtomOp::Le, sc.weight.clone());
        sum_terms.push((x, -Rational::one()));
        indicators.push(Indicator { lit: a, x, weight: sc.weight.clone() });
    }
    unit_atom(smt, LinExpr::new(sum_terms), AtomOp::Eq, Rational::zero());
    PbObjective { cost, indicators, linear_vars: Vec::new(), pure_pb: true }
}

/// Encodes a mixed objective `linear + sum of soft penalties`.  Threshold
/// networks still apply per weight group, but global cost thresholds do
/// not, since the linear part moves cost off the weight grid.
pub fn encode_mixed_objective(
    smt: &mut SmtSolver,
    linear: &LinExpr,
    soft: &[SoftClause],
) -> PbObjective {
    assert!(!linear.is_empty(), "mixed objectives need a linear part");
    let soft_part = if soft.is_empty() { None } else { Some(encode_soft_objective(smt, soft)) };
    let cost = smt.new_real();
    let mut indicators = Vec::new();
    let mut linear_vars = Vec::new();
    // cost - soft_cost - linear = 0, or cost - linear = 0 without softs.
    let mut terms = vec![(cost, Rational::one())];
    if let Some(pb) = soft_part {
        terms.push((pb.cost, -Rational::one()));
        linear_vars.push(pb.cost);
        indicators = pb.indicators;
    }
    for (v, c) in linear.terms() {
        terms.push((*v, -c));
        linear_vars.push(*v);
    }
    unit_atom(smt, LinExpr::new(terms), AtomOp::Eq, Rational::zero());
    PbObjective { cost, indicators, linear_vars, pure_pb: false }
}

/// Indicator indices partitioned by weight, ascending.
pub fn group_by_weight(pb: &PbObjective) -> Vec<(Rational, Vec<usize>)> {
    let mut groups: BTreeMap<Rational, Vec<usize>> = BTreeMap::new();
    for (i, ind) in pb.indicators.iter().enumerate() {
        groups.entry(ind.weight.clone()).or_default().push(i);
    }
    groups.into_iter().collect()
}

/// Where fresh variables and clauses go while building a network.
pub trait ClauseSink {
    fn new_lit(&mut self) -> Lit;
    fn add_clause(&mut self, lits: Vec<Lit>);
}

impl ClauseSink for CnfFormula {
    fn new_lit(&mut self) -> Lit {
        let v = crate::core::Var(self.num_vars as u32);
        self.num_vars += 1;
        Lit::positive(v)
    }

    fn add_clause(&mut self, lits: Vec<Lit>) {
        self.add(lits);
    }
}

impl ClauseSink for SmtSolver {
    fn new_lit(&mut self) -> Lit {
        Lit::positive(self.new_sat_var())
    }

    fn add_clause(&mut self, lits: Vec<Lit>) {
        self.add_clause_lits(lits);
    }
}

struct CountingSink<'a, S: ClauseSink> {
    inner: &'a mut S,
    vars: u64,
    clauses: u64,
}

impl<S: ClauseSink> CountingSink<'_, S> {
    fn new(inner: &mut S) -> CountingSink<'_, S> {
        CountingSink { inner, vars: 0, clauses: 0 }
    }
}

impl<S: ClauseSink> ClauseSink for CountingSink<'_, S> {
    fn new_lit(&mut self) -> Lit {
        self.vars += 1;
        self.inner.new_lit()
    }

    fn add_clause(&mut self, lits: Vec<Lit>) {
        self.clauses += 1;
        self.inner.add_clause(lits);
    }
}

/// Sorting network construction.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NetworkKind {
    /// Sequential unary counter: n^2 auxiliaries, 4n^2 - 3n + 1 clauses.
    SeqCounter,
    /// Batcher odd-even sorting network over two-way comparators.
    CardNet,
}

/// Builds a network over `inputs`, returning outputs sorted by truth:
/// output `j` (0-based) is true iff at least `j + 1` inputs are true.  Both
/// constructions propagate in both directions under unit propagation: from
/// inputs to counts, from bounded counts back to the undecided inputs.
pub fn build_network(sink: &mut impl ClauseSink, kind: NetworkKind, inputs: &[Lit]) -> Vec<Lit> {
    match kind {
        NetworkKind::SeqCounter => build_seqcounter(sink, inputs),
        NetworkKind::CardNet => build_cardnet(sink, inputs),
    }
}

/// Sequential counter: `s[i][j]` means at least `j + 1` of the first
/// `i + 1` inputs are true; outputs are the last row.  Clauses cover both
/// the counting direction and its converse.
fn build_seqcounter(sink: &mut impl ClauseSink, inputs: &[Lit]) -> Vec<Lit> {
    let n = inputs.len();
    assert!(n >= 1);
    let mut s = vec![vec![Lit::positive(crate::core::Var(0)); n]; n];
    for row in s.iter_mut() {
        for cell in row.iter_mut() {
            *cell = sink.new_lit();
        }
    }
    let a = |i: usize| inputs[i - 1];
    let sv = |i: usize, j: usize| s[i - 1][j - 1];
    sink.add_clause(vec![!a(1), sv(1, 1)]);
    sink.add_clause(vec![!sv(1, 1), a(1)]);
    for j in 2..=n {
        sink.add_clause(vec![!sv(1, j)]);
    }
    for i in 2..=n {
        sink.add_clause(vec![!a(i), sv(i, 1)]);
        sink.add_clause(vec![!sv(i - 1, 1), sv(i, 1)]);
        sink.add_clause(vec![!sv(i, 1), a(i), sv(i - 1, 1)]);
        sink.add_clause(vec![!a(i), !sv(i - 1, n)]);
        for j in 2..=n {
            sink.add_clause(vec![!a(i), !sv(i - 1, j - 1), sv(i, j)]);
            sink.add_clause(vec![!sv(i - 1, j), sv(i, j)]);
            sink.add_clause(vec![!sv(i, j), a(i), sv(i - 1, j)]);
            sink.add_clause(vec![!sv(i, j), sv(i - 1, j - 1), sv(i - 1, j)]);
        }
    }
    (1..=n).map(|j| sv(n, j)).collect()
}

/// Clause count of the sequential counter over `n` inputs.
pub fn seqcounter_clause_count(n: u64) -> u64 {
    4 * n * n - 3 * n + 1
}

/// Two-way comparator: `wires[i]` becomes the maximum and `wires[j]` the
/// minimum of the pair, counting true above false.
fn comparator(sink: &mut impl ClauseSink, wires: &mut [Lit], i: usize, j: usize) {
    let a = wires[i];
    let b = wires[j];
    let hi = sink.new_lit();
    let lo = sink.new_lit();
    sink.add_clause(vec![!a, hi]);
    sink.add_clause(vec![!b, hi]);
    sink.add_clause(vec![!a, !b, lo]);
    sink.add_clause(vec![!hi, a, b]);
    sink.add_clause(vec![!lo, a]);
    sink.add_clause(vec![!lo, b]);
    wires[i] = hi;
    wires[j] = lo;
}

fn oddeven_merge(sink: &mut impl ClauseSink, wires: &mut [Lit], lo: usize, n: usize, r: usize) {
    let step = r * 2;
    if step < n {
        oddeven_merge(sink, wires, lo, n, step);
        oddeven_merge(sink, wires, lo + r, n, step);
        let mut i = lo + r;
        while i + r < lo + n {
            comparator(sink, wires, i, i + r);
            i += step;
        }
    } else {
        comparator(sink, wires, lo, lo + r);
    }
}

fn oddeven_sort(sink: &mut impl ClauseSink, wires: &mut [Lit], lo: usize, n: usize) {
    if n > 1 {
        let m = n / 2;
        oddeven_sort(sink, wires, lo, m);
        oddeven_sort(sink, wires, lo + m, m);
        oddeven_merge(sink, wires, lo, n, 1);
    }
}

/// Batcher odd-even sorting network, padded to a power of two with a shared
/// constant-false input; the padding outputs are dropped.
fn build_cardnet(sink: &mut impl ClauseSink, inputs: &[Lit]) -> Vec<Lit> {
    let n = inputs.len();
    assert!(n >= 1);
    let width = n.next_power_of_two();
    let mut wires = inputs.to_vec();
    if width > n {
        let pad = sink.new_lit();
        sink.add_clause(vec![!pad]);
        wires.resize(width, pad);
    }
    oddeven_sort(sink, &mut wires, 0, width);
    wires.truncate(n);
    wires
}

/// How indicators split into per-network chunks within a weight group.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ChunkPolicy {
    Unlimited,
    Size(u32),
}

impl ChunkPolicy {
    fn split(self, members: &[usize]) -> Vec<Vec<usize>> {
        match self {
            ChunkPolicy::Unlimited => vec![members.to_vec()],
            ChunkPolicy::Size(k) => {
                assert!(k >= 1, "chunk size must be at least 1");
                members.chunks(k as usize).map(|c| c.to_vec()).collect()
            }
        }
    }
}

/// Objective encoding selection.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Encoding {
    /// No networks: cost bounds prune through the theory solver only.
    #[default]
    None,
    SeqCounter,
    CardNet,
}

#[derive(Clone, Debug)]
pub struct AttachConfig {
    pub encoding: Encoding,
    pub chunk: ChunkPolicy,
    /// Also emit the reverse activation family relating upper bounds on a
    /// group sum to upper bounds on cost.
    pub symmetric: bool,
}

impl Default for AttachConfig {
    fn default() -> Self {
        AttachConfig {
            encoding: Encoding::None,
            chunk: ChunkPolicy::Unlimited,
            symmetric: false,
        }
    }
}

/// What [`attach_objective`] built.
#[derive(Clone, Debug, Default)]
pub struct AttachmentReport {
    pub networks: usize,
    pub aux_vars: u64,
    pub clauses: u64,
    /// Chunks of a single indicator, which need no network.
    pub skipped_singletons: usize,
    /// Fresh group-sum variables introduced for multi-network layouts.
    pub materialized_targets: usize,
}

fn ge_lit(smt: &mut SmtSolver, var: LraVar, c: Rational) -> Lit {
    smt.lit_of_atom(&LinExpr::var(var), AtomOp::Ge, &c)
}

fn le_lit(smt: &mut SmtSolver, var: LraVar, c: Rational) -> Lit {
    smt.lit_of_atom(&LinExpr::var(var), AtomOp::Le, &c)
}

/// Ties network outputs to threshold atoms on `target`: output `i`
/// (1-based) holds iff `i * weight <= target`, and the two adjacent
/// thresholds exclude each other.
fn attach_thresholds(
    smt: &mut SmtSolver,
    outputs: &[Lit],
    target: LraVar,
    weight: &Rational,
) -> u64 {
    let mut clauses = 0;
    for (idx, &b) in outputs.iter().enumerate() {
        let i = Rational::from_int(idx as i64 + 1);
        let at_least = ge_lit(smt, target, &i * weight);
        let at_most_prev = le_lit(smt, target, &(&i - &Rational::one()) * weight);
        smt.add_clause_lits(vec![!b, at_least]);
        smt.add_clause_lits(vec![b, at_most_prev]);
        smt.add_clause_lits(vec![!at_least, !at_most_prev]);
        clauses += 3;
    }
    clauses
}

/// Builds networks over the objective's indicators, grouped by weight and
/// chunked per configuration, and wires their outputs to threshold atoms.
/// Always registers the objective's variables for conflict classification,
/// even with [`Encoding::None`].
pub fn attach_objective(
    smt: &mut SmtSolver,
    pb: &PbObjective,
    cfg: &AttachConfig,
) -> AttachmentReport {
    let mut report = AttachmentReport::default();
    let mut machinery = pb.machinery_vars();
    if cfg.encoding != Encoding::None {
        let kind = match cfg.encoding {
            Encoding::SeqCounter => NetworkKind::SeqCounter,
            Encoding::CardNet => NetworkKind::CardNet,
            Encoding::None => unreachable!(),
        };
        let groups = group_by_weight(pb);
        let total_weight = pb.total_weight();
        let single_layout = pb.pure_pb
            && groups.len() == 1
            && cfg.chunk.split(&groups[0].1).len() == 1;
        for (weight, members) in &groups {
            for chunk in cfg.chunk.split(members) {
                if chunk.len() < 2 {
                    report.skipped_singletons += 1;
                    continue;
                }
                let chunk_weight = weight * &Rational::from_int(chunk.len() as i64);
                let (target, activation) = if single_layout {
                    (pb.cost, false)
                } else {
                    // Materialize the chunk sum as its own variable with
                    // redundant bounds.
                    let tau = smt.new_real();
                    let mut terms = vec![(tau, Rational::one())];
                    for &i in &chunk {
                        terms.push((pb.indicators[i].x, -Rational::one()));
                    }
                    unit_atom(smt, LinExpr::new(terms), AtomOp::Eq, Rational::zero());
                    unit_atom(smt, LinExpr::var(tau), AtomOp::Ge, Rational::zero());
                    unit_atom(smt, LinExpr::var(tau), AtomOp::Le, chunk_weight.clone());
                    machinery.push(tau);
                    report.materialized_targets += 1;
                    (tau, pb.pure_pb)
                };
                let inputs: Vec<Lit> = chunk.iter().map(|&i| pb.indicators[i].lit).collect();
                let outputs = {
                    let mut sink = CountingSink::new(smt);
                    let outputs = build_network(&mut sink, kind, &inputs);
                    report.aux_vars += sink.vars;
                    report.clauses += sink.clauses;
                    outputs
                };
                report.networks += 1;
                report.clauses += attach_thresholds(smt, &outputs, target, weight);
                if activation {
                    // A threshold reached within the group is reached by the
                    // whole objective.
                    for i in 1..=outputs.len() as i64 {
                        let step = &Rational::from_int(i) * weight;
                        let on_cost = ge_lit(smt, pb.cost, step.clone());
                        let on_tau = ge_lit(smt, target, step.clone());
                        smt.add_clause_lits(vec![on_cost, !on_tau]);
                        report.clauses += 1;
                        if cfg.symmetric {
                            // Conversely, a group capped at i*w caps cost at
                            // i*w plus everything the other groups can pay.
                            let rest = &total_weight - &chunk_weight;
                            let cap_cost = le_lit(smt, pb.cost, &step + &rest);
                            let cap_tau = le_lit(smt, target, step);
                            smt.add_clause_lits(vec![cap_cost, !cap_tau]);
                            report.clauses += 1;
                        }
                    }
                }
            }
        }
    }
    smt.extend_objective_vars(machinery, [pb.cost]);
    report
}

/// A network built over a standalone formula, for export and analysis.
pub struct NetworkExport {
    pub formula: CnfFormula,
    pub inputs: Vec<Lit>,
    pub outputs: Vec<Lit>,
}

pub fn export_network(kind: NetworkKind, n: usize) -> NetworkExport {
    let mut formula = CnfFormula::default();
    let inputs: Vec<Lit> = (0..n).map(|_| formula.new_lit()).collect();
    let outputs = build_network(&mut formula, kind, &inputs);
    NetworkExport { formula, inputs, outputs }
}

/// DIMACS text of a standalone network, with `inputs:` and `outputs:`
/// manifest comments in DIMACS numbering.
pub fn network_dimacs(kind: NetworkKind, n: usize) -> String {
    let export = export_network(kind, n);
    let manifest = |name: &str, lits: &[Lit]| {
        let nums: Vec<String> =
            lits.iter().map(|&l| dimacs::lit_to_dimacs(l).to_string()).collect();
        format!("{name}: {}", nums.join(" "))
    };
    let comments = vec![
        manifest("inputs", &export.inputs),
        manifest("outputs", &export.outputs),
    ];
    dimacs::write_dimacs(&export.formula, &comments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::LBool;
    use crate::oracle::brute::{OracleFormula, OracleInstance};
    use crate::sat::{bcp_closure, SolveLimits, SolveOutcome};
    use crate::smt::EpPolicy;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn lit_value(closure: &[LBool], l: Lit) -> LBool {
        l.apply(closure[l.var().index()])
    }

    /// Def-style bidirectionality: (a) settled inputs force the outputs;
    /// (b) an output refuted above the true count forces the undecided
    /// inputs false; (c) an output asserted at the undecided margin forces
    /// them true.
    fn check_network_bidirectional(kind: NetworkKind, n: usize) {
        let export = export_network(kind, n);
        let formula = &export.formula;
        let ins = &export.inputs;
        let outs = &export.outputs;
        for true_mask in 0u32..1 << n {
            for false_mask in 0u32..1 << n {
                if true_mask & false_mask != 0 {
                    continue;
                }
                let mut assumptions = Vec::new();
                for (i, &input) in ins.iter().enumerate() {
                    if true_mask >> i & 1 == 1 {
                        assumptions.push(input);
                    } else if false_mask >> i & 1 == 1 {
                        assumptions.push(!input);
                    }
                }
                let k = true_mask.count_ones() as usize;
                let m = n - false_mask.count_ones() as usize;
                let closure = bcp_closure(formula, &assumptions)
                    .unwrap_or_else(|| panic!("{kind:?} n={n}: consistent inputs conflicted"));
                for (j, &b) in outs.iter().enumerate() {
                    if j < k {
                        assert!(
                            lit_value(&closure, b).is_true(),
                            "{kind:?} n={n} k={k}: output {} not forced true",
                            j + 1
                        );
                    }
                    if j + 1 > m {
                        assert!(
                            lit_value(&closure, b).is_false(),
                            "{kind:?} n={n} m={m}: output {} not forced false",
                            j + 1
                        );
                    }
                }
                // (b): with exactly k inputs true and none false, refuting
                // B_{k+1} must force the rest false.
                if false_mask == 0 && k < n {
                    let mut with_cap = assumptions.clone();
                    with_cap.push(!outs[k]);
                    let closure = bcp_closure(formula, &with_cap)
                        .unwrap_or_else(|| panic!("{kind:?} n={n} k={k}: cap conflicted"));
                    for (i, &input) in ins.iter().enumerate() {
                        if true_mask >> i & 1 == 0 {
                            assert!(
                                lit_value(&closure, input).is_false(),
                                "{kind:?} n={n} k={k}: input {i} not forced false"
                            );
                        }
                    }
                }
                // (c): with exactly n - m inputs false and none true,
                // asserting B_m must force the rest true.
                if true_mask == 0 && m >= 1 {
                    let mut with_floor = assumptions.clone();
                    with_floor.push(outs[m - 1]);
                    let closure = bcp_closure(formula, &with_floor)
                        .unwrap_or_else(|| panic!("{kind:?} n={n} m={m}: floor conflicted"));
                    for (i, &input) in ins.iter().enumerate() {
                        if false_mask >> i & 1 == 0 {
                            assert!(
                                lit_value(&closure, input).is_true(),
                                "{kind:?} n={n} m={m}: input {i} not forced true"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn seqcounter_is_bidirectional_exhaustively() {
        for n in 1..=5 {
            check_network_bidirectional(NetworkKind::SeqCounter, n);
        }
    }

    #[test]
    fn cardnet_is_bidirectional_exhaustively() {
        for n in 1..=5 {
            check_network_bidirectional(NetworkKind::CardNet, n);
        }
    }

    #[test]
    fn seqcounter_clause_count_matches_formula() {
        for n in 1..=40usize {
            let export = export_network(NetworkKind::SeqCounter, n);
            assert_eq!(
                export.formula.clauses.len() as u64,
                seqcounter_clause_count(n as u64),
                "n={n}"
            );
        }
    }

    #[test]
    fn networks_count_models_correctly() {
        // Every total assignment of the inputs propagates to fully decided,
        // correct outputs.
        for kind in [NetworkKind::SeqCounter, NetworkKind::CardNet] {
            for n in 1..=6usize {
                let export = export_network(kind, n);
                for mask in 0u32..1 << n {
                    let assumptions: Vec<Lit> = export
                        .inputs
                        .iter()
                        .enumerate()
                        .map(|(i, &l)| if mask >> i & 1 == 1 { l } else { !l })
                        .collect();
                    let closure = bcp_closure(&export.formula, &assumptions).unwrap();
                    let count = mask.count_ones() as usize;
                    for (j, &b) in export.outputs.iter().enumerate() {
                        let expect = j < count;
                        assert_eq!(
                            lit_value(&closure, b).is_true(),
                            expect,
                            "{kind:?} n={n} mask={mask:b} output {}",
                            j + 1
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn dimacs_export_carries_io_manifest() {
        let text = network_dimacs(NetworkKind::SeqCounter, 3);
        assert!(text.contains("c inputs: 1 2 3"));
        assert!(text.contains("c outputs:"));
        let parsed = dimacs::read_dimacs(&text).unwrap();
        assert_eq!(parsed.formula.clauses.len(), seqcounter_clause_count(3) as usize);
    }

    /// Minimal linear-search optimization loop, used here to validate the
    /// encodings before the real engine exists.
    fn optimize_linear(smt: &mut SmtSolver, pb: &PbObjective) -> Option<Rational> {
        let mut best = None;
        loop {
            match smt.check_sat(&[], &SolveLimits::none()) {
                SolveOutcome::Sat => {}
                SolveOutcome::Unsat { .. } => return best,
                SolveOutcome::Aborted => panic!("no limits set"),
            }
            smt.minimize(pb.cost);
            let value = smt.value_of(pb.cost);
            assert!(value.coeff().is_zero(), "pure PB cost is attained");
            let ub = value.real().clone();
            smt.reset_to_root();
            let cut = smt.lit_of_atom(&LinExpr::var(pb.cost), AtomOp::Lt, &ub);
            smt.add_clause_lits(vec![cut]);
            best = Some(ub);
        }
    }

    fn encoded_optimum(
        hard: &[Term],
        soft: &[SoftClause],
        num_bools: usize,
        cfg: &AttachConfig,
    ) -> Option<Rational> {
        let mut smt = SmtSolver::new(EpPolicy::Fixpoint);
        for _ in 0..num_bools {
            smt.new_bool();
        }
        for h in hard {
            smt.assert_term(h);
        }
        let pb = encode_soft_objective(&mut smt, soft);
        attach_objective(&mut smt, &pb, cfg);
        optimize_linear(&mut smt, &pb)
    }

    fn all_configs() -> Vec<AttachConfig> {
        let mut cfgs = Vec::new();
        for encoding in [Encoding::None, Encoding::SeqCounter, Encoding::CardNet] {
            for chunk in [ChunkPolicy::Unlimited, ChunkPolicy::Size(2)] {
                for symmetric in [false, true] {
                    cfgs.push(AttachConfig { encoding, chunk, symmetric });
                }
            }
        }
        cfgs
    }

    #[test]
    fn encodings_preserve_the_optimum_on_a_fixed_instance() {
        // Softs: b0, not b0 (conflicting pair), b1; hard: b1 -> b0.
        // Optimal: b0 true, b1 true, paying only "not b0" = 2.
        let hard = vec![Term::implies(Term::Bool(1), Term::Bool(0))];
        let soft = vec![
            SoftClause { term: Term::Bool(0), weight: r("1") },
            SoftClause { term: Term::not(Term::Bool(0)), weight: r("2") },
            SoftClause { term: Term::Bool(1), weight: r("3") },
        ];
        let oracle = OracleInstance {
            num_bools: 2,
            atoms: Vec::new(),
            hard: vec![OracleFormula::Or(vec![
                OracleFormula::Not(Box::new(OracleFormula::Bool(1))),
                OracleFormula::Bool(0),
            ])],
            objectives: vec![crate::oracle::brute::OracleObjective {
                softs: vec![
                    (OracleFormula::Bool(0), r("1")),
                    (OracleFormula::Not(Box::new(OracleFormula::Bool(0))), r("2")),
                    (OracleFormula::Bool(1), r("3")),
                ],
            }],
        };
        let want = oracle.minimize_single();
        assert_eq!(want, Some(r("2")));
        for cfg in all_configs() {
            let got = encoded_optimum(&hard, &soft, 2, &cfg);
            assert_eq!(got, want, "config {cfg:?}");
        }
    }

    #[test]
    fn encodings_agree_on_random_boolean_maxsat() {
        let mut state = 0xc0ffee123456789u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as u32
        };
        for round in 0..25 {
            let num_bools = 2 + (next() % 2) as usize;
            let num_soft = 2 + (next() % 4) as usize;
            let mut hard = Vec::new();
            let mut soft = Vec::new();
            let mut oracle_hard = Vec::new();
            let mut oracle_soft = Vec::new();
            for _ in 0..(next() % 3) {
                let a = (next() % num_bools as u32) as usize;
                let b = (next() % num_bools as u32) as usize;
                let pos = next() % 2 == 0;
                let rhs = if pos {
                    Term::Bool(b as u32)
                } else {
                    Term::not(Term::Bool(b as u32))
                };
                hard.push(Term::implies(Term::Bool(a as u32), rhs));
                let orhs = if pos {
                    OracleFormula::Bool(b)
                } else {
                    OracleFormula::Not(Box::new(OracleFormula::Bool(b)))
                };
                oracle_hard.push(OracleFormula::Or(vec![
                    OracleFormula::Not(Box::new(OracleFormula::Bool(a))),
                    orhs,
                ]));
            }
            for _ in 0..num_soft {
                let v = (next() % num_bools as u32) as usize;
                let pos = next() % 2 == 0;
                let weight = Rational::from_int(1 + (next() % 3) as i64);
                let term = if pos {
                    Term::Bool(v as u32)
                } else {
                    Term::not(Term::Bool(v as u32))
                };
                let oterm = if pos {
                    OracleFormula::Bool(v)
                } else {
                    OracleFormula::Not(Box::new(OracleFormula::Bool(v)))
                };
                soft.push(SoftClause { term, weight: weight.clone() });
                oracle_soft.push((oterm, weight));
            }
            let oracle = OracleInstance {
                num_bools,
                atoms: Vec::new(),
                hard: oracle_hard,
                objectives: vec![crate::oracle::brute::OracleObjective { softs: oracle_soft }],
            };
            let want = oracle.minimize_single();
            for cfg in [
                AttachConfig::default(),
                AttachConfig {
                    encoding: Encoding::SeqCounter,
                    chunk: ChunkPolicy::Unlimited,
                    symmetric: false,
                },
                AttachConfig {
                    encoding: Encoding::CardNet,
                    chunk: ChunkPolicy::Size(2),
                    symmetric: true,
                },
            ] {
                let got = encoded_optimum(&hard, &soft, num_bools, &cfg);
                assert_eq!(got, want, "round {round} config {cfg:?}");
            }
        }
    }

    #[test]
    fn attachment_report_reflects_layout() {
        // Weights 1, 1, 1, 2: two groups; chunk size 2 splits the first
        // group into one pair and one singleton.
        let mut smt = SmtSolver::new(EpPolicy::Fixpoint);
        let b: Vec<u32> = (0..4).map(|_| smt.new_bool()).collect();
        let soft: Vec<SoftClause> = b
            .iter()
            .enumerate()
            .map(|(i, &sym)| SoftClause {
                term: Term::Bool(sym),
                weight: if i == 3 { r("2") } else { r("1") },
            })
            .collect();
        let pb = encode_soft_objective(&mut smt, &soft);
        let report = attach_objective(
            &mut smt,
            &pb,
            &AttachConfig {
                encoding: Encoding::SeqCounter,
                chunk: ChunkPolicy::Size(2),
                symmetric: false,
            },
        );
        assert_eq!(report.networks, 1);
        assert_eq!(report.skipped_singletons, 2);
        assert_eq!(report.materialized_targets, 1);

        // Single uniform group, unlimited chunk: the network targets cost
        // directly, nothing materialized.
        let mut smt2 = SmtSolver::new(EpPolicy::Fixpoint);
        let c: Vec<u32> = (0..3).map(|_| smt2.new_bool()).collect();
        let soft2: Vec<SoftClause> = c
            .iter()
            .map(|&sym| SoftClause { term: Term::Bool(sym), weight: r("1") })
            .collect();
        let pb2 = encode_soft_objective(&mut smt2, &soft2);
        let report2 = attach_objective(
            &mut smt2,
            &pb2,
            &AttachConfig {
                encoding: Encoding::CardNet,
                chunk: ChunkPolicy::Unlimited,
                symmetric: false,
            },
        );
        assert_eq!(report2.networks, 1);
        assert_eq!(report2.materialized_targets, 0);
    }

    #[test]
    fn mixed_objective_tracks_linear_part() {
        // Minimize y + penalty(b0), hard y >= 1/2, soft b0 with weight 2,
        // hard b0 -> y >= 3: optimum is y = 1/2 paying the soft (cost 5/2)
        // versus y = 3 keeping it (cost 3).
        let mut smt = SmtSolver::new(EpPolicy::Fixpoint);
        let b0 = smt.new_bool();
        let y = smt.new_real();
        smt.assert_term(&Term::atom(LinExpr::var(y), AtomOp::Ge, r("1/2")));
        smt.assert_term(&Term::implies(
            Term::Bool(b0),
            Term::atom(LinExpr::var(y), AtomOp::Ge, r("3")),
        ));
        let soft = vec![SoftClause { term: Term::Bool(b0), weight: r("2") }];
        let pb = encode_mixed_objective(&mut smt, &LinExpr::var(y), &soft);
        assert!(!pb.pure_pb);
        attach_objective(
            &mut smt,
            &pb,
            &AttachConfig {
                encoding: Encoding::SeqCounter,
                chunk: ChunkPolicy::Unlimited,
                symmetric: false,
            },
        );
        // Linear search over possibly non-grid costs.
        let mut best: Option<Rational> = None;
        loop {
            match smt.check_sat(&[], &SolveLimits::none()) {
                SolveOutcome::Sat => {}
                SolveOutcome::Unsat { .. } => break,
                SolveOutcome::Aborted => panic!("no limits set"),
            }
            smt.minimize(pb.cost);
            let v = smt.value_of(pb.cost);
            assert!(v.coeff().is_zero());
            let ub = v.real().clone();
            smt.reset_to_root();
            let cut = smt.lit_of_atom(&LinExpr::var(pb.cost), AtomOp::Lt, &ub);
            smt.add_clause_lits(vec![cut]);
            best = Some(ub);
        }
        assert_eq!(best, Some(r("5/2")));
    }

    #[test]
    fn network_outputs_connect_to_cost_cuts_by_propagation() {
        // Uniform weights, single network on cost. Learn cost < 2 at the
        // root; asserting one indicator must propagate the others false at
        // the Boolean level, which shows up as a model where exactly one
        // penalty is paid even though the hard clauses force at least one.
        let mut smt = SmtSolver::new(EpPolicy::Fixpoint);
        let b: Vec<u32> = (0..3).map(|_| smt.new_bool()).collect();
        // b0, b1, b2 cannot all hold together.
        smt.assert_term(&Term::or(vec![
            Term::not(Term::Bool(b[0])),
            Term::not(Term::Bool(b[1])),
        ]));
        let soft: Vec<SoftClause> = b
            .iter()
            .map(|&sym| SoftClause { term: Term::Bool(sym), weight: r("1") })
            .collect();
        let pb = encode_soft_objective(&mut smt, &soft);
        attach_objective(
            &mut smt,
            &pb,
            &AttachConfig {
                encoding: Encoding::SeqCounter,
                chunk: ChunkPolicy::Unlimited,
                symmetric: false,
            },
        );
        let cut = smt.lit_of_atom(&LinExpr::var(pb.cost), AtomOp::Lt, &r("2"));
        smt.add_clause_lits(vec![cut]);
        assert_eq!(smt.check_sat(&[], &SolveLimits::none()), SolveOutcome::Sat);
        let paid = pb
            .indicators
            .iter()
            .filter(|ind| smt.lit_value(ind.lit).is_true())
            .count();
        assert!(paid <= 1, "cut admits at most one paid penalty, saw {paid}");
    }
}
