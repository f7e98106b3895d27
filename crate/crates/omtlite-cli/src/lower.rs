//! Lowering from surface scripts to solver problems.
//!
//! Commands are replayed in order against a symbol table, producing engine
//! terms for hard assertions, soft-clause groups keyed by objective id,
//! and one objective specification per `minimize`/`maximize` directive.
//! An objective term is a linear combination of declared `Real` constants,
//! a rational constant offset, and objective ids with coefficient one;
//! each id stands for the total weight of the falsified soft clauses in
//! its group.  Maximization is reduced to minimization: the linear part is
//! negated and every soft clause in the referenced groups is flipped, so
//! `max t = offset + W - min t'` where `W` is the group weight sum.  The
//! same tables also lower pure soft-group problems to the brute-force
//! oracle's representation for differential testing.

use crate::ast::{Command, Op, Pos, STerm, Script, Sort};
use crate::parse::{ErrorKind, FrontError};
use omtlite::core::Rational;
use omtlite::encoders::SoftClause;
use omtlite::lra::{LinExpr, LraVar};
use omtlite::omt::{Objective, OmtProblem, Priority};
use omtlite::oracle::brute::{OracleFormula, OracleInstance, OracleObjective};
use omtlite::oracle::fm::LinearConstraint;
use omtlite::smt::{AtomOp, Term};
use std::collections::HashMap;

/// One `minimize` or `maximize` directive, decomposed.
#[derive(Clone, Debug)]
pub struct ObjectiveSpec {
    pub surface: STerm,
    pub maximize: bool,
    pub linear: LinExpr,
    pub offset: Rational,
    /// Indices into [`Lowered::groups`], each entering with coefficient 1.
    pub groups: Vec<usize>,
    pub pos: Pos,
}

/// A script reduced to solver-ready pieces.
#[derive(Clone, Debug, Default)]
pub struct Lowered {
    pub bool_names: Vec<String>,
    pub real_names: Vec<String>,
    pub hard: Vec<Term>,
    pub hard_surface: Vec<String>,
    pub groups: Vec<(String, Vec<SoftClause>)>,
    pub objectives: Vec<ObjectiveSpec>,
    pub priority: Priority,
    pub has_check: bool,
}

impl Lowered {
    pub fn num_bools(&self) -> u32 {
        self.bool_names.len() as u32
    }

    pub fn num_reals(&self) -> u32 {
        self.real_names.len() as u32
    }

    /// Total weight of the groups an objective references.
    pub fn group_weight(&self, spec: &ObjectiveSpec) -> Rational {
        let mut w = Rational::zero();
        for &g in &spec.groups {
            for soft in &self.groups[g].1 {
                w += &soft.weight;
            }
        }
        w
    }

    /// The engine-side objective: minimized as-is, or the flipped form for
    /// a maximization.
    pub fn engine_objective(&self, spec: &ObjectiveSpec) -> Objective {
        let mut softs = Vec::new();
        for &g in &spec.groups {
            for soft in &self.groups[g].1 {
                let term = if spec.maximize {
                    Term::not(soft.term.clone())
                } else {
                    soft.term.clone()
                };
                softs.push(SoftClause { term, weight: soft.weight.clone() });
            }
        }
        let linear = if spec.maximize {
            spec.linear.scale(&-Rational::one())
        } else {
            spec.linear.clone()
        };
        let linear = if linear.is_empty() { None } else { Some(linear) };
        Objective { linear, softs }
    }

    pub fn engine_problem(&self) -> OmtProblem {
        OmtProblem {
            num_bools: self.num_bools(),
            num_reals: self.num_reals(),
            hard: self.hard.clone(),
            objectives: self.objectives.iter().map(|s| self.engine_objective(s)).collect(),
        }
    }

    /// Surface value of objective `idx` given the engine optimum of its
    /// lowered form.
    pub fn report_value(&self, idx: usize, engine_value: &Rational) -> Rational {
        let spec = &self.objectives[idx];
        if spec.maximize {
            &(&spec.offset + &self.group_weight(spec)) - engine_value
        } else {
            &spec.offset + engine_value
        }
    }

    /// Inverse of [`Lowered::report_value`].
    pub fn engine_value(&self, idx: usize, report: &Rational) -> Rational {
        let spec = &self.objectives[idx];
        if spec.maximize {
            &(&spec.offset + &self.group_weight(spec)) - report
        } else {
            report - &spec.offset
        }
    }

    /// Surface value of objective `idx` under a concrete model.
    pub fn evaluate_objective(&self, idx: usize, bools: &[bool], reals: &[Rational]) -> Rational {
        let spec = &self.objectives[idx];
        let mut value = spec.offset.clone();
        for (v, c) in spec.linear.terms() {
            value += &(c * &reals[v.0 as usize]);
        }
        for &g in &spec.groups {
            for soft in &self.groups[g].1 {
                if !eval_term(&soft.term, bools, reals) {
                    value += &soft.weight;
                }
            }
        }
        value
    }

    /// Brute-force oracle form; `None` when some objective has a linear
    /// part, an offset, or maximizes.
    pub fn oracle_instance(&self) -> Option<OracleInstance> {
        if self.objectives.iter().any(|s| {
            s.maximize || !s.linear.is_empty() || !s.offset.is_zero()
        }) {
            return None;
        }
        let mut atoms = AtomTable::default();
        let hard = self.hard.iter().map(|t| atoms.formula(t)).collect();
        let objectives = self
            .objectives
            .iter()
            .map(|spec| OracleObjective {
                softs: spec
                    .groups
                    .iter()
                    .flat_map(|&g| &self.groups[g].1)
                    .map(|s| (atoms.formula(&s.term), s.weight.clone()))
                    .collect(),
            })
            .collect();
        Some(OracleInstance {
            num_bools: self.num_bools() as usize,
            atoms: atoms.constraints,
            hard,
            objectives,
        })
    }
}

/// Evaluates an engine term under a concrete assignment.
pub fn eval_term(term: &Term, bools: &[bool], reals: &[Rational]) -> bool {
    match term {
        Term::True => true,
        Term::False => false,
        Term::Bool(i) => bools[*i as usize],
        Term::Atom(atom) => {
            let mut lhs = Rational::zero();
            for (v, c) in atom.expr.terms() {
                lhs += &(c * &reals[v.0 as usize]);
            }
            match atom.op {
                AtomOp::Le => lhs <= atom.rhs,
                AtomOp::Lt => lhs < atom.rhs,
                AtomOp::Ge => lhs >= atom.rhs,
                AtomOp::Gt => lhs > atom.rhs,
                AtomOp::Eq => lhs == atom.rhs,
            }
        }
        Term::Not(t) => !eval_term(t, bools, reals),
        Term::And(ts) => ts.iter().all(|t| eval_term(t, bools, reals)),
        Term::Or(ts) => ts.iter().any(|t| eval_term(t, bools, reals)),
    }
}

type AtomKey = (Vec<(usize, Rational)>, bool, Rational);

#[derive(Default)]
struct AtomTable {
    constraints: Vec<LinearConstraint>,
    index: HashMap<AtomKey, usize>,
}

impl AtomTable {
    fn leq(&mut self, coeffs: Vec<(usize, Rational)>, strict: bool, rhs: Rational) -> usize {
        let key = (coeffs.clone(), strict, rhs.clone());
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        let i = self.constraints.len();
        self.constraints.push(LinearConstraint::new(coeffs, strict, rhs));
        self.index.insert(key, i);
        i
    }

    fn formula(&mut self, term: &Term) -> OracleFormula {
        match term {
            Term::True => OracleFormula::True,
            Term::False => OracleFormula::False,
            Term::Bool(i) => OracleFormula::Bool(*i as usize),
            Term::Not(t) => OracleFormula::Not(Box::new(self.formula(t))),
            Term::And(ts) => OracleFormula::And(ts.iter().map(|t| self.formula(t)).collect()),
            Term::Or(ts) => OracleFormula::Or(ts.iter().map(|t| self.formula(t)).collect()),
            Term::Atom(atom) => {
                let fwd: Vec<(usize, Rational)> =
                    atom.expr.terms().iter().map(|(v, c)| (v.0 as usize, c.clone())).collect();
                let rev: Vec<(usize, Rational)> =
                    fwd.iter().map(|(v, c)| (*v, -c.clone())).collect();
                match atom.op {
                    AtomOp::Le => OracleFormula::Atom(self.leq(fwd, false, atom.rhs.clone())),
                    AtomOp::Lt => OracleFormula::Atom(self.leq(fwd, true, atom.rhs.clone())),
                    AtomOp::Ge => OracleFormula::Atom(self.leq(rev, false, -atom.rhs.clone())),
                    AtomOp::Gt => OracleFormula::Atom(self.leq(rev, true, -atom.rhs.clone())),
                    AtomOp::Eq => OracleFormula::And(vec![
                        OracleFormula::Atom(self.leq(fwd, false, atom.rhs.clone())),
                        OracleFormula::Atom(self.leq(rev, false, -atom.rhs.clone())),
                    ]),
                }
            }
        }
    }
}

#[derive(Default)]
struct Accumulated {
    linear: LinExpr,
    offset: Rational,
    groups: Vec<(String, Rational)>,
}

struct LowerCtx {
    funs: HashMap<String, (Sort, u32)>,
    group_index: HashMap<String, usize>,
    out: Lowered,
}

impl LowerCtx {
    fn mismatch(&self, pos: Pos, expected: &'static str, found: impl Into<String>) -> FrontError {
        FrontError::new(pos, ErrorKind::SortMismatch { expected, found: found.into() })
    }

    fn lower_bool(&self, term: &STerm, pos: Pos) -> Result<Term, FrontError> {
        match term {
            STerm::True => Ok(Term::True),
            STerm::False => Ok(Term::False),
            STerm::Num(_) => Err(self.mismatch(pos, "Bool", "Real")),
            STerm::Sym(name) => match self.funs.get(name) {
                Some((Sort::Bool, i)) => Ok(Term::Bool(*i)),
                Some((Sort::Real, _)) => Err(self.mismatch(pos, "Bool", "Real")),
                None if self.group_index.contains_key(name) => Err(FrontError::new(
                    pos,
                    ErrorKind::Unsupported(format!(
                        "objective id `{name}` is not a Boolean term"
                    )),
                )),
                None => Err(FrontError::new(pos, ErrorKind::UnknownSymbol(name.clone()))),
            },
            STerm::App(op, args) => match op {
                Op::And | Op::Or => {
                    let args = args
                        .iter()
                        .map(|a| self.lower_bool(a, pos))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(if *op == Op::And { Term::and(args) } else { Term::or(args) })
                }
                Op::Not => Ok(Term::not(self.lower_bool(&args[0], pos)?)),
                Op::Implies => Ok(Term::implies(
                    self.lower_bool(&args[0], pos)?,
                    self.lower_bool(&args[1], pos)?,
                )),
                Op::Lt | Op::Le | Op::Gt | Op::Ge | Op::Eq => {
                    let lhs = self.lower_arith(&args[0], pos, false)?;
                    let rhs = self.lower_arith(&args[1], pos, false)?;
                    let mut expr = lhs.linear;
                    expr.add_scaled(&rhs.linear, &-Rational::one());
                    let bound = &rhs.offset - &lhs.offset;
                    let op = match op {
                        Op::Lt => AtomOp::Lt,
                        Op::Le => AtomOp::Le,
                        Op::Gt => AtomOp::Gt,
                        Op::Ge => AtomOp::Ge,
                        _ => AtomOp::Eq,
                    };
                    if expr.is_empty() {
                        let zero = Rational::zero();
                        let holds = match op {
                            AtomOp::Le => zero <= bound,
                            AtomOp::Lt => zero < bound,
                            AtomOp::Ge => zero >= bound,
                            AtomOp::Gt => zero > bound,
                            AtomOp::Eq => zero == bound,
                        };
                        return Ok(if holds { Term::True } else { Term::False });
                    }
                    Ok(Term::atom(expr, op, bound))
                }
                Op::Add | Op::Sub | Op::Mul | Op::Div => {
                    Err(self.mismatch(pos, "Bool", "Real"))
                }
            },
        }
    }

    /// Lowers an arithmetic term scaled by `k`.  Objective ids are only
    /// admitted when `allow_ids` holds.
    fn lower_arith(
        &self,
        term: &STerm,
        pos: Pos,
        allow_ids: bool,
    ) -> Result<Accumulated, FrontError> {
        let mut acc = Accumulated::default();
        self.arith_into(term, &Rational::one(), &mut acc, pos, allow_ids)?;
        Ok(acc)
    }

    fn arith_into(
        &self,
        term: &STerm,
        k: &Rational,
        acc: &mut Accumulated,
        pos: Pos,
        allow_ids: bool,
    ) -> Result<(), FrontError> {
        match term {
            STerm::Num(r) => {
                acc.offset += &(k * r);
                Ok(())
            }
            STerm::True | STerm::False => Err(self.mismatch(pos, "Real", "Bool")),
            STerm::Sym(name) => match self.funs.get(name) {
                Some((Sort::Real, i)) => {
                    acc.linear.add_term(LraVar(*i), k.clone());
                    Ok(())
                }
                Some((Sort::Bool, _)) => Err(self.mismatch(pos, "Real", "Bool")),
                None => match self.group_index.get(name) {
                    Some(_) if !allow_ids => Err(FrontError::new(
                        pos,
                        ErrorKind::Unsupported(format!(
                            "objective id `{name}` may only appear in objectives"
                        )),
                    )),
                    Some(_) => {
                        acc.groups.push((name.clone(), k.clone()));
                        Ok(())
                    }
                    None => Err(FrontError::new(pos, ErrorKind::UnknownSymbol(name.clone()))),
                },
            },
            STerm::App(op, args) => match op {
                Op::Add => {
                    for a in args {
                        self.arith_into(a, k, acc, pos, allow_ids)?;
                    }
                    Ok(())
                }
                Op::Sub => {
                    if args.len() == 1 {
                        return self.arith_into(&args[0], &-k.clone(), acc, pos, allow_ids);
                    }
                    self.arith_into(&args[0], k, acc, pos, allow_ids)?;
                    self.arith_into(&args[1], &-k.clone(), acc, pos, allow_ids)
                }
                Op::Mul => {
                    let sides = [
                        (self.constant_of(&args[0]), &args[1]),
                        (self.constant_of(&args[1]), &args[0]),
                    ];
                    for (c, other) in sides {
                        if let Some(c) = c {
                            return self.arith_into(other, &(k * &c), acc, pos, allow_ids);
                        }
                    }
                    Err(FrontError::new(
                        pos,
                        ErrorKind::Unsupported(
                            "multiplication needs a constant factor".into(),
                        ),
                    ))
                }
                Op::Div => {
                    let Some(c) = self.constant_of(&args[1]) else {
                        return Err(FrontError::new(
                            pos,
                            ErrorKind::Unsupported("division needs a constant divisor".into()),
                        ));
                    };
                    let Some(inv) = c.recip() else {
                        return Err(FrontError::syntax(pos, "division by zero"));
                    };
                    self.arith_into(&args[0], &(k * &inv), acc, pos, allow_ids)
                }
                _ => Err(self.mismatch(pos, "Real", "Bool")),
            },
        }
    }

    /// Evaluates a ground numeric term, or `None` if it mentions symbols.
    fn constant_of(&self, term: &STerm) -> Option<Rational> {
        match term {
            STerm::Num(r) => Some(r.clone()),
            STerm::App(Op::Add, args) => {
                let mut sum = Rational::zero();
                for a in args {
                    sum += &self.constant_of(a)?;
                }
                Some(sum)
            }
            STerm::App(Op::Sub, args) => {
                let first = self.constant_of(&args[0])?;
                Some(match args.len() {
                    1 => -first,
                    _ => &first - &self.constant_of(&args[1])?,
                })
            }
            STerm::App(Op::Mul, args) => {
                Some(&self.constant_of(&args[0])? * &self.constant_of(&args[1])?)
            }
            STerm::App(Op::Div, args) => {
                let num = self.constant_of(&args[0])?;
                let den = self.constant_of(&args[1])?;
                den.recip().map(|inv| &num * &inv)
            }
            _ => None,
        }
    }

    fn lower_objective(
        &self,
        surface: &STerm,
        maximize: bool,
        pos: Pos,
    ) -> Result<ObjectiveSpec, FrontError> {
        let acc = self.lower_arith(surface, pos, true)?;
        let mut groups = Vec::new();
        for (name, coeff) in acc.groups {
            if coeff != Rational::one() {
                return Err(FrontError::new(
                    pos,
                    ErrorKind::Unsupported(format!(
                        "objective id `{name}` must have coefficient 1"
                    )),
                ));
            }
            let idx = self.group_index[&name];
            if groups.contains(&idx) {
                return Err(FrontError::new(
                    pos,
                    ErrorKind::Unsupported(format!(
                        "objective id `{name}` referenced twice"
                    )),
                ));
            }
            groups.push(idx);
        }
        Ok(ObjectiveSpec {
            surface: surface.clone(),
            maximize,
            linear: acc.linear,
            offset: acc.offset,
            groups,
            pos,
        })
    }
}

/// Lowers a parsed script.
pub fn lower(script: &Script) -> Result<Lowered, FrontError> {
    let mut ctx = LowerCtx {
        funs: HashMap::new(),
        group_index: HashMap::new(),
        out: Lowered::default(),
    };
    for cmd in &script.commands {
        let pos = cmd.pos;
        if ctx.out.has_check {
            match &cmd.node {
                Command::GetObjectives | Command::GetModel => continue,
                Command::Exit => break,
                Command::CheckSat => {
                    return Err(FrontError::new(
                        pos,
                        ErrorKind::Unsupported("at most one check-sat per script".into()),
                    ))
                }
                _ => {
                    return Err(FrontError::new(
                        pos,
                        ErrorKind::Unsupported("commands after check-sat".into()),
                    ))
                }
            }
        }
        match &cmd.node {
            Command::DeclareFun { name, sort } => {
                if ctx.funs.contains_key(name) || ctx.group_index.contains_key(name) {
                    return Err(FrontError::new(pos, ErrorKind::Duplicate(name.clone())));
                }
                let index = match sort {
                    Sort::Bool => {
                        ctx.out.bool_names.push(name.clone());
                        ctx.out.bool_names.len() as u32 - 1
                    }
                    Sort::Real => {
                        ctx.out.real_names.push(name.clone());
                        ctx.out.real_names.len() as u32 - 1
                    }
                };
                ctx.funs.insert(name.clone(), (*sort, index));
            }
            Command::Assert(term) => {
                let lowered = ctx.lower_bool(term, pos)?;
                ctx.out.hard.push(lowered);
                ctx.out.hard_surface.push(term.to_string());
            }
            Command::AssertSoft { term, weight, id } => {
                if ctx.funs.contains_key(id) {
                    return Err(FrontError::new(pos, ErrorKind::Duplicate(id.clone())));
                }
                let lowered = ctx.lower_bool(term, pos)?;
                let idx = match ctx.group_index.get(id) {
                    Some(&i) => i,
                    None => {
                        ctx.out.groups.push((id.clone(), Vec::new()));
                        let i = ctx.out.groups.len() - 1;
                        ctx.group_index.insert(id.clone(), i);
                        i
                    }
                };
                ctx.out.groups[idx].1.push(SoftClause { term: lowered, weight: weight.clone() });
            }
            Command::Minimize(term) => {
                let spec = ctx.lower_objective(term, false, pos)?;
                ctx.out.objectives.push(spec);
            }
            Command::Maximize(term) => {
                let spec = ctx.lower_objective(term, true, pos)?;
                ctx.out.objectives.push(spec);
            }
            Command::SetOption { key, value } => match key.as_str() {
                ":opt.priority" => {
                    ctx.out.priority = match value.as_str() {
                        "lex" => Priority::Lexicographic,
                        "maxmin" => Priority::MaxMin,
                        other => {
                            return Err(FrontError::syntax(
                                pos,
                                format!("unknown priority `{other}`"),
                            ))
                        }
                    }
                }
                other => {
                    return Err(FrontError::new(
                        pos,
                        ErrorKind::Unsupported(format!("option `{other}`")),
                    ))
                }
            },
            Command::CheckSat => ctx.out.has_check = true,
            Command::GetObjectives | Command::GetModel => {
                return Err(FrontError::new(
                    pos,
                    ErrorKind::Unsupported("query before check-sat".into()),
                ))
            }
            Command::Exit => break,
        }
    }
    if ctx.out.priority == Priority::MaxMin {
        for spec in &ctx.out.objectives {
            if spec.maximize || !spec.linear.is_empty() || !spec.offset.is_zero() {
                return Err(FrontError::new(
                    spec.pos,
                    ErrorKind::Unsupported(
                        "maxmin objectives must be plain soft-group sums".into(),
                    ),
                ));
            }
        }
    }
    Ok(ctx.out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_script;

    fn lowered(text: &str) -> Lowered {
        lower(&parse_script(text).unwrap()).unwrap()
    }

    fn lower_err(text: &str) -> FrontError {
        lower(&parse_script(text).unwrap()).unwrap_err()
    }

    #[test]
    fn builds_an_engine_problem() {
        let low = lowered(
            "(declare-fun A () Bool)\n\
             (declare-fun x () Real)\n\
             (assert (or A (< (* 2 x) 3)))\n\
             (assert-soft (not A) :weight 2 :id cost)\n\
             (minimize cost)\n\
             (check-sat)\n",
        );
        let problem = low.engine_problem();
        assert_eq!(problem.num_bools, 1);
        assert_eq!(problem.num_reals, 1);
        assert_eq!(problem.hard.len(), 1);
        assert_eq!(problem.objectives.len(), 1);
        assert!(problem.objectives[0].is_pure_pb());
        let Term::Or(parts) = &problem.hard[0] else { panic!("shape") };
        let Term::Atom(atom) = &parts[1] else { panic!("shape") };
        assert_eq!(atom.op, AtomOp::Lt);
        assert_eq!(atom.rhs, Rational::from_int(3));
        assert_eq!(atom.expr.coeff_of(LraVar(0)), Some(&Rational::from_int(2)));
    }

    #[test]
    fn constants_fold_into_atom_bounds() {
        let low = lowered(
            "(declare-fun x () Real)\n(assert (<= (+ x 1) (- 5 (/ x 2))))\n(check-sat)\n",
        );
        let Term::Atom(atom) = &low.hard[0] else { panic!("shape") };
        assert_eq!(atom.op, AtomOp::Le);
        assert_eq!(atom.expr.coeff_of(LraVar(0)), Some(&Rational::new(3, 2).unwrap()));
        assert_eq!(atom.rhs, Rational::from_int(4));
    }

    #[test]
    fn ground_relations_fold_to_constants() {
        let low = lowered("(assert (< 1 2))\n(assert (>= 1 2))\n(check-sat)\n");
        assert_eq!(low.hard, vec![Term::True, Term::False]);
    }

    #[test]
    fn maximize_flips_softs_and_linear() {
        let low = lowered(
            "(declare-fun A () Bool)\n\
             (declare-fun x () Real)\n\
             (assert-soft A :weight 3 :id gain)\n\
             (maximize (+ gain x 1))\n\
             (check-sat)\n",
        );
        let spec = &low.objectives[0];
        assert!(spec.maximize);
        assert_eq!(spec.offset, Rational::one());
        let engine = low.engine_objective(spec);
        assert_eq!(engine.softs[0].term, Term::not(Term::Bool(0)));
        assert_eq!(
            engine.linear.unwrap().coeff_of(LraVar(0)),
            Some(&Rational::from_int(-1))
        );
        assert_eq!(low.report_value(0, &Rational::from_int(2)), Rational::from_int(2));
        assert_eq!(low.engine_value(0, &Rational::from_int(2)), Rational::from_int(2));
        assert_eq!(low.group_weight(spec), Rational::from_int(3));
    }

    #[test]
    fn repeated_ids_merge_into_one_group() {
        let low = lowered(
            "(declare-fun A () Bool)\n\
             (declare-fun B () Bool)\n\
             (assert-soft A :id cost)\n\
             (assert-soft B :weight 1/2 :id cost)\n\
             (minimize cost)\n\
             (check-sat)\n",
        );
        assert_eq!(low.groups.len(), 1);
        assert_eq!(low.groups[0].1.len(), 2);
        assert_eq!(low.group_weight(&low.objectives[0]), Rational::new(3, 2).unwrap());
    }

    #[test]
    fn error_kinds_are_distinguished() {
        assert!(matches!(
            lower_err("(assert Q)").kind,
            ErrorKind::UnknownSymbol(ref s) if s == "Q"
        ));
        assert!(matches!(
            lower_err("(declare-fun x () Real)\n(assert x)").kind,
            ErrorKind::SortMismatch { expected: "Bool", found: ref f } if f == "Real"
        ));
        assert!(matches!(
            lower_err("(declare-fun A () Bool)\n(assert (< A 1))").kind,
            ErrorKind::SortMismatch { expected: "Real", found: ref f } if f == "Bool"
        ));
        assert!(matches!(
            lower_err("(declare-fun A () Bool)\n(declare-fun A () Real)").kind,
            ErrorKind::Duplicate(_)
        ));
        assert!(matches!(
            lower_err("(declare-fun A () Bool)\n(assert-soft A :id A)").kind,
            ErrorKind::Duplicate(_)
        ));
        assert!(matches!(
            lower_err("(declare-fun x () Real)\n(assert (< (* x x) 1))").kind,
            ErrorKind::Unsupported(_)
        ));
        assert!(matches!(
            lower_err("(declare-fun x () Real)\n(assert (< (/ x 0) 1))").kind,
            ErrorKind::Syntax(ref m) if m.contains("division by zero")
        ));
        let err = lower_err("(declare-fun x () Real)\n(assert (= x zz))");
        assert_eq!(err.pos.line, 2);
        assert!(matches!(err.kind, ErrorKind::UnknownSymbol(ref s) if s == "zz"));
    }

    #[test]
    fn objectives_constrain_id_usage() {
        assert!(matches!(
            lower_err("(declare-fun A () Bool)\n(assert-soft A :id c)\n(minimize (* 2 c))").kind,
            ErrorKind::Unsupported(ref m) if m.contains("coefficient 1")
        ));
        assert!(matches!(
            lower_err("(declare-fun A () Bool)\n(assert-soft A :id c)\n(minimize (+ c c))").kind,
            ErrorKind::Unsupported(ref m) if m.contains("twice")
        ));
        assert!(matches!(
            lower_err("(declare-fun A () Bool)\n(assert-soft A :id c)\n(assert (or A (< c 1)))")
                .kind,
            ErrorKind::Unsupported(ref m) if m.contains("only appear in objectives")
        ));
    }

    #[test]
    fn command_order_is_enforced() {
        assert!(matches!(
            lower_err("(get-model)").kind,
            ErrorKind::Unsupported(ref m) if m.contains("before check-sat")
        ));
        assert!(matches!(
            lower_err("(check-sat)\n(check-sat)").kind,
            ErrorKind::Unsupported(ref m) if m.contains("one check-sat")
        ));
        assert!(matches!(
            lower_err("(check-sat)\n(assert true)").kind,
            ErrorKind::Unsupported(ref m) if m.contains("after check-sat")
        ));
    }

    #[test]
    fn maxmin_rejects_mixed_objectives() {
        let err = lower_err(
            "(set-option :opt.priority maxmin)\n\
             (declare-fun A () Bool)\n\
             (declare-fun x () Real)\n\
             (assert-soft A :id c)\n\
             (minimize (+ c x))\n\
             (check-sat)\n",
        );
        assert!(matches!(err.kind, ErrorKind::Unsupported(_)));
        assert_eq!(err.pos.line, 5);
    }

    #[test]
    fn oracle_lowering_shares_atoms() {
        let low = lowered(
            "(declare-fun A () Bool)\n\
             (declare-fun x () Real)\n\
             (assert (or A (<= x 2)))\n\
             (assert (not (<= x 2)))\n\
             (assert-soft (> x 0) :id c)\n\
             (minimize c)\n\
             (check-sat)\n",
        );
        let oracle = low.oracle_instance().unwrap();
        assert_eq!(oracle.atoms.len(), 2);
        assert_eq!(oracle.hard.len(), 2);
        assert_eq!(oracle.objectives.len(), 1);

        let mixed = lowered(
            "(declare-fun x () Real)\n(minimize x)\n(check-sat)\n",
        );
        assert!(mixed.oracle_instance().is_none());
    }

    #[test]
    fn evaluates_objectives_under_models() {
        let low = lowered(
            "(declare-fun A () Bool)\n\
             (declare-fun x () Real)\n\
             (assert-soft A :weight 5 :id c)\n\
             (minimize (+ c (* 2 x) 1))\n\
             (check-sat)\n",
        );
        let v = low.evaluate_objective(0, &[false], &[Rational::new(1, 2).unwrap()]);
        assert_eq!(v, Rational::from_int(7));
        let v = low.evaluate_objective(0, &[true], &[Rational::zero()]);
        assert_eq!(v, Rational::one());
    }
}
