//! Surface syntax for optimization scripts.
//!
//! A script is a flat sequence of commands in s-expression form: constant
//! declarations over `Bool` and `Real`, hard assertions, weighted soft
//! assertions grouped by objective id, `minimize`/`maximize` directives,
//! and the query commands `check-sat`, `get-objectives`, `get-model`.
//! Terms combine Boolean connectives, linear-arithmetic relations, and
//! linear terms with rational literals.  The printer emits one command per
//! line in a canonical form that the reader in [`crate::parse`] maps back
//! to the identical tree, so printing followed by parsing is the identity
//! on syntax trees.

use omtlite::core::Rational;
use std::fmt;

/// Line and column of a token, both 1-based.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Sort {
    Bool,
    Real,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Bool => "Bool",
            Sort::Real => "Real",
        })
    }
}

/// Operator heads of compound terms.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Op {
    And,
    Or,
    Not,
    Implies,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Add,
    Sub,
    Mul,
    Div,
}

impl Op {
    pub fn name(self) -> &'static str {
        match self {
            Op::And => "and",
            Op::Or => "or",
            Op::Not => "not",
            Op::Implies => "=>",
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Ge => ">=",
            Op::Eq => "=",
            Op::Add => "+",
            Op::Sub => "-",
            Op::Mul => "*",
            Op::Div => "/",
        }
    }

    pub fn from_name(name: &str) -> Option<Op> {
        Some(match name {
            "and" => Op::And,
            "or" => Op::Or,
            "not" => Op::Not,
            "=>" => Op::Implies,
            "<" => Op::Lt,
            "<=" => Op::Le,
            ">" => Op::Gt,
            ">=" => Op::Ge,
            "=" => Op::Eq,
            "+" => Op::Add,
            "-" => Op::Sub,
            "*" => Op::Mul,
            "/" => Op::Div,
            _ => return None,
        })
    }

    /// Accepted argument counts, as an inclusive range with `None` for no
    /// upper limit.
    pub fn arity(self) -> (usize, Option<usize>) {
        match self {
            Op::Not => (1, Some(1)),
            Op::Sub => (1, Some(2)),
            Op::Implies | Op::Lt | Op::Le | Op::Gt | Op::Ge | Op::Eq | Op::Mul | Op::Div => {
                (2, Some(2))
            }
            Op::And | Op::Or | Op::Add => (1, None),
        }
    }
}

/// A term as written, before sort checking.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum STerm {
    True,
    False,
    Sym(String),
    Num(Rational),
    App(Op, Vec<STerm>),
}

impl fmt::Display for STerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            STerm::True => f.write_str("true"),
            STerm::False => f.write_str("false"),
            STerm::Sym(s) => f.write_str(s),
            STerm::Num(r) => write!(f, "{r}"),
            STerm::App(op, args) => {
                write!(f, "({}", op.name())?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Command {
    DeclareFun { name: String, sort: Sort },
    Assert(STerm),
    AssertSoft { term: STerm, weight: Rational, id: String },
    Minimize(STerm),
    Maximize(STerm),
    CheckSat,
    GetObjectives,
    GetModel,
    SetOption { key: String, value: String },
    Exit,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::DeclareFun { name, sort } => write!(f, "(declare-fun {name} () {sort})"),
            Command::Assert(t) => write!(f, "(assert {t})"),
            Command::AssertSoft { term, weight, id } => {
                write!(f, "(assert-soft {term} :weight {weight} :id {id})")
            }
            Command::Minimize(t) => write!(f, "(minimize {t})"),
            Command::Maximize(t) => write!(f, "(maximize {t})"),
            Command::CheckSat => f.write_str("(check-sat)"),
            Command::GetObjectives => f.write_str("(get-objectives)"),
            Command::GetModel => f.write_str("(get-model)"),
            Command::SetOption { key, value } => write!(f, "(set-option {key} {value})"),
            Command::Exit => f.write_str("(exit)"),
        }
    }
}

/// A command together with the position of its opening parenthesis.
#[derive(Clone, Debug)]
pub struct Spanned {
    pub node: Command,
    pub pos: Pos,
}

#[derive(Clone, Debug, Default)]
pub struct Script {
    pub commands: Vec<Spanned>,
}

impl Script {
    pub fn from_commands(commands: Vec<Command>) -> Script {
        let pos = Pos { line: 1, col: 1 };
        Script { commands: commands.into_iter().map(|node| Spanned { node, pos }).collect() }
    }

    /// Commands without positions, for structural comparison.
    pub fn nodes(&self) -> Vec<Command> {
        self.commands.iter().map(|c| c.node.clone()).collect()
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.commands {
            writeln!(f, "{}", c.node)?;
        }
        Ok(())
    }
}
