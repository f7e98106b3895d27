//! DIMACS CNF reading and writing.
//!
//! Variable 0 of [`crate::core::Var`] maps to DIMACS variable 1.  Comment
//! lines are preserved on import so that encoders can ship metadata (such as
//! the input/output variables of a sorting network) alongside the clauses.

use std::fmt::Write as _;

use crate::core::{Lit, Var};
use crate::sat::CnfFormula;

/// A parsed DIMACS file: the formula plus the comment lines in order, with
/// the leading `c` and one following space stripped.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DimacsFile {
    pub formula: CnfFormula,
    pub comments: Vec<String>,
}

/// Error raised when a DIMACS file cannot be parsed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DimacsError {
    #[error("line {line}: expected `p cnf <vars> <clauses>`, got `{text}`")]
    BadHeader { line: usize, text: String },
    #[error("line {line}: invalid literal token `{token}`")]
    BadLiteral { line: usize, token: String },
    #[error("line {line}: literal {literal} exceeds declared variable count {declared}")]
    VarOutOfRange { line: usize, literal: i64, declared: usize },
    #[error("clause list ends without terminating 0")]
    UnterminatedClause,
    #[error("missing `p cnf` header")]
    MissingHeader,
}

/// Serializes a formula, prefixing the given comment lines.
pub fn write_dimacs(formula: &CnfFormula, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        if c.is_empty() {
            out.push_str("c\n");
        } else {
            let _ = writeln!(out, "c {c}");
        }
    }
    let _ = writeln!(out, "p cnf {} {}", formula.num_vars, formula.clauses.len());
    for clause in &formula.clauses {
        for &lit in clause.iter() {
            let _ = write!(out, "{} ", lit_to_dimacs(lit));
        }
        out.push_str("0\n");
    }
    out
}

pub fn lit_to_dimacs(lit: Lit) -> i64 {
    let v = lit.var().0 as i64 + 1;
    if lit.is_positive() {
        v
    } else {
        -v
    }
}

pub fn lit_from_dimacs(n: i64) -> Lit {
    debug_assert!(n != 0);
    Lit::new(Var((n.unsigned_abs() - 1) as u32), n > 0)
}

/// Parses DIMACS CNF text.
pub fn read_dimacs(text: &str) -> Result<DimacsFile, DimacsError> {
    let mut comments = Vec::new();
    let mut declared_vars: Option<usize> = None;
    let mut formula = CnfFormula::new(0);
    let mut current: Vec<Lit> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('c') {
            comments.push(rest.strip_prefix(' ').unwrap_or(rest).to_owned());
            continue;
        }
        if trimmed.starts_with('p') {
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            let parsed = match parts.as_slice() {
                ["p", "cnf", v, c] => v.parse::<usize>().ok().zip(c.parse::<usize>().ok()),
                _ => None,
            };
            match parsed {
                Some((v, _)) => {
                    declared_vars = Some(v);
                    formula.num_vars = v;
                }
                None => {
                    return Err(DimacsError::BadHeader { line, text: trimmed.to_owned() })
                }
            }
            continue;
        }
        let declared = declared_vars.ok_or(DimacsError::MissingHeader)?;
        for token in trimmed.split_whitespace() {
            let n: i64 = token
                .parse()
                .map_err(|_| DimacsError::BadLiteral { line, token: token.to_owned() })?;
            if n == 0 {
                formula.add(std::mem::take(&mut current));
            } else {
                if n.unsigned_abs() as usize > declared {
                    return Err(DimacsError::VarOutOfRange { line, literal: n, declared });
                }
                current.push(lit_from_dimacs(n));
            }
        }
    }
    if declared_vars.is_none() {
        return Err(DimacsError::MissingHeader);
    }
    if !current.is_empty() {
        return Err(DimacsError::UnterminatedClause);
    }
    Ok(DimacsFile { formula, comments })
}
