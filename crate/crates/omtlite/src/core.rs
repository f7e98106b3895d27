//! Shared ground types: variables, literals, clauses, truth values, and the
//! exact number types used by the arithmetic solver.

pub mod clause;
pub mod delta;
pub mod lits;
pub mod rational;

pub use clause::{Clause, NormalizedClause};
pub use delta::DeltaRational;
pub use lits::{LBool, Lit, Var};
pub use rational::Rational;
