//! A miniature optimization modulo theories (OMT) solver for quantifier-free
//! Boolean combinations of propositional atoms and linear rational arithmetic.
//!
//! The solver minimizes pseudo-Boolean cost functions arising from weighted
//! MaxSMT problems.  Two engines are provided: an OMT engine that performs
//! linear, binary, or adaptive search over the cost bound on top of a CDCL
//! SAT solver coupled with a simplex-based LRA procedure, and a core-guided
//! MaxSAT engine in the WPM1 style.  The OMT engine can augment the cost
//! encoding with bidirectional sorting networks (sequential counters or
//! cardinality networks) so that cost-bound cuts prune indicator assignments
//! by unit propagation instead of repeated theory checks.
//!
//! Module layout, bottom up:
//!
//! * [`core`]: literals, clauses, exact rationals, and infinitesimal-extended
//!   rationals.
//! * [`sat`]: a CDCL solver with two-watched-literal propagation, 1UIP
//!   learning, assumptions with unsat cores, and a theory client interface.
//! * [`lra`]: an incremental simplex solver for linear rational arithmetic
//!   with minimization support.
//! * [`smt`]: the DPLL(T) kernel tying [`sat`] and [`lra`] together, plus
//!   Tseitin conversion of formula terms.
//! * [`encoders`]: pseudo-Boolean objective construction and the sorting
//!   network encodings with their cost-threshold attachment clauses.
//! * [`omt`]: minimization search strategies over the SMT kernel.
//! * [`maxsmt`]: the core-guided engine and a cross-checking harness.
//! * [`oracle`]: slow reference implementations (Fourier-Motzkin elimination,
//!   exhaustive optimization) used to validate the fast paths in tests.

pub mod core;
pub mod encoders;
pub mod lra;
pub mod maxsmt;
pub mod omt;
pub mod oracle;
pub mod sat;
pub mod smt;

#[cfg(test)]
pub(crate) mod testutil;
