//! Slow reference implementations used to validate the solver in tests.
//!
//! Nothing here shares code with the production solving paths: feasibility
//! and minimization of linear constraint conjunctions go through textbook
//! Fourier-Motzkin elimination instead of simplex, and optimization answers
//! come from exhaustive enumeration of atom polarities and Boolean
//! assignments instead of CDCL search.

pub mod brute;
pub mod fm;
