//! Script frontend for the omtlite solver: a reader and printer for a
//! small SMT-LIB-flavored optimization language, lowering to engine
//! problems, seeded instance generators, an independent result verifier,
//! and a benchmark harness with deterministic CSV output.

pub mod ast;
pub mod bench;
pub mod generate;
pub mod lower;
pub mod parse;
pub mod run;
pub mod verify;
