//! Exact quantitative information flow analysis for loop-free boolean
//! programs.
//!
//! The crate computes the four standard leakage measures of a deterministic
//! program (Shannon entropy, min entropy, guessing entropy, channel
//! capacity) over exact rational arithmetic, compares programs under fixed
//! or universally quantified input distributions, decides the security
//! refinement relation R both by enumeration and by self-composition to
//! SAT, and performs oracle-driven model counting: recovering #SAT of a
//! formula purely through leakage-comparison queries.
//!
//! Modules, bottom up:
//!
//! * [`lang`]: AST, parser, printer, example corpus, random samplers.
//! * [`exec`]: concrete evaluation and exhaustive denotations.
//! * [`dist`]: exact rational joint distributions over the inputs.
//! * [`qif`]: the four leakage measures.
//! * [`compare`]: comparison oracles, the relation R, witness
//!   distributions.
//! * [`symbolic`]: weakest preconditions, self-composition verification
//!   conditions, Tseitin CNF, a DPLL solver, DIMACS export.
//! * [`counting`]: #SAT through comparison oracles by binary search.
//! * [`cli`]: the command-line front end.

pub mod cli;
pub mod compare;
pub mod counting;
pub mod dist;
pub mod error;
pub mod exec;
pub mod lang;
pub mod qif;
pub mod symbolic;

pub use error::{Error, Result};
