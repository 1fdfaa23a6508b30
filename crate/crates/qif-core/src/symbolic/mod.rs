//! Symbolic analysis: weakest preconditions, self-composition verification
//! conditions, Tseitin CNF conversion, DIMACS export, and a small complete
//! SAT solver.

pub mod cnf;
pub mod sat;
pub mod vc;
pub mod wp;

pub use cnf::{export_dimacs, parse_dimacs, tseitin_cnf, Cnf};
pub use sat::dpll_sat;
pub use vc::{
    check_ni_symbolic, check_r_symbolic, vc_ni, vc_ni_using, vc_r, vc_r_using, WpMode,
};
pub use wp::{passify, rename_apart, wp_naive, wp_optimized, PassiveForm};
