//! Language front end: AST, parser, printer, example corpus, samplers.

pub mod ast;
pub mod corpus;
pub mod parser;
pub mod printer;
pub mod sample;

pub use ast::{Formula, ProgramUnit, Stmt};
pub use parser::{parse_formula, parse_program};
pub use printer::{render_formula, render_program};
