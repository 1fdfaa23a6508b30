//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("undeclared variable `{name}` at {line}:{col}")]
    UndeclaredVariable { name: String, line: usize, col: usize },

    #[error("duplicate declaration of `{name}`")]
    DuplicateDeclaration { name: String },

    #[error("invalid identifier `{name}`")]
    InvalidIdentifier { name: String },

    #[error("input space of {bits} bits exceeds the capacity of {capacity} bits")]
    CapacityExceeded { bits: u32, capacity: u32 },

    #[error("programs do not share an input domain: {detail}")]
    DomainMismatch { detail: String },

    #[error("invalid distribution: {0}")]
    BadDistribution(String),

    #[error("invalid input valuation: {0}")]
    BadInput(String),

    #[error("the refinement relation holds; no witness distribution exists")]
    RefinementHolds,

    #[error("rename tag must be a nonempty identifier suffix, got `{tag}`")]
    BadRenameTag { tag: String },

    #[error("count {k} out of range for {vars} variables")]
    CountOutOfRange { k: u64, vars: usize },

    #[error("measure `{measure}` is not defined for a fixed distribution")]
    MeasureNeedsNoDist { measure: String },

    #[error("{0}")]
    Usage(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
