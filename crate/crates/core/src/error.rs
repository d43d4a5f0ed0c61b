use thiserror::Error;

/// Errors produced anywhere in the relaxation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("undeclared variable `{name}` at line {line}, column {col}")]
    UndeclaredVariable { name: String, line: usize, col: usize },

    #[error("exponent must be a nonnegative integer, found `{found}` at line {line}, column {col}")]
    NonIntegerExponent { found: String, line: usize, col: usize },

    #[error("dimension mismatch: {left} vs {right} variables")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("graph is not chordal under the given elimination order (vertex {vertex})")]
    NotChordal { vertex: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("constraint {constraint} is not covered by any clique: {detail}")]
    CliqueCoverage { constraint: String, detail: String },

    #[error("objective term {term} spans no single clique; add a clique containing its variables")]
    ObjectiveNotCovered { term: String },

    #[error("relaxation order {d} is below the minimum order {d_min}")]
    OrderTooLow { d: usize, d_min: usize },

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("normal equations are numerically singular ({0}); try enabling scaling")]
    SingularSystem(String),

    #[error("SDPA parse error at line {line}: {msg}")]
    Sdpa { line: usize, msg: String },

    #[error("degenerate moment matrix in clique {clique}: constant entry {value:e} too small to normalize")]
    DegenerateNormalization { clique: usize, value: f64 },

    #[error("json error: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
