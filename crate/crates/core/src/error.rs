use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode index {mode} out of range for k = {k}")]
    ModeOutOfRange { mode: usize, k: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid marginal: {0}")]
    InvalidMarginal(String),

    #[error("tensor is not normalized (total mass {mass})")]
    NotNormalized { mass: f64 },

    #[error("size cap exceeded: {entries} entries requested, cap is {cap}")]
    CapExceeded { entries: f64, cap: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("expected a {expected} cost, got {found}")]
    WrongFamily { expected: &'static str, found: &'static str },

    #[error("set function is not submodular")]
    NotSubmodular,

    #[error("clause {index} has width {width}; only widths 1 and 2 are allowed")]
    ClauseWidth { index: usize, width: usize },

    #[error("edge joins two vertices of class {class}")]
    EdgeWithinClass { class: usize },

    #[error("linear program is infeasible: {0}")]
    Infeasible(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
