use thiserror::Error;

/// Invalid games, strategies or profiles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("matrix or strategy has no entries")]
    Empty,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("ragged input at line {line}: expected {expected} values, found {found}")]
    Ragged {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("payoff {value} at ({row}, {col}) is outside [0, 1]; normalize the matrix first")]
    OutOfRange { row: usize, col: usize, value: f64 },
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Malformed linear programs and solver breakdowns.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("simplex pivot limit of {0} reached")]
    PivotLimit(usize),
    #[error("direction LP ended with status {0:?}")]
    UnexpectedStatus(crate::lp::LpStatus),
}

/// Failures of a descent or baseline solve.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Errors from reading or writing matrices, profiles, traces and configs.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Problems that stop a benchmark before any cell runs.
#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid benchmark configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] IoError),
}
