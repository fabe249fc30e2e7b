use thiserror::Error;

/// Errors raised by the library.
///
/// Per-cell breakdowns inside an ε-table are not errors; they are recorded
/// in the table itself (see [`crate::epsilon::CellState`]).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("index out of range: term S_{needed} requested but the prefix ends at S_{last}")]
    IndexOutOfRange { needed: usize, last: isize },

    #[error("breakdown: zero denominator at (k={k}, n={n})")]
    Breakdown { k: isize, n: usize },

    #[error("singular linear system at (k={k}, n={n})")]
    SingularSystem { k: usize, n: usize },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("expected {expected} seed values, got {got}")]
    SeedCountMismatch { expected: usize, got: usize },

    #[error("degenerate recurrence: {0}")]
    DegenerateRecurrence(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty input")]
    EmptyFile,

    #[error("i/o error: {0}")]
    Io(String),

    #[error("matrix dimension {0} is too small (need at least 3)")]
    DimensionTooSmall(usize),

    #[error("scalar mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("inadmissible arguments: {0}")]
    Inadmissible(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
