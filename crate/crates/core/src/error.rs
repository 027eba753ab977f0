//! Error type shared by the whole library.
//!
//! Two channels are distinguished: ordinary contract violations (bad inputs,
//! mismatched dimensions) and *tripwires*. A tripwire fires when two
//! independent computations of the same quantity disagree, or when an exactness
//! assertion fails; it always indicates an implementation bug, never a bad
//! input, so callers should treat it as fatal.

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("series not invertible (constant term is not an invertible scalar)")]
    SeriesNotInvertible,

    #[error("series composition requires inner series with zero constant term")]
    SeriesCompose,

    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("weight mismatch: |lambda| = {0} but |mu| = {1}")]
    WeightMismatch(usize, usize),

    #[error("inconsistent linear system: equation {row} is violated by the fitted solution")]
    InconsistentSystem { row: usize },

    #[error("linear system is rank deficient: {0}")]
    RankDeficient(String),

    #[error("truncation window too small: {0}; enlarge truncation")]
    WindowOverflow(String),

    #[error("bounds: {0}")]
    Bounds(String),

    #[error("nondegeneracy search exhausted at m = {limit}: partitions {lhs} and {rhs} of weight {weight} not separated")]
    MStarExhausted {
        weight: usize,
        limit: i64,
        lhs: String,
        rhs: String,
    },

    #[error("tripwire: {0}")]
    Tripwire(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Build a tripwire error from format arguments.
#[macro_export]
macro_rules! tripwire {
    ($($arg:tt)*) => {
        $crate::error::Error::Tripwire(format!($($arg)*))
    };
}
