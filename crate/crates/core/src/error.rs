use thiserror::Error;

/// Errors produced by sample generation, statistic evaluation and the
/// experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Configuration rejected before any work was done.
    #[error("invalid configuration: {0}")]
    BadConfig(String),

    /// The sample is shorter than the number of blocks requires.
    #[error("sample of length {m} is too small (need at least {need})")]
    InsufficientSample { m: usize, need: usize },

    /// Every centered block sum vanished, so the statistic's denominator
    /// is zero (constant data, for example).
    #[error("degenerate sample: all centered block sums are zero")]
    DegenerateSample,

    /// A numeric argument fell outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A data file line that is neither a comment nor a finite real.
    #[error("{path}:{line}: cannot parse {content:?} as a finite real")]
    ParseLine {
        path: String,
        line: usize,
        content: String,
    },

    /// Too few usable cells for the Type-II decay fit.
    #[error("decay fit needs at least 3 cells with type2 in (0,1), found {0}")]
    Fit(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
