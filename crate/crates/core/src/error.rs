use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("weights must be nonnegative and finite (atom {index} has weight {weight})")]
    InvalidWeight { index: usize, weight: f64 },
    #[error("weights sum to {sum}, not 1")]
    Unnormalized { sum: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no closed form for this cost pair")]
    NoClosedForm,
    #[error("unsupported cost pair: {0}")]
    UnsupportedCostPair(String),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence(_))
    }
}

pub type Result<T> = core::result::Result<T, Error>;
