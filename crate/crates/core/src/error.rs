use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: at least {min} required")]
    InvalidDimension { dim: usize, min: usize },

    #[error(
        "truncation overflow: tail mass {tail:.3e} at dim {dim} exceeds tolerance {tolerance:.1e}"
    )]
    TruncationOverflow {
        tail: f64,
        dim: usize,
        tolerance: f64,
    },

    #[error("operator is not Hermitian: max |M - M^H| = {deviation:.3e}")]
    SymmetryViolation { deviation: f64 },

    #[error("time evolution failed: norm drift {drift:.3e}")]
    IntegrationFailure { drift: f64 },

    #[error("eigensolver residual {residual:.3e} exceeds {tolerance:.1e}")]
    EigenResidual { residual: f64, tolerance: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("coupling g = {g} is at or beyond the critical coupling g_c = {g_c}")]
    BeyondCritical { g: f64, g_c: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("spectra are not aligned: {0}")]
    Alignment(String),

    #[error("phase-space window holds {mass:.6} of the state, need at least {required:.6}")]
    GridCoverage { mass: f64, required: f64 },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by the caller's parameters rather than by the numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidDimension { .. }
                | Error::BeyondCritical { .. }
                | Error::InvalidParameter(_)
                | Error::Resolution(_)
                | Error::Alignment(_)
                | Error::Parse(_)
        )
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
