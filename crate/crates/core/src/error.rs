use thiserror::Error;

/// Errors raised by the numerical core and the evaluation harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {estimate:e}, error {error:e})")]
    QuadratureNonConvergence {
        subdivisions: usize,
        estimate: f64,
        error: f64,
    },

    #[error("CDF value {value} is outside [0, 1] beyond the clamping tolerance")]
    CdfOutOfRange { value: f64 },

    /// The combined plausibility does not decay, so the upper limit is +inf.
    #[error("upper limit is unbounded: {reason}")]
    UnboundedLimit { reason: String },

    #[error("enumeration box of {cells} cells exceeds the budget of {budget}")]
    EnumerationTooLarge { cells: u64, budget: u64 },

    #[error("no posterior mass: {0}")]
    NoPosteriorMass(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
