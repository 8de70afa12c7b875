use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped by how the CLI maps them to exit codes: validation
/// problems (bad parameters, states, profiles, config files) are usage
/// errors, everything else reports a numerical failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(
        "quadrature did not reach relative tolerance {rel_tol:e} within {budget} subdivisions \
         (estimate so far {estimate:e})"
    )]
    QuadratureBudget {
        rel_tol: f64,
        budget: usize,
        estimate: f64,
    },

    #[error(
        "CHSH guardrail tripped during {location}: |{value}| exceeds 2*sqrt(2) + {slack:e}; \
         the assembly admits no such value, aborting"
    )]
    Guardrail {
        value: f64,
        slack: f64,
        location: String,
    },
}

impl Error {
    /// True for errors caused by caller-supplied data rather than numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::InvalidState(_)
                | Error::InvalidProfile(_)
                | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
