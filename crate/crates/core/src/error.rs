use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A hypothesis of a closed-form bound is not met.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Argument outside the domain of a function, e.g. a nonpositive Bose gap.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("bisection for eigenvalue #{index} did not converge: bracket [{lo}, {hi}] after {iterations} iterations")]
    EigenNonConvergence {
        index: usize,
        lo: f64,
        hi: f64,
        iterations: usize,
    },

    #[error("chemical potential solve failed: {0}")]
    ChemicalPotential(String),

    /// The computed levels cannot hold the requested density; more levels are needed.
    #[error("truncated spectrum: {0}; compute more levels")]
    Truncation(String),

    #[error("quadratures disagree: adaptive = {adaptive}, fixed-panel = {fixed}")]
    QuadratureDisagreement { adaptive: f64, fixed: f64 },

    #[error("experiment kind mismatch: expected {expected}, config has {found}")]
    KindMismatch { expected: String, found: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures of a numerical routine (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenNonConvergence { .. }
                | Error::ChemicalPotential(_)
                | Error::Truncation(_)
                | Error::QuadratureDisagreement { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
