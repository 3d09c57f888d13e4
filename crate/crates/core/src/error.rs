use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigen-solver did not converge for operator `{operator}`")]
    EigenNonConvergence { operator: String },

    #[error("ill-conditioned resolvent: condition number of I - A is {condition:e}")]
    IllConditionedResolvent { condition: f64 },

    #[error("empty subspace")]
    EmptySubspace,

    #[error("not a frame for W: lower bound {lower:e}, upper bound {upper:e}")]
    NotAFrame { lower: f64, upper: f64 },

    #[error("full-space frame required for two-sample recovery: lower bound {lower:e}, upper bound {upper:e}")]
    FullSpaceFrameRequired { lower: f64, upper: f64 },

    #[error("recoverability condition fails: the stationary adjoint system is not a frame for W (lower {lower:e}, upper {upper:e})")]
    RecoverabilityFails { lower: f64, upper: f64 },

    #[error("data not strongly convergent: tail deviation {deviation:e} exceeds eps {eps:e}")]
    NotStrong { deviation: f64, eps: f64 },

    #[error("finite-N norm on unbounded data")]
    StreamingNorm,

    #[error("divergent trajectory: |x_{step}| = {norm:e}")]
    DivergentTrajectory { step: usize, norm: f64 },

    #[error("matrix exponential failed: {0}")]
    ExpmFailure(String),

    #[error("ill-conditioned linear system (condition {condition:e}); {hint}")]
    IllConditioned { condition: f64, hint: String },

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures caused by floating-point behaviour rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenNonConvergence { .. }
                | Error::IllConditionedResolvent { .. }
                | Error::DivergentTrajectory { .. }
                | Error::ExpmFailure(_)
                | Error::IllConditioned { .. }
                | Error::NonFinite(_)
        )
    }

    /// True when a recoverability (frame) condition is what failed.
    pub fn is_recoverability(&self) -> bool {
        matches!(
            self,
            Error::NotAFrame { .. }
                | Error::FullSpaceFrameRequired { .. }
                | Error::RecoverabilityFails { .. }
                | Error::NotStrong { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
