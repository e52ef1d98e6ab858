use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid of {required} points exceeds the limit of {limit}")]
    GridTooLarge { required: u64, limit: u64 },
    #[error("wavefunctions live on different grids")]
    GridMismatch,
    #[error("norm drift {drift:e} at t = {t} exceeds {limit:e}; reduce dt or widen the grid")]
    NormDrift { drift: f64, t: f64, limit: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("did not converge: {0}")]
    NonConvergence(String),
    #[error("target {target:e} is infeasible; bound floor is {floor:e}")]
    Infeasible { target: f64, floor: f64 },
}

impl Error {
    /// Short stable identifier, used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::GridTooLarge { .. } => "grid_too_large",
            Error::GridMismatch => "grid_mismatch",
            Error::NormDrift { .. } => "norm_drift",
            Error::Domain(_) => "domain",
            Error::NonConvergence(_) => "non_convergence",
            Error::Infeasible { .. } => "infeasible",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
