use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContestError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("prize ratio below 2 (got {0})")]
    PrizeRatioBelowTwo(f64),

    #[error("root finder did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("unresolvable strategies: {0}")]
    Unresolvable(String),
}

impl ContestError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        ContestError::InvalidParam {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by caller input rather than numerical failure.
    pub fn is_domain(&self) -> bool {
        !matches!(self, ContestError::NonConvergence { .. })
    }
}
