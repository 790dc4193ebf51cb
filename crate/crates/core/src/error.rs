use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates an operation's precondition.
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    #[error("transition is not stationary: spectral norm {norm} >= 1")]
    NonStationary { norm: f64 },

    #[error("did not converge: {0}")]
    Convergence(String),

    #[error("divergent quantity: {0}")]
    Divergent(String),

    /// A supremum or infinite sum cannot be certified from the available tail information.
    #[error("uncertified: {0}")]
    Uncertified(String),

    #[error("inequality not applicable: {reason}")]
    NotApplicable { reason: String, threshold: Option<f64> },

    #[error("compute budget exceeded: {needed} evaluations requested, budget is {budget}")]
    Budget { needed: u128, budget: u128 },

    #[error("non-finite map output in replication {replication}")]
    NonFinite { replication: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid { field: field.into(), reason: reason.into() }
    }

    /// True for errors caused by the caller's inputs rather than by the computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Invalid { .. }
                | Error::NonStationary { .. }
                | Error::NotApplicable { .. }
                | Error::Budget { .. }
                | Error::Divergent(_)
                | Error::Uncertified(_)
                | Error::Json(_)
        )
    }
}

pub(crate) fn ensure(cond: bool, field: &str, reason: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::invalid(field, reason()))
    }
}
