use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("polynomial is not real-rooted (coefficient residual {residual:e})")]
    NotRealRooted { residual: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e}, norm {norm:e})")]
    NotPsd { min_eigenvalue: f64, norm: f64 },

    #[error("non-finite state at t = {time}: {what}")]
    NonFinite { time: f64, what: String },

    #[error("construction invariant broken at t = {time}: {what}")]
    Construction { time: f64, what: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// True for failures raised while integrating a path, as opposed to
    /// bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotRealRooted { .. }
                | Error::NotPsd { .. }
                | Error::NonFinite { .. }
                | Error::Construction { .. }
        )
    }
}
