use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A scalar argument outside the domain of a function (e.g. `digamma(-1)`).
    #[error("{what}: argument {value} outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    /// An iterative procedure ran out of budget. `estimate` is the best value reached.
    #[error("{what} did not converge: best estimate {estimate:e}, achieved error {achieved:e}")]
    Convergence {
        what: &'static str,
        estimate: f64,
        achieved: f64,
    },

    #[error("non-finite integrand value {value} at x = {x:e}")]
    Evaluation { x: f64, value: f64 },

    /// Factorization hit a pivot below the singularity threshold.
    #[error("matrix is numerically singular: pivot {index} has magnitude {magnitude:e}")]
    Singular { index: usize, magnitude: f64 },

    #[error("bracket [{a}, {b}] does not isolate a maximum: {reason}")]
    Bracket { a: f64, b: f64, reason: String },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// Argument and domain errors are caller mistakes; everything else is numerical.
    pub fn is_argument_error(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. } | Error::Argument(_) | Error::Bracket { .. }
        )
    }
}
