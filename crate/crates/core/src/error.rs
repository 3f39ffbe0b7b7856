use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive integration ran out of budget before meeting its tolerance.
    #[error("quadrature did not converge (estimate {estimate:e}, error bound {error_bound:e})")]
    NonConvergence { estimate: f64, error_bound: f64 },

    #[error("configuration error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    /// Conditioning event has (numerically) zero probability.
    #[error("degenerate condition: {0}")]
    DegenerateCondition(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
