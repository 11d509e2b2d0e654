use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Bad or inconsistent configuration. `field` names the offending key.
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("pole of B(s) hit at s = {s}")]
    PoleHit { s: Complex64 },

    #[error("{what} failed to converge at {at}")]
    NonConvergence { what: &'static str, at: Complex64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Integration ray passes within one grid cell of the pole of the integrand.
    #[error("near-singular quadrature at s = {s}")]
    NearSingular { s: Complex64 },

    #[error("contour error: {0}")]
    Contour(String),

    #[error("step too large: error estimate {estimate:.3e} exceeds {limit:.1e}; refine the grid")]
    Refinement { estimate: f64, limit: f64 },

    #[error("degenerate trace: {0}")]
    DegenerateTrace(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Support truncation of the discretized bath.
    #[error("bath support captures only {captured:.5} of the total weight")]
    Truncation { captured: f64 },

    #[error("long-time rate not converged: doubling tau changed it by {relative_change:.3}")]
    NotConverged { relative_change: f64 },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
