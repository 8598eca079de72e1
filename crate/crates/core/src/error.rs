use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("point {x} lies outside the mesh interval [{a}, {b}]")]
    Domain { x: f64, a: f64, b: f64 },

    #[error("factorization failed: singular pivot at index {index}")]
    SingularPivot { index: usize },

    #[error("relaxation failed at t = {t}: {reason}")]
    Relaxation { t: f64, reason: String },

    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("peak tracking lost: no sign change of dH/dx in [{lo}, {hi}]")]
    TrackingLost { lo: f64, hi: f64 },

    #[error("Petviashvili iteration did not converge in {iterations} iterations (last residual {last:e})")]
    NonConvergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("Petviashvili stabilizing factor is degenerate (denominator {denominator:e})")]
    Degenerate { denominator: f64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics (step size, iteration limits, solver
    /// breakdown) as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularPivot { .. }
                | Error::Relaxation { .. }
                | Error::NonFinite { .. }
                | Error::TrackingLost { .. }
                | Error::NonConvergence { .. }
                | Error::Degenerate { .. }
        )
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
