//! Error type shared across the simulator.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// The DCF fixed-point solver stopped before reaching its residual target.
    #[error(
        "DCF fixed point did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    DcfNoConvergence { iterations: usize, residual: f64 },

    /// The allocation solver hit its iteration cap.
    #[error(
        "allocation solver did not converge after {iterations} iterations \
         (primal residuals {primal_l:.3e}/{primal_u:.3e}, stationarity {stationarity:.3e})"
    )]
    SolverNoConvergence {
        iterations: usize,
        primal_l: f64,
        primal_u: f64,
        stationarity: f64,
    },

    /// Allocation inputs that admit no meaningful optimum.
    #[error("degenerate allocation input: {0}")]
    DegenerateInput(String),

    /// Scenario configuration problems, keyed by the offending entry.
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    /// A solver error that surfaced while running a specific QSI.
    #[error("QSI {qsi}: {source}")]
    AtQsi {
        qsi: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn at_qsi(self, qsi: usize) -> Self {
        Error::AtQsi {
            qsi,
            source: Box::new(self),
        }
    }
}
