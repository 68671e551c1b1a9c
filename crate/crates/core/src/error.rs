//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An operation received a value outside its contract (non-finite,
    /// out-of-range index, negative force, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Key/value config file problems: unknown key, bad number, duplicate.
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    /// A calibration axis had no usable signal.
    #[error("calibration degenerate on axis {axis}: all weighted sums are zero")]
    DegenerateAxis { axis: char },

    /// Training diverged (loss became non-finite).
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize },

    /// The admittance loop failed to settle within the step budget.
    #[error("loop did not converge: {0}")]
    NotConverged(String),

    /// Malformed structured data (CSV rows, maze files, model containers).
    #[error("parse error: {0}")]
    Parse(String),

    /// Model container failed its integrity check.
    #[error("model file corrupt: {0}")]
    Corrupt(String),

    /// Exploration produced a state that the simulation forbids.
    #[error("simulation integrity violated: {0}")]
    Integrity(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable category, used for CLI exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::Config { .. } => "config",
            Error::DegenerateAxis { .. } => "calibration",
            Error::Diverged { .. } => "training",
            Error::NotConverged(_) => "convergence",
            Error::Parse(_) => "parse",
            Error::Corrupt(_) => "corrupt",
            Error::Integrity(_) => "integrity",
            Error::Io(_) => "io",
        }
    }
}
