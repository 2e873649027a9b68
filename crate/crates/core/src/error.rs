use std::fmt;

use crate::kinetic::SubsystemId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("`{field}` out of range: {message}")]
    OutOfRange { field: String, message: String },

    #[error("bracket failure: predicate does not change across [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("degenerate denominator: {value} is below {eps}")]
    DegenerateDenominator { value: f64, eps: f64 },

    #[error(transparent)]
    Integration(#[from] IntegrationDiagnostic),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn out_of_range(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::OutOfRange {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// What went wrong during a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    /// Smallest entry fell below the positivity floor.
    Negative { min_entry: f64 },
    /// Total mass drifted away from one.
    MassDrift { mass: f64 },
}

/// Integration failure, carrying the offending subsystem and step index.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct IntegrationDiagnostic {
    pub subsystem: SubsystemId,
    pub step: usize,
    pub t: f64,
    pub violation: Violation,
}

impl fmt::Display for IntegrationDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "integration diagnostic at step {} (t = {}) in subsystem {}: ",
            self.step, self.t, self.subsystem
        )?;
        match self.violation {
            Violation::Negative { min_entry } => {
                write!(f, "negative mass {min_entry:e}")
            }
            Violation::MassDrift { mass } => {
                write!(f, "total mass {mass} drifted from 1 by {:e}", mass - 1.0)
            }
        }
    }
}
