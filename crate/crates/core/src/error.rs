use thiserror::Error;

/// Errors raised by the array, channel, beamforming and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("zero-forcing needs fewer interferers than antennas ({interferers} interferers, {antennas} antennas)")]
    ZfDimension { interferers: usize, antennas: usize },

    #[error("interference matrix of user {user} is singular or ill-conditioned (condition estimate {condition:.3e})")]
    SingularInterference { user: usize, condition: f64 },

    #[error("matrix is singular or ill-conditioned (condition estimate {condition:.3e})")]
    SingularMatrix { condition: f64 },

    #[error("no crossover: discriminant {discriminant:.6e} is negative for eta = {eta}, M = {elements}, alpha = {alpha}")]
    NoCrossover {
        eta: f64,
        elements: usize,
        alpha: f64,
        discriminant: f64,
    },

    #[error("series I/O: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures caused by numerics (singularities, missing crossover) rather than input validation.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularInterference { .. }
                | Error::SingularMatrix { .. }
                | Error::NoCrossover { .. }
                | Error::DegenerateChannel(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
