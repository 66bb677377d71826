use thiserror::Error;

use crate::floating_frame::FrameError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("innovation covariance is singular")]
    SingularInnovation,

    #[error("covariance matrix is singular")]
    SingularCovariance,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(transparent)]
    Frame(#[from] FrameError),

    #[error("swarm needs at least {min} UAVs, got {got}")]
    SwarmTooSmall { min: usize, got: usize },

    #[error("run {run} has {got} steps, expected {expected}")]
    MisalignedRuns {
        run: usize,
        got: usize,
        expected: usize,
    },

    #[error("no runs supplied")]
    NoRuns,

    #[error("neighbor pair set is empty")]
    EmptyPairs,

    #[error("at least {needed} samples required, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
