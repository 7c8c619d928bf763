//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by channel construction, allocation solvers and oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("path set is empty")]
    EmptyPaths,

    #[error("two paths share the arrival angle {theta_r}")]
    DuplicateArrivalAngle { theta_r: f64 },

    #[error("angle {value} outside [0, 2*pi)")]
    AngleOutOfRange { value: f64 },

    #[error("invalid array geometry: {reason}")]
    InvalidGeometry { reason: String },

    #[error("invalid link budget: {reason}")]
    InvalidBudget { reason: String },

    #[error("invalid solver config: {reason}")]
    InvalidSolverConfig { reason: String },

    #[error("matrix is not row-sparse; offending rows: {rows:?}")]
    NotRowSparse { rows: Vec<usize> },

    #[error("noise-equivalent list is empty")]
    EmptyNoiseList,

    #[error("noise equivalent must be positive (or +inf), got {value}")]
    InvalidNoiseEquivalent { value: f64 },

    #[error("total power must be positive, got {value}")]
    InvalidTotalPower { value: f64 },

    #[error("no reflectable beam: {side} channel has no entry above tolerance")]
    NoReflectableBeam { side: &'static str },

    #[error("invalid beam indices: {reason}")]
    InvalidBeamIndices { reason: String },

    #[error("invalid surface encoding: {reason}")]
    InvalidEncoding { reason: String },

    #[error("subarray {index} received zero elements at this surface size")]
    SubarrayVanished { index: usize },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("snr list is empty")]
    EmptySnr,

    #[error("snr list must be positive and sorted in descending order")]
    SnrNotDescending,

    #[error("snr values must be positive, got {value}")]
    InvalidSnr { value: f64 },

    #[error("no beams: both direct and reflected sets are empty")]
    NoBeams,

    #[error("grid search supports at most {max} beam pairs, got {got}")]
    GridTooLarge { max: usize, got: usize },

    #[error("grid step {step} outside supported range [{min}, {max}]")]
    GridStepOutOfRange { step: f64, min: f64, max: f64 },

    #[error("capacity surface supports 2 or 3 beam pairs, got {got}")]
    SurfaceDimension { got: usize },

    #[error("multistart search needs at least one start")]
    NoStarts,
}

pub type Result<T> = std::result::Result<T, Error>;
