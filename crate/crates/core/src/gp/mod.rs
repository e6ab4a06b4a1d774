//! Gaussian-process regression with fixed hyperparameters.
//!
//! The kernel is squared exponential over the control parameters, optionally
//! multiplied by a unit-amplitude squared-exponential factor over context
//! coordinates. Observations are centered by the constant prior mean before
//! solving, so a model without data returns `(K, θ)` everywhere.

mod kernel;
mod model;

pub use kernel::{kernel_eval, KernelSpec, NOISE_VARIANCE_FLOOR};
pub use model::{join_input, BatchPosterior, GpModel, Observation, Posterior};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("observation has no context but the kernel expects {expected} context coordinate(s)")]
    MissingContext { expected: usize },
    #[error("invalid kernel parameters: {0}")]
    InvalidSpec(String),
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("Gram matrix is not positive definite at row {index} (pivot {pivot:e})")]
    Singular { index: usize, pivot: f64 },
}
