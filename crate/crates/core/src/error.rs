//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by Gaussian-process training and prediction.
#[derive(Debug, Error)]
pub enum GpError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty training set")]
    EmptyData,

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),

    #[error("factorization failed after jitter escalation (tried {attempted:?})")]
    Factorization { attempted: Vec<f64> },

    #[error("metric variant not supported for this operation: {0}")]
    NotImplemented(&'static str),
}

/// Errors produced by grid construction and planning.
#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite coordinate passed to interpolation")]
    NonFiniteQuery,

    #[error("successor oracle failed at node {node}, action {action}: {source}")]
    Oracle {
        node: usize,
        action: usize,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },

    #[error(
        "value iteration diverging: sup-norm change {delta:.3e} grew 10x above initial {initial:.3e} for {sweeps} consecutive sweeps"
    )]
    Divergence {
        delta: f64,
        initial: f64,
        sweeps: usize,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// Errors produced by the online agent loop.
#[derive(Debug, Error)]
pub enum AgentError {
    #[error("configuration inconsistent with environment: {0}")]
    BadConfig(String),

    #[error(transparent)]
    Planner(#[from] PlannerError),

    #[error(transparent)]
    Gp(#[from] GpError),
}
