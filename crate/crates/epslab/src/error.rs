//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by grid construction, operator assembly, and solves.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value sampled at node {index}")]
    NonFiniteSample { index: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid nonlinearity: {0}")]
    InvalidNonlinearity(String),

    #[error("nonlinearity overflow at u = {u}")]
    Overflow { u: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("potential has unbounded sup-norm; use the full-Green resolvent path")]
    UnboundedPotential,

    #[error("operation requires a periodic grid")]
    PeriodicGridRequired,

    #[error("operation requires a Dirichlet grid")]
    DirichletGridRequired,

    #[error("a contraction certificate is required for this operation")]
    CertificateRequired,

    #[error("linear solve stalled: relative residual {residual:.3e} after {iterations} iterations")]
    LinearSolveStall { residual: f64, iterations: usize },

    #[error("pointwise root solve failed at {failed} of {total} nodes (first at node {first})")]
    RootSolveFailure {
        failed: usize,
        total: usize,
        first: usize,
    },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

pub type Result<T> = std::result::Result<T, Error>;
