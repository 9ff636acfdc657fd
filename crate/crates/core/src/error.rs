use thiserror::Error;

/// Errors raised by the simulation and reconstruction pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("operation requires a bipartition (d_A, d_B) on the state")]
    MissingPartition,

    #[error("channel is not unital (deviation {deviation:.3e}); only unital maps are supported")]
    NotUnital { deviation: f64 },

    #[error("integrator accuracy: trace drift {drift:.3e} exceeds 1e-6")]
    IntegratorAccuracy { drift: f64 },

    #[error("endpoint map is not completely positive: Choi eigenvalue {min_eigenvalue:.3e}")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("outcome {outcome} has zero initial probability but nonzero forward mass {mass:.3e}")]
    InconsistentOutcome { outcome: usize, mass: f64 },

    #[error("post-measurement state does not factorize (deviation {deviation:.3e})")]
    NotProduct { deviation: f64 },

    #[error("bipartite observables missing from protocol")]
    MissingBipartiteObservables,

    #[error("degenerate parameter interval [{min}, {max}]")]
    DegenerateInterval { min: f64, max: f64 },

    #[error("parameter grid has coincident nodes; Vandermonde matrix is singular")]
    CoincidentNodes,

    #[error("support values {0} and {1} coincide within 1e-10; merge them first")]
    DegenerateSupport(f64, f64),

    #[error("supports do not align: {0}")]
    SupportMismatch(String),

    #[error("reconstruction failed: {0}")]
    ReconstructionFailure(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
