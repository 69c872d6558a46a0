use thiserror::Error;

/// Errors raised anywhere in the reconstruction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point ({x}, {y}) does not lie on the boundary of the unit square")]
    NotOnBoundary { x: f64, y: f64 },

    #[error("iterative solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("matrix is singular to working precision (pivot {pivot} at column {column})")]
    Singular { column: usize, pivot: f64 },

    #[error("Robin coefficient must be positive on the boundary (sampled minimum {min:e})")]
    NonPositiveRobin { min: f64 },

    #[error("mesh mismatch: expected N = {expected}, found N = {found}")]
    MeshMismatch { expected: usize, found: usize },

    #[error("meshes are not nested: N_fine = {fine} is not a multiple k >= 2 of N_coarse = {coarse}")]
    NotNested { fine: usize, coarse: usize },

    #[error("unknown registry entry `{0}`")]
    UnknownRegistry(String),

    #[error("singular Jacobian at Newton iteration {iteration}")]
    SingularJacobian { iteration: usize },

    #[error("line search exhausted {max_backtracks} backtracks at Newton iteration {iteration}")]
    BacktrackExhausted { iteration: usize, max_backtracks: usize },

    #[error("trace too short: need {needed} usable iterations, have {available}")]
    InsufficientTrace { needed: usize, available: usize },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("field file error: {0}")]
    FieldFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
