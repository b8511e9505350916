use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("hop {hop}: transmit power must be positive and finite, got {power}")]
    NonPositivePower { hop: usize, power: f64 },

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("quadrature did not converge after {panels} panels: estimate {estimate:e}, error {error:e}")]
    Quadrature { estimate: f64, error: f64, panels: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("inner convex solver failed: {0}")]
    InnerSolver(String),

    #[error("route enumeration limited to {max_nodes} nodes, instance has {nodes}")]
    TooManyNodes { nodes: usize, max_nodes: usize },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
