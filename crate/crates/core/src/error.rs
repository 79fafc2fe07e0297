use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid function description: {0}")]
    InvalidSpec(String),

    #[error("root finding did not converge for {spec} after {iterations} iterations")]
    RootFinding { spec: String, iterations: usize },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("{0} is not supported for this function kind")]
    Unsupported(&'static str),

    #[error("point {0} is not a fixed point of the map (residual {1:.3e})")]
    NotAFixedPoint(num_complex::Complex64, f64),

    #[error("curve rejected: {0}")]
    Curve(String),

    #[error("winding computation rejected: {0}")]
    Winding(String),

    #[error("preimage continuation ambiguous: {0}")]
    Continuation(String),

    #[error("configuration does not satisfy the fixed-point-count hypotheses: {0}")]
    Configuration(String),
}

pub type Result<T> = std::result::Result<T, Error>;
