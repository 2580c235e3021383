use thiserror::Error;

/// Errors raised by the geometry kernel, the solver and the checks built on top of them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("polygon is not convex: reflex turn at vertex {vertex}")]
    NonConvex { vertex: usize },
    #[error("degenerate polygon: {0}")]
    Degenerate(String),
    #[error("direction vector has zero length")]
    ZeroDirection,
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("profile grid too coarse: {0} < 64 intervals")]
    GridTooCoarse(usize),
    #[error("inequality `{inequality}` violated at {location} (slack {slack:e})")]
    ViolationFound {
        inequality: String,
        location: String,
        slack: f64,
    },
    #[error("exponent p must satisfy {expected}, got {p}")]
    BadExponent { p: f64, expected: &'static str },
    #[error("weight must be positive at the boundary, f(0) = {0}")]
    ZeroWeightAtOrigin(f64),
    #[error("mesh too fine: {0} nodes exceeds the 2e6 limit")]
    TooFine(usize),
    #[error("solver did not converge after {iterations} iterations (gradient norm {grad_norm:e})")]
    NoConvergence { iterations: usize, grad_norm: f64 },
    #[error("refinement sequence is not monotone: {0:?}")]
    NonMonotoneConvergence(Vec<f64>),
    #[error("enclosing rectangle misses vertex {vertex} by {excess:e}")]
    ContainmentFailure { vertex: usize, excess: f64 },
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("random body generator rejected {0} consecutive samples")]
    RejectionOverflow(usize),
    #[error("io error: {0}")]
    Io(String),
    #[error("invalid shape descriptor: {0}")]
    Descriptor(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Descriptor(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
