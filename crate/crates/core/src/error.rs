use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("logarithm undefined at {0}")]
    LogDomain(String),
    #[error("invalid Möbius coefficient: {0}")]
    MobiusCoefficient(String),
    #[error("invalid family parameters: {0}")]
    InvalidParams(String),
    #[error("point at infinity is an essential singularity")]
    EssentialSingularity,
    #[error("value {0} is omitted by the family")]
    OmittedValue(String),
    #[error("Newton iteration failed to converge: {0}")]
    NoConvergence(String),
    #[error("a seed value is required: {0}")]
    MissingSeed(&'static str),
    #[error("marked index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("winding curve endpoints invalid: {0}")]
    WindingEndpoints(String),
    #[error("marked points collided (gap {gap:e})")]
    Collision { gap: f64 },
    #[error("invalid portrait: {}", .0.join("; "))]
    InvalidPortrait(Vec<String>),
    #[error("invalid quadratic differential: {0}")]
    InvalidDifferential(String),
    #[error("quadrature did not reach relative error {target:e} (estimate {achieved:e})")]
    Quadrature { target: f64, achieved: f64 },
    #[error("oracle found no solution matching the portrait ({converged} starts converged)")]
    OracleNoMatch { converged: usize },
    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;
