use num_complex::Complex64;
use thiserror::Error;

/// Which admissibility condition on a parameter pair failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// `Re α + Re β > -1` does not hold.
    RealPartSum,
    /// `α` is a negative integer.
    AlphaNegativeInteger,
    /// `β` is a negative integer.
    BetaNegativeInteger,
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Condition::RealPartSum => write!(f, "Re(alpha) + Re(beta) > -1"),
            Condition::AlphaNegativeInteger => write!(f, "alpha not in {{-1, -2, ...}}"),
            Condition::BetaNegativeInteger => write!(f, "beta not in {{-1, -2, ...}}"),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("gamma function pole at z = {0}")]
    GammaPole(Complex64),

    #[error("hypergeometric parameter c = {0} is a non-positive integer")]
    InvalidHypParam(Complex64),

    #[error("hypergeometric series diverges at x = 1: Re(c - a - b) = {0} <= 0")]
    Divergent(f64),

    #[error("argument {0} outside [0, 1]")]
    Domain(f64),

    #[error("series did not converge within {0} terms")]
    SlowConvergence(usize),

    #[error("parameter condition violated on axis {axis}: {condition}")]
    ConditionViolated { axis: usize, condition: Condition },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("radius {radius} on axis {axis} is too close to the boundary")]
    NearBoundary { axis: usize, radius: f64 },

    #[error("radius {radius} on axis {axis} outside [0, 1)")]
    RadiusOutOfRange { axis: usize, radius: f64 },

    #[error("radial restriction violated: ratio {ratio} exceeds B = {bound}")]
    RestrictionViolated { ratio: f64, bound: f64 },

    #[error("invalid approach profile: {0}")]
    InvalidProfile(String),

    #[error("aliasing: spectral content {0:e} at the grid Nyquist band")]
    Aliasing(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("multi-index is not pure: p = {p:?}, q = {q:?}")]
    NotPure { p: Vec<u32>, q: Vec<u32> },

    #[error("bound violated: {0}")]
    BoundViolated(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
