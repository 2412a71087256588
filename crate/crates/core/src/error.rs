use thiserror::Error;

use crate::dyadic::DyadicCube;

/// Errors produced by the geometric, arithmetic and construction routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("mixed exact and float scalars in one computation")]
    MixedBackend,
    #[error("empty point set")]
    EmptySet,
    #[error("coincident points: {0}")]
    CoincidentPoints(String),
    #[error("expected {expected} points, got {found}")]
    WrongPointCount { expected: usize, found: usize },
    #[error("invalid rational {0:?}")]
    ParseRational(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("enumeration cap exceeded: {requested} > {cap}")]
    CapExceeded { requested: u128, cap: u128 },
    #[error("operation requires exact rational coordinates")]
    ExactRequired,
    #[error("retry budget exhausted at cube {cube:?}, best gap {best_gap:e}")]
    RetriesExhausted { cube: DyadicCube, best_gap: f64 },
    #[error("constraint violated by tuple {tuple:?} (gap {gap:e})")]
    ConstraintViolated { tuple: Vec<usize>, gap: f64 },
    #[error("witness search exhausted scheme depth in cube {0:?}")]
    WitnessExhausted(DyadicCube),
    #[error("malformed scheme: {0}")]
    MalformedScheme(String),
    #[error("postcondition failed: {0}")]
    Postcondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
