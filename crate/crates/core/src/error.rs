use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not a prime in [2, 251]")]
    NotPrime(u32),
    #[error("operands belong to different fields (GF({0}) vs GF({1}))")]
    FieldMismatch(u32, u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of zero (bias 0)")]
    LogOfZero,
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("invalid axis set: {0}")]
    InvalidAxisSet(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("expected a tensor of order {expected}, got order {got}")]
    WrongOrder { expected: String, got: usize },
    #[error("enumeration of {needed} candidates exceeds the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index sets overlap")]
    OverlappingSets,
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("degree {got} exceeds the bound {bound}")]
    DegreeTooHigh { got: usize, bound: usize },
    #[error("characteristic {q} must exceed the order {d}")]
    CharacteristicTooSmall { q: u32, d: usize },
    #[error("iterated difference is not multilinear: {0}")]
    NotMultilinear(String),
    #[error("point set is empty")]
    EmptySet,
    #[error("function violates the concentration hypotheses: {0}")]
    HypothesesViolated(String),
    #[error("function is not Boolean")]
    NotBoolean,
    #[error("function is not monotone")]
    NotMonotone,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
