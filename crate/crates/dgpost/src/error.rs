use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("complex is not positively graded: nonzero in degree {0}")]
    NotPositivelyGraded(i64),
    #[error("dg category is not positively graded")]
    CategoryNotPositivelyGraded,
    #[error("invalid complex: {0}")]
    InvalidComplex(String),
    #[error("invalid chain map: {0}")]
    InvalidChainMap(String),
    #[error("invalid dg category: {0}")]
    InvalidCategory(String),
    #[error("invalid dg functor: {0}")]
    InvalidFunctor(String),
    #[error("invalid bimodule: {0}")]
    InvalidBimodule(String),
    #[error("degree cap {cap} too small: {why}")]
    CapTooSmall { cap: i64, why: String },
    #[error("hom spaces are not finite-dimensional: {0}")]
    NotFinite(String),
    #[error("invalid attaching cycle for cell {0}")]
    InvalidCycle(String),
    #[error("oracle unavailable: search space {0} exceeds budget {1}")]
    OracleBudget(u128, u128),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
