use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("degree {0} exceeds the supported maximum of 2^20")]
    DegreeTooLarge(usize),
    #[error("group is not transitive; split by orbits first")]
    NotTransitive,
    #[error("configuration violates axiom ({axiom}): {detail}")]
    Axiom { axiom: &'static str, detail: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("step budget exhausted after {0} steps")]
    Budget(u64),
    #[error("local object on {0:?} is full")]
    FullSet(Vec<usize>),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
