use serde::Serialize;
use thiserror::Error;

/// A runtime assertion inside one of the injection constructions failed.
///
/// The witness is everything needed to replay the failing case; verifiers
/// collect these instead of aborting.
#[derive(Debug, Clone, PartialEq, Serialize, Error)]
#[error("proof gap in {construction}: {message}")]
pub struct ProofGapError {
    pub construction: String,
    pub message: String,
    pub witness: serde_json::Value,
}

impl ProofGapError {
    pub fn new(
        construction: impl Into<String>,
        message: impl Into<String>,
        witness: serde_json::Value,
    ) -> Self {
        ProofGapError {
            construction: construction.into(),
            message: message.into(),
            witness,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("not a permutation: {0}")]
    NotAPermutation(String),
    #[error("invalid position {position} for a permutation of length {len}")]
    InvalidPosition { position: usize, len: usize },
    #[error("positions must be strictly increasing: {0:?}")]
    NotIncreasing(Vec<usize>),
    #[error("duplicate insertion key")]
    DuplicateKey,
    #[error("insertion key collides with existing value {0}")]
    KeyCollision(u32),
    #[error("operation requires a nonempty permutation")]
    EmptyPermutation,
    #[error("pattern too short: {0}")]
    PatternTooShort(String),
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("not in the image of the injection: {0}")]
    NotInImage(String),
    #[error(transparent)]
    ProofGap(#[from] ProofGapError),
    #[error("enumeration node budget of {0} exceeded")]
    BudgetExceeded(u64),
    #[error("n = {n} exceeds the enumeration limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("exact division left a remainder: {0}")]
    InexactDivision(String),
    #[error("series error: {0}")]
    Series(String),
    #[error("cache error: {0}")]
    Cache(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
