use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed index pairing for label `{label}`: {reason}")]
    MalformedIndex { label: String, reason: String },
    #[error("index space mismatch between `{0}` and `{1}`")]
    SpaceMismatch(String, String),
    #[error("label `{0}` is not free in the expression")]
    NotFree(String),
    #[error("parity-violating binding for `{0}`")]
    ParityViolation(String),
    #[error("cannot evaluate numerically: {0}")]
    Evaluation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("wrong leg kinds: {0}")]
    WrongLegKinds(String),
    #[error("malformed graph: {0}")]
    MalformedGraph(String),
    #[error("unsupported case: {0}")]
    Unsupported(String),
    #[error("covariant-form identity violated: {0}")]
    CovariantForm(String),
    #[error("negative matter count for {0}")]
    NegativeCount(String),
    #[error("unknown atom species `{0}`")]
    UnknownSpecies(String),
}

pub type Result<T> = std::result::Result<T, Error>;
