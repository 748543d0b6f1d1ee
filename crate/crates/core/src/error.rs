use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("malformed rational `{0}`")]
    Rational(String),
    #[error("malformed polynomial record: {0}")]
    Record(String),
    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for ParseError {
    fn from(e: serde_json::Error) -> Self {
        ParseError::Json(e.to_string())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("invalid compact set: {0}")]
    InvalidCompactSet(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("potential g is not real-valued")]
    PotentialNotReal,
    #[error("k does not equal the s-derivative of the potential g")]
    PotentialMismatch,
    #[error("internal inconsistency: curvature of basis section {0} is not proportional to it")]
    NotDiagonal(usize),
    #[error("internal inconsistency: curvature eigenvalue {0} disagrees with -(j+1)Δg/2")]
    ClosedFormMismatch(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SplittingError {
    #[error("invalid {m}-splitting: {reason}")]
    Invalid { m: usize, reason: String },
    #[error("correspondence failure at m = {m}, k = {k}: {reason}")]
    Correspondence { m: usize, k: usize, reason: String },
    #[error("classification needs a splitting of m + 1 >= 1")]
    EmptyGroundSet,
    #[error("k = {k} outside the valid range for m = {m}")]
    KOutOfRange { m: usize, k: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExpansionError {
    #[error("direction sequence has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalyticityError {
    #[error("epsilon must lie in (0, 1)")]
    EpsilonOutOfRange,
    #[error("M must exceed 1")]
    MTooSmall,
    #[error("safety factor must be at least 1")]
    BadSafetyFactor,
    #[error("no certificate found on the epsilon ladder")]
    SearchExhausted,
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
}
