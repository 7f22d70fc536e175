use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("jet order exceeded: need {needed}, have {available}")]
    OrderExceeded { needed: usize, available: usize },
    #[error("division by a jet with vanishing constant term")]
    DivByZeroJet,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate metric: pivot {pivot:e} below floor")]
    DegenerateMetric { pivot: f64 },
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("invalid signature (n={n}, r={r})")]
    InvalidSignature { n: usize, r: usize },
    #[error("clifford construction failed: {0}")]
    Construction(String),
    #[error("spinor length below floor: |(phi,phi)| = {0:e}")]
    ZeroLength(f64),
    #[error("spinor length changes sign on the grid")]
    SignChange,
    #[error("non-admissible parameters: {0}")]
    NonAdmissible(String),
    #[error("trace of beta must equal the dimension, found {0}")]
    BadBetaTrace(f64),
    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),
    #[error("non-positive warping: {0}")]
    NonPositiveWarping(String),
    #[error("not a solution: {0}")]
    NotASolution(String),
    #[error("grid too coarse: refinement changed {name} by {change:e}")]
    GridTooCoarse { name: String, change: f64 },
    #[error("unknown fixture '{0}'")]
    UnknownFixture(String),
    #[error("invalid fixture: {0}")]
    InvalidFixture(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
