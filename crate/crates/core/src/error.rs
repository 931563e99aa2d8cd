use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("factor index {index} out of range for a space with {count} factors")]
    FactorOutOfRange { index: usize, count: usize },

    #[error("margin {margin} leaves an empty interior")]
    EmptyInterior { margin: usize },

    #[error("empty truncation window")]
    EmptyWindow,

    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("pole: {what} (|value| = {value:.3e})")]
    Pole { what: &'static str, value: f64 },

    #[error("label {0} is outside the truncation window")]
    OutOfWindow(String),

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("generator `{0}` is not defined on this module")]
    MissingGenerator(&'static str),

    #[error("fusion coefficient A_j degenerates at j = {j}")]
    DegenerateFusion { j: i64 },

    #[error("defect intertwiner case {case} requires {needs}")]
    CaseMismatch { case: &'static str, needs: &'static str },

    #[error("gauge is singular at j = {j}")]
    SingularGauge { j: i64 },

    #[error("series failed to converge after {terms} terms (last term {last:.3e})")]
    Convergence { terms: usize, last: f64 },

    #[error("matrix is singular: {0}")]
    Singular(&'static str),

    #[error("no nonzero intertwiner found (smallest singular value {smallest:.3e})")]
    NoIntertwiner { smallest: f64 },

    #[error("coefficient matching failed with residual {residual:.3e}")]
    Matching { residual: f64 },

    #[error("malformed matrix JSON: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
