use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),
    #[error("unknown root datum label `{0}`")]
    UnknownLabel(String),
    #[error("elements belong to different root data")]
    MismatchedData,
    #[error("elements {0} and {1} lie in different Omega-cosets")]
    Incomparable(String, String),
    #[error("conjugation datum search exhausted up to length {0}")]
    SearchExhausted(usize),
    #[error("degenerate realization at generator {generator}: {reason}")]
    Degenerate { generator: String, reason: String },
    #[error("inexact division: {0}")]
    InexactDivision(String),
    #[error("stalk at {0} is not free")]
    NotFree(String),
    #[error("hom degree {0} outside scan window")]
    WindowExceeded(i32),
    #[error("possibly indecomposable with non-split End0: {0}")]
    NonSplit(String),
    #[error("computation failed: {0}")]
    Computation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
