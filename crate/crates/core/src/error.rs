use thiserror::Error;

/// Every failure the benchmark can report.
///
/// Variants map onto the CLI exit codes through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("split error: {0}")]
    Split(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("ensemble error: {0}")]
    Ensemble(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("zero denominator: {0}")]
    Denominator(String),
    #[error("window error: {0}")]
    Window(String),
    #[error("sample error: {0}")]
    Sample(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("order error: {0}")]
    Order(String),
    #[error("leakage detected: {0}")]
    Leakage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code: 2 input error, 3 leakage abort, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Leakage(_) => 3,
            Error::Numerical(_) | Error::Fit(_) | Error::Ensemble(_) | Error::Denominator(_) => 4,
            _ => 2,
        }
    }
}
