use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{op}: argument {value} outside the domain {domain}")]
    Domain {
        op: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("length mismatch: {lambdas} means but {counts} counts")]
    LengthMismatch { lambdas: usize, counts: usize },

    #[error("unknown detector `{0}`")]
    UnknownDetector(String),

    #[error("count {count} at index {index} has zero probability under every mixture component")]
    ImpossibleCount { index: usize, count: u64 },

    #[error("calibration fingerprint {found} does not match the model's null fingerprint {expected}")]
    FingerprintMismatch { expected: String, found: String },

    #[error("file was written by format version {found}, this build reads version {expected}")]
    VersionMismatch { expected: String, found: String },

    #[error("checksum mismatch: stored {stored}, computed {computed}")]
    Checksum { stored: String, computed: String },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
