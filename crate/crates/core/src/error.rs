use std::path::PathBuf;

use thiserror::Error;

use crate::schema::FunctionType;

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema config is not valid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("unknown function `{0}` in schema config")]
    UnknownFunction(String),
    #[error("registry for {0} is missing")]
    MissingRegistry(FunctionType),
    #[error("enumeration key `{0}` must look like `<Function>.<Key>`")]
    BadEnumerationKey(String),
    #[error("enumeration `{0}` refers to a key outside the {1} registry")]
    EnumerationOutsideRegistry(String, FunctionType),
    #[error("alias `{alias}` points at unknown key `{target}`")]
    DanglingAlias { alias: String, target: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown function label `{0}`")]
pub struct UnknownFunction(pub String);

#[derive(Debug, Error, PartialEq)]
pub enum AssignmentError {
    #[error("cost matrix entry ({row}, {col}) is not finite: {value}")]
    NonFiniteEntry { row: usize, col: usize, value: f64 },
    #[error("cost matrix entry ({row}, {col}) is negative: {value}")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("cost matrix row {row} has {found} columns, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("sigma2 must be > 0, got {0}")]
    Sigma2NotPositive(f64),
    #[error("sigma1 must be >= 0, got {0}")]
    Sigma1Negative(f64),
    #[error("sigma3 must lie in [0, 1], got {0}")]
    Sigma3OutOfRange(f64),
    #[error("sigma1 + sigma3 must not exceed 1 (got {0}); the TED reward would go negative")]
    RewardRangeNegative(f64),
    #[error("top-level weights must sum to 1 (got {0})")]
    WeightsDoNotSumToOne(f64),
    #[error("weight for `{0}` is negative")]
    NegativeWeight(String),
    #[error("unknown weight key `{0}`")]
    UnknownWeightKey(String),
    #[error("threshold `{name}` must lie in [0, 1], got {value}")]
    ThresholdOutOfRange { name: &'static str, value: f64 },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("duplicate sample id `{0}`")]
    DuplicateId(String),
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed record: {message}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

#[derive(Debug, Error)]
pub enum DistillError {
    #[error("iteration {next} exceeds the configured maximum {max}")]
    IterationExhausted { next: u32, max: u32 },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// A failed model call. `reason()` is the short code recorded in
/// pipeline failure lists.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ClientError {
    #[error("request timed out")]
    Timeout,
    #[error("endpoint returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("unusable reply: {0}")]
    BadReply(String),
}

impl ClientError {
    pub fn reason(&self) -> &'static str {
        match self {
            ClientError::Timeout => "timeout",
            ClientError::Status { .. } => "status",
            ClientError::Transport(_) => "transport",
            ClientError::BadReply(_) => "bad_reply",
        }
    }

    /// Whether another attempt could plausibly succeed.
    pub fn is_retryable(&self) -> bool {
        match self {
            ClientError::Timeout | ClientError::Transport(_) => true,
            ClientError::Status { status, .. } => *status == 429 || *status >= 500,
            ClientError::BadReply(_) => false,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum JoinError {
    #[error("prediction `{id}` has no ground truth")]
    MissingGroundTruth { id: String },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
}

#[derive(Debug, Error)]
pub enum ToolkitConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Toml {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error(transparent)]
    Invalid(#[from] ConfigError),
    #[error("schema: {0}")]
    Schema(#[from] SchemaError),
}
