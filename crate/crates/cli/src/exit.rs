//! Exit codes and the error types that select them.

use std::fmt;

use fsukit::error::{DatasetError, JoinError};

pub const FAILURE: u8 = 1;
/// Bad input data: unknown ids, malformed lines, unusable ground truth.
pub const DATA: u8 = 2;
/// Command-line usage error (sysexits `EX_USAGE`).
pub const USAGE: u8 = 64;

#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Input records that are well-formed JSON but cannot be used.
#[derive(Debug)]
pub struct InvalidInput(pub String);

impl fmt::Display for InvalidInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidInput {}

pub fn code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return USAGE;
        }
        if cause.is::<JoinError>() || cause.is::<InvalidInput>() {
            return DATA;
        }
        if let Some(DatasetError::MalformedLine { .. }) = cause.downcast_ref::<DatasetError>() {
            return DATA;
        }
    }
    FAILURE
}
