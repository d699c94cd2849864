use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot parse {what}: {reason}")]
    Parse { what: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("von Mangoldt table covers n <= {have}, need n <= {need}")]
    TableTooSmall { have: u64, need: u64 },

    #[error("integer overflow evaluating {0}")]
    Overflow(String),

    #[error("cannot allocate {bytes} bytes for a table of {entries} entries")]
    Alloc { bytes: u64, entries: u64 },

    #[error("{what}: error estimate {estimate:e} exceeds tolerance {tol:e}")]
    Tolerance {
        what: String,
        estimate: f64,
        tol: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Cache(#[from] CacheError),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Parse {
            what,
            reason: reason.into(),
        }
    }

    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Config(_) => 2,
            Error::Tolerance { .. } => 4,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}

/// Failures reading a sieve cache file.
#[derive(Debug, Error)]
pub enum CacheError {
    #[error("bad magic bytes {0:?}, expected \"PRLB\"")]
    Magic([u8; 4]),

    #[error("unsupported cache version {found}, expected {expected}")]
    Version { found: u8, expected: u8 },

    #[error("checksum mismatch: {0}")]
    Checksum(String),

    #[error("corrupt cache payload: {0}")]
    Corrupt(String),
}
