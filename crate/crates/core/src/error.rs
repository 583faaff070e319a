//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced while loading scenarios or running the solver.
#[derive(Debug, Error)]
pub enum Error {
    /// A scenario or settings file could not be parsed.
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// An instance or intermediate state violates one of its invariants.
    /// The message names the violated invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// Filesystem failure while reading inputs or writing results.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// Process exit code for the CLI: 1 for content errors, 2 for i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 2,
            _ => 1,
        }
    }
}
