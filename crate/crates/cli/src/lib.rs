//! Library side of the `josephus` command: configuration, rendering, figure
//! generation and the command runner. The binary only parses arguments and
//! writes what [`run::execute`] returns.

pub mod config;
pub mod figures;
pub mod format;
pub mod output;
pub mod run;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] josephus_core::Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit code: 2 for anything caused by the arguments, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            _ => 2,
        }
    }
}

/// Exit code for a completed check whose assertion failed.
pub const EXIT_ASSERTION: i32 = 3;
