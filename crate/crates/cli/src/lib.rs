//! Front end for the `jmx` binary: argument validation, the subcommand
//! runners and the CSV/JSON table format they emit.

pub mod args;
pub mod run;
pub mod table;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad or inconsistent arguments; the message names the flag.
    #[error("{0}")]
    Usage(String),
    /// The computation itself failed (no plateau, every energy failed, ...).
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
    /// `--help` or `--version` output; not a failure.
    #[error("{0}")]
    Help(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
            CliError::Help(_) => 0,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
