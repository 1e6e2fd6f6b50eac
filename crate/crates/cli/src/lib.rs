//! Library behind the `gsd` binary: configuration schema, report assembly,
//! and the subcommand implementations. Kept as a library so integration tests
//! can drive every command without spawning processes.

pub mod commands;
pub mod config;
pub mod report;

/// Errors surfaced to the command line, partitioned by exit code:
/// schema/validation problems exit 2, solver failures exit 3, and output I/O
/// problems exit 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Schema(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
