use std::io;
use std::path::PathBuf;

use netcascade_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid `{key}`{}: {message}", line.map(|l| format!(" on line {l}")).unwrap_or_default())]
    Domain { key: String, line: Option<usize>, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        CliError::Parse { line, column, message: message.into() }
    }

    pub fn domain(key: impl Into<String>, line: Option<usize>, message: impl Into<String>) -> Self {
        CliError::Domain { key: key.into(), line, message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 1 validation, 2 computational, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Domain { .. } | CliError::Usage(_) => 1,
            CliError::Core(e) => match e {
                CoreError::Overflow(_)
                | CoreError::DivergentHorizon { .. }
                | CoreError::NotConverged { .. }
                | CoreError::StepTooLarge(_) => 2,
                _ => 1,
            },
            CliError::Io { .. } => 3,
            CliError::Csv(e) if e.is_io_error() => 3,
            CliError::Csv(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes() {
        assert_eq!(CliError::parse(1, 1, "x").exit_code(), 1);
        assert_eq!(CliError::Core(CoreError::StepTooLarge("h")).exit_code(), 2);
        assert_eq!(CliError::Core(CoreError::Domain("x")).exit_code(), 1);
        assert_eq!(CliError::io("a", io::Error::other("gone")).exit_code(), 3);
        let e = CliError::domain("alpha", Some(4), "must be in (0, 1]");
        assert_eq!(e.to_string(), "invalid `alpha` on line 4: must be in (0, 1]");
    }
}
