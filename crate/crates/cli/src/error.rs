use std::fmt;
use std::process::ExitCode;

/// Failure of a subcommand, grouped by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Invalid flags or configuration: exit 2.
    Config(String),
    /// The numerics failed: exit 3.
    Numerical(String),
    /// Reading or writing files failed: exit 1.
    Io(String),
}

impl CliError {
    pub fn config(key: &str, reason: impl fmt::Display) -> Self {
        CliError::Config(format!("invalid configuration `{key}`: {reason}"))
    }

    pub fn io(path: &std::path::Path, err: impl fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<reactlab::Error> for CliError {
    fn from(e: reactlab::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}
