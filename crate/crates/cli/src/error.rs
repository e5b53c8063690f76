use heston_escape::EscapeError;
use heston_escape_mc::McError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Convergence(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Domain(_) => "domain",
            CliError::Convergence(_) => "convergence",
            CliError::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<EscapeError> for CliError {
    fn from(e: EscapeError) -> Self {
        match e {
            EscapeError::Domain { .. } => CliError::Domain(e.to_string()),
            EscapeError::NonConvergence { .. } => CliError::Convergence(e.to_string()),
        }
    }
}

impl From<McError> for CliError {
    fn from(e: McError) -> Self {
        match e {
            McError::Config { .. } => CliError::Domain(e.to_string()),
            McError::Model(inner) => inner.into(),
            McError::Io(msg) => CliError::Io(msg),
        }
    }
}
