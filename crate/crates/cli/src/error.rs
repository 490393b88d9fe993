//! Error type carrying the process exit code.

use volcast_core::Error as CoreError;

/// Top-level error: the variant decides the exit code (config 2, data 3,
/// numeric 4).
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) | CliError::Io(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    /// Prepends a source label, typically a file path, to the message.
    pub fn prefixed(self, label: &str) -> Self {
        match self {
            CliError::Config(m) => CliError::Config(format!("{label}: {m}")),
            CliError::Data(m) => CliError::Data(format!("{label}: {m}")),
            CliError::Numeric(m) => CliError::Numeric(format!("{label}: {m}")),
            CliError::Io(e) => CliError::Data(format!("{label}: {e}")),
        }
    }

    /// Wraps a core error with the pipeline stage it came from, sorted
    /// into the exit-code class its kind belongs to.
    pub fn from_core(stage: &str, err: CoreError) -> Self {
        let msg = format!("{stage}: {err}");
        match err {
            CoreError::InvalidInput(_) | CoreError::InvalidParams(_) => CliError::Config(msg),
            CoreError::SingularMatrix | CoreError::NonFinite(_) | CoreError::NoConvergence(_) => {
                CliError::Numeric(msg)
            }
            _ => CliError::Data(msg),
        }
    }
}
