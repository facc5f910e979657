use serde_json::json;

/// Failure of one CLI run, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Solver(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Solver(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Solver(_) => "solver",
            CliError::Io { .. } => "io",
        }
    }

    /// Machine-readable report written to stderr.
    pub fn report(&self) -> String {
        json!({ "error": { "kind": self.kind(), "message": self.to_string(), "exit_code": self.exit_code() } })
            .to_string()
    }
}

/// Core errors from invalid inputs are configuration errors; everything else
/// is a solver failure.
impl From<assurance_core::Error> for CliError {
    fn from(e: assurance_core::Error) -> Self {
        use assurance_core::Error as E;
        match e {
            E::Domain { .. } | E::InvalidParams(_) => CliError::Config(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Solver(format!("csv encoding failed: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
