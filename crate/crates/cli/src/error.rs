use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Missing or conflicting flags.
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] socialrank::Error),

    #[error("{context}: {source}")]
    Output {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Serialize)]
struct ErrorBody<'a> {
    code: &'a str,
    exit: u8,
    message: String,
}

impl CliError {
    pub fn output(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Output {
            context: context.into(),
            source,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) if e.is_numeric() => "numeric",
            CliError::Core(_) => "input",
            CliError::Output { .. } => "output",
        }
    }

    /// 2 for bad invocations and unusable inputs, 3 when a computation fails.
    pub fn exit_status(&self) -> u8 {
        match self.code() {
            "numeric" => 3,
            "output" => 1,
            _ => 2,
        }
    }

    /// One-line JSON for stderr.
    pub fn to_json(&self) -> String {
        let body = ErrorBody {
            code: self.code(),
            exit: self.exit_status(),
            message: self.to_string(),
        };
        serde_json::json!({ "error": body }).to_string()
    }
}
