use std::path::PathBuf;

use serde_json::{json, Value};

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: line {line}: {message}", path.display())]
    ConfigParse { path: PathBuf, line: usize, message: String },

    #[error("{}: field `{field}`: {message}", path.display())]
    Validation { path: PathBuf, field: String, message: String },

    #[error("{}: {source}", path.display())]
    ChannelFile { path: PathBuf, source: muxsec_core::Error },

    #[error("{0}")]
    Compute(#[from] muxsec_core::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    Threads(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::ConfigParse { .. } => "config_parse",
            CliError::Validation { .. } => "validation",
            CliError::ChannelFile { .. } => "channel_file",
            CliError::Compute(muxsec_core::Error::BudgetExceeded { .. }) => "budget_exceeded",
            CliError::Compute(_) => "computation",
            CliError::Io { .. } => "io",
            CliError::Threads(_) => "threads",
        }
    }

    /// Single-line JSON record written to stderr on failure.
    pub fn record(&self) -> Value {
        let mut rec = json!({
            "status": "error",
            "kind": self.kind(),
            "message": self.to_string(),
        });
        let extra = match self {
            CliError::ConfigParse { path, line, .. } => json!({ "file": path, "line": line }),
            CliError::Validation { path, field, .. } => json!({ "file": path, "field": field }),
            CliError::ChannelFile { path, source } => match source {
                muxsec_core::Error::Parse { line, .. } => json!({ "file": path, "line": line }),
                _ => json!({ "file": path }),
            },
            CliError::Compute(muxsec_core::Error::BudgetExceeded { what, required, limit }) => {
                json!({ "limit": "enumeration_budget", "what": what, "required": required.to_string(), "budget": limit })
            }
            CliError::Io { path, .. } => json!({ "file": path }),
            _ => json!({}),
        };
        if let (Some(rec), Value::Object(extra)) = (rec.as_object_mut(), extra) {
            rec.extend(extra);
        }
        rec
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigParse { .. } | CliError::Validation { .. } | CliError::ChannelFile { .. } => 2,
            CliError::Compute(_) | CliError::Threads(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}
