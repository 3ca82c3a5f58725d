use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// The server answered with an error body.
    #[error("{code}: {message}")]
    Api { status: u16, code: String, message: String, body: Value },
    #[error("cannot reach {url}: {reason}")]
    Connection { url: String, reason: String },
    #[error("profile `{0}` has no identity; run `cliox identity create` first")]
    NoProfile(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Local(String),
}

impl CliError {
    /// 2 for usage errors, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    /// The document printed for this error in `--json` mode.
    pub fn to_json(&self) -> Value {
        match self {
            CliError::Api { body, .. } if body.get("error").is_some() => body.clone(),
            CliError::Api { code, message, .. } => serde_json::json!({ "error": code, "message": message }),
            CliError::Connection { .. } => {
                serde_json::json!({ "error": "ConnectionError", "message": self.to_string() })
            }
            CliError::NoProfile(_) => serde_json::json!({ "error": "NoProfile", "message": self.to_string() }),
            CliError::Usage(_) => serde_json::json!({ "error": "UsageError", "message": self.to_string() }),
            CliError::Local(_) => serde_json::json!({ "error": "LocalError", "message": self.to_string() }),
        }
    }

    pub fn is_status(&self, status: u16) -> bool {
        matches!(self, CliError::Api { status: s, .. } if *s == status)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Local(e.to_string())
    }
}
