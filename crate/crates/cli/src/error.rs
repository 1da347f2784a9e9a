use std::fmt;

use serde::Serialize;

/// A failure that ends the process with a machine-readable report on stderr.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub code: String,
    pub message: String,
    #[serde(skip)]
    pub exit_code: i32,
}

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SEMANTIC: i32 = 3;
pub const EXIT_GUARD: i32 = 4;

impl CliError {
    pub fn new(code: &str, message: impl Into<String>, exit_code: i32) -> Self {
        Self {
            code: code.to_string(),
            message: message.into(),
            exit_code,
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self::new("E_IO", format!("{}: {e}", path.display()), EXIT_USAGE)
    }

    pub fn parse(what: &str, e: impl fmt::Display) -> Self {
        Self::new("E_PARSE", format!("{what}: {e}"), EXIT_USAGE)
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new("E_USAGE", message, EXIT_USAGE)
    }

    /// Errors raised while validating inputs, before any computation.
    pub fn invalid_input(e: bvdual::Error) -> Self {
        Self::new(&format!("E_{}", e.code()), e.to_string(), EXIT_USAGE)
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self, "exit_code": self.exit_code }).to_string()
    }
}

/// Errors raised by the engines: guards exit 4, everything else 3.
impl From<bvdual::Error> for CliError {
    fn from(e: bvdual::Error) -> Self {
        let exit = if e.is_numerical_guard() {
            EXIT_GUARD
        } else {
            EXIT_SEMANTIC
        };
        Self::new(&format!("E_{}", e.code()), e.to_string(), exit)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

pub type CliResult<T> = Result<T, CliError>;
