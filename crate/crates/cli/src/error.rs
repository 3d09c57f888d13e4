use serde::Serialize;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RECOVERABILITY: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Error printed as JSON on stderr, carrying the process exit code.
#[derive(Clone, Debug, Serialize)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { kind: "config", message: message.into(), exit_code: EXIT_CONFIG }
    }

    pub fn recoverability(message: impl Into<String>) -> Self {
        Self { kind: "recoverability", message: message.into(), exit_code: EXIT_RECOVERABILITY }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self { kind: "numerical", message: message.into(), exit_code: EXIT_NUMERICAL }
    }
}

impl From<fr_core::Error> for CliError {
    fn from(e: fr_core::Error) -> Self {
        if e.is_recoverability() {
            Self::recoverability(e.to_string())
        } else if e.is_numerical() {
            Self::numerical(e.to_string())
        } else {
            Self::config(e.to_string())
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}
