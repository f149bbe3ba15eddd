use std::fmt;
use std::path::Path;

use serde::Serialize;

use wholesale_mpe::Error;

/// Process exit codes.
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Validation,
    EnvironmentMismatch,
    Invariant,
    Io,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Validation | Kind::EnvironmentMismatch => EXIT_VALIDATION,
            Kind::Invariant => EXIT_INVARIANT,
            Kind::Io => EXIT_IO,
        }
    }
}

/// Failure reported to the user as a JSON document on stderr.
#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<String>,
}

impl CliError {
    pub fn new(kind: Kind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
            details: Vec::new(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(Kind::Validation, message)
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Self::new(Kind::Io, format!("{}: {err}", path.display()))
    }

    pub fn with_details(mut self, details: Vec<String>) -> Self {
        self.details = details;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let kind = match err {
            Error::Domain(_) | Error::InfiniteMean { .. } | Error::Validation(_) | Error::Lookup { .. } => Kind::Validation,
            Error::Invariant { .. } | Error::Bracket { .. } | Error::Simulation { .. } | Error::Internal(_) => Kind::Invariant,
        };
        Self::new(kind, err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
