//! Files exchanged between commands.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use wholesale_mpe::{StandardizedSolution, WeibullDiagnostics};

use crate::error::{CliError, CliResult};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDocument {
    pub format_version: u32,
    /// Hash of `solution.environment`; checked on load.
    pub environment_hash: String,
    pub master_seed: u64,
    pub solution: StandardizedSolution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<WeibullDiagnostics>,
}

impl SolutionDocument {
    pub fn new(solution: StandardizedSolution, master_seed: u64, diagnostics: Option<WeibullDiagnostics>) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            environment_hash: solution.environment.snapshot_hash(),
            master_seed,
            solution,
            diagnostics,
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let doc: Self = read_json(path)?;
        if doc.format_version != FORMAT_VERSION {
            return Err(CliError::validation(format!(
                "{}: unsupported format_version {}",
                path.display(),
                doc.format_version
            )));
        }
        let hash = doc.solution.environment.snapshot_hash();
        if hash != doc.environment_hash {
            return Err(CliError::validation(format!(
                "{}: environment_hash does not match the embedded environment",
                path.display()
            )));
        }
        Ok(doc)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}
