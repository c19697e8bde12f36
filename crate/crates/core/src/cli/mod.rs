//! Scenario files, presets and the runner behind the `floquet-lab` binary.

pub mod config;
pub mod presets;
pub mod runner;

pub use config::{parse_config, FieldError, ScenarioConfig};
pub use runner::{run_scenario, RunReport, ScenarioOutcome};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", format_fields(.0))]
    ConfigInvalid(Vec<FieldError>),
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("scenario {scenario}: {source}")]
    Scenario { scenario: String, source: crate::Error },
    #[error("i/o error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

fn format_fields(errors: &[FieldError]) -> String {
    errors.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n")
}

/// Read and validate a scenario file.
pub fn load_config(path: &std::path::Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            CliError::FileNotFound(path.to_path_buf())
        } else {
            CliError::Io { path: path.to_path_buf(), source }
        }
    })?;
    parse_config(&text).map_err(CliError::ConfigInvalid)
}
