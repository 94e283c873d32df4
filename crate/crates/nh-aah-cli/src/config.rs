//! Experiment configuration: strict-schema JSON files plus flag overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// A configuration problem (unreadable file, malformed JSON, schema
/// violation, kind mismatch). Distinguished from runtime failures so the
/// driver can exit with code 2 instead of 1.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Spectrum,
    PhaseDiagram,
    DomainWall,
    Laser,
    Trajectory,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::PhaseDiagram => "phase_diagram",
            ExperimentKind::DomainWall => "domain_wall",
            ExperimentKind::Laser => "laser",
            ExperimentKind::Trajectory => "trajectory",
        };
        f.write_str(name)
    }
}

/// Top-level experiment file: the kind tag, a kind-specific parameter body
/// (validated strictly by the matching command), an output directory, and
/// an optional seed. Unknown keys are rejected everywhere so misspelled
/// physics parameters cannot be silently ignored.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub parameters: serde_json::Value,
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Reads and parses an experiment file; all failures are config errors.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| ConfigError(format!("{} is not a valid experiment file: {e}", path.display())))
}

/// Parses a kind-specific parameter body with a strict schema.
pub fn parse_parameters<T: serde::de::DeserializeOwned>(
    kind: ExperimentKind,
    value: &serde_json::Value,
) -> Result<T, ConfigError> {
    serde_json::from_value(value.clone())
        .map_err(|e| ConfigError(format!("invalid {kind} parameters: {e}")))
}
