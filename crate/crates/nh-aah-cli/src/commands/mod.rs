//! One module per experiment family. Each exposes
//! `execute(parameters, ctx) -> anyhow::Result<String>` returning the
//! resolved-config JSON line it stamped into its artifacts.

pub mod domain_wall;
pub mod laser;
pub mod phase_diagram;
pub mod spectrum;
pub mod trajectory;

use crate::config::ConfigError;

/// Maps a parameter-validation failure from the library onto a config
/// error (exit code 2): the value came straight from the experiment file.
pub fn bad_param(e: impl std::fmt::Display) -> anyhow::Error {
    ConfigError(e.to_string()).into()
}
