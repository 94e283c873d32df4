//! Shared run state: resolved output directory, seed, provenance strings,
//! and artifact writing.

use std::path::PathBuf;

use anyhow::Context as _;
use nh_aah::export::ArtifactMeta;
use serde::Serialize;

use crate::config::ExperimentKind;

/// Version string stamped into every artifact (tagged releases make this
/// resolvable to a git state).
pub const VERSION: &str = concat!("nh-aah ", env!("CARGO_PKG_VERSION"));

/// Resolved run environment handed to every command.
pub struct RunContext {
    pub kind: ExperimentKind,
    pub out_dir: PathBuf,
    /// Seed after flag-over-config resolution; commands that draw noise
    /// default to 0 when absent.
    pub seed: Option<u64>,
    pub version: &'static str,
}

impl RunContext {
    /// Single-line JSON of the fully resolved experiment (kind, effective
    /// parameters, output directory, seed) for embedding in artifacts.
    pub fn resolved_config<P: Serialize>(&self, parameters: &P) -> anyhow::Result<String> {
        let value = serde_json::json!({
            "kind": self.kind,
            "parameters": parameters,
            "output_dir": self.out_dir,
            "seed": self.seed,
        });
        Ok(serde_json::to_string(&value)?)
    }

    pub fn meta<'a>(&'a self, config_json: &'a str) -> ArtifactMeta<'a> {
        ArtifactMeta {
            config_json,
            version: self.version,
        }
    }

    pub fn write_text(&self, name: &str, content: &str) -> anyhow::Result<()> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, content).with_context(|| format!("writing {}", path.display()))
    }

    pub fn write_bytes(&self, name: &str, content: &[u8]) -> anyhow::Result<()> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, content).with_context(|| format!("writing {}", path.display()))
    }

    /// Writes `resolved_config.json`: the resolved config as a pretty JSON
    /// document plus the version, so every run directory is self-describing.
    pub fn write_resolved_config(&self, resolved: &str) -> anyhow::Result<()> {
        let value: serde_json::Value = serde_json::from_str(resolved)?;
        let doc = serde_json::json!({ "config": value, "version": self.version });
        self.write_text("resolved_config.json", &format!("{:#}\n", doc))
    }
}

/// `n` evenly spaced values covering `[a, b]` inclusive.
pub fn lin_space(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1).max(1) as f64)
        .collect()
}
