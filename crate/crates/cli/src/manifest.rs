use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Cli, RunConfig};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything needed to reproduce a run: feeding `config` back in with the
/// same `seed` and `subcommand` regenerates every output byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: RunConfig,
    pub seed: u64,
    pub format: String,
    pub version: String,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn new(cli: &Cli, config: &RunConfig, outputs: Vec<String>, wall_clock_seconds: f64) -> Self {
        Self {
            subcommand: cli.command.name().into(),
            config: config.clone(),
            seed: cli.seed,
            format: serde_json::to_value(cli.format)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default(),
            version: env!("CARGO_PKG_VERSION").into(),
            outputs,
            wall_clock_seconds,
        }
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let body = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        weakcalc::io::write_atomic(&dir.join(MANIFEST_FILE), body.as_bytes())
    }

    /// The config snapshot as a TOML file usable with `--config`.
    pub fn config_toml(&self) -> String {
        toml::to_string(&self.config).unwrap_or_default()
    }
}
