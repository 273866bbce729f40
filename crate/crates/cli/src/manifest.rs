use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

use disclocus::io::sidecar;

/// Provenance record written next to every output file as `<out>.manifest.json`.
#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub model: Option<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub wall_clock_seconds: f64,
}

pub struct Recorder {
    command: &'static str,
    config: serde_json::Value,
    clock: Instant,
}

impl Recorder {
    pub fn new<A: Serialize>(command: &'static str, args: &A) -> Result<Self> {
        Ok(Self {
            command,
            config: serde_json::to_value(args)?,
            clock: Instant::now(),
        })
    }

    /// Writes the manifest for `primary` (and any companions it produced).
    pub fn finish(
        &self,
        primary: &Path,
        model: Option<String>,
        seed: Option<u64>,
        inputs: Vec<PathBuf>,
        outputs: Vec<PathBuf>,
    ) -> Result<PathBuf> {
        let m = RunManifest {
            command: self.command.to_string(),
            model,
            config: self.config.clone(),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs,
            outputs,
            wall_clock_seconds: self.clock.elapsed().as_secs_f64(),
        };
        let path = sidecar(primary, ".manifest.json");
        let text = serde_json::to_string_pretty(&m)? + "\n";
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
