//! Run manifests: what produced which output, from which inputs.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sortition_audit::CourtConfig;

use crate::{CliError, CliResult};

/// Written alongside every output; the `created_at_unix` field is the only
/// non-deterministic value a run produces.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub created_at_unix: u64,
    pub seed: Option<u64>,
    pub config: CourtConfig,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub options: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &str, config: &CourtConfig) -> Self {
        RunManifest {
            tool: "sortition-audit",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            created_at_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            seed: None,
            config: config.clone(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            options: serde_json::Value::Null,
        }
    }

    pub fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.display().to_string());
        self
    }

    pub fn maybe_input(mut self, path: Option<&PathBuf>) -> Self {
        if let Some(p) = path {
            self.inputs.push(p.display().to_string());
        }
        self
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.display().to_string());
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn options(mut self, options: serde_json::Value) -> Self {
        self.options = options;
        self
    }
}

/// Manifest path for a primary output: `dir/stem.manifest.json`.
pub fn manifest_path_for(output: &Path) -> PathBuf {
    output.with_file_name(manifest_name_for(output))
}

/// The file-name half of [`manifest_path_for`]. Output files embed this
/// relative name rather than a full path so reruns in different directories
/// stay byte-identical.
pub fn manifest_name_for(output: &Path) -> String {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".to_string());
    format!("{stem}.manifest.json")
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> CliResult<()> {
    let json = serde_json::to_string_pretty(manifest)
        .map_err(|e| CliError::Runtime(format!("cannot serialize manifest: {e}")))?;
    std::fs::write(path, json + "\n")
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}
