//! Run manifests: what was run, on which inputs, producing which files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::io::to_json;

#[derive(Debug, Serialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: serde_json::Value,
    pub inputs: Vec<FileHash>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub versions: BTreeMap<String, String>,
    pub outputs: Vec<FileHash>,
}

fn hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Outputs of one run, held in memory until every input has been validated.
pub struct Run {
    manifest: RunManifest,
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Run {
    pub fn new<C: Serialize>(subcommand: &str, config: &C, seed: Option<u64>) -> Self {
        let versions = BTreeMap::from([("stpoisson".to_string(), env!("CARGO_PKG_VERSION").to_string())]);
        let manifest = RunManifest {
            subcommand: subcommand.into(),
            config: serde_json::to_value(config).expect("serializable config"),
            inputs: Vec::new(),
            seed,
            versions,
            outputs: Vec::new(),
        };
        Run { manifest, files: Vec::new() }
    }

    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        self.manifest.inputs.push(FileHash { path: path.display().to_string(), sha256: hex(&bytes) });
        Ok(())
    }

    pub fn output(&mut self, path: PathBuf, bytes: Vec<u8>) {
        self.manifest.outputs.push(FileHash { path: path.display().to_string(), sha256: hex(&bytes) });
        self.files.push((path, bytes));
    }

    /// Writes every output, then the manifest.
    pub fn commit(self, manifest_path: &Path) -> Result<(), CliError> {
        let write = |p: &Path, b: &[u8]| -> Result<(), CliError> {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
            }
            std::fs::write(p, b).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        };
        for (p, b) in &self.files {
            write(p, b)?;
        }
        write(manifest_path, &to_json(&self.manifest))
    }
}

/// `zones.json` → `zones.manifest.json`.
pub fn beside(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.manifest.json"))
}
