use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Provenance record written next to every output set.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Configuration file, or the dataset for `fit`.
    pub config_path: String,
    /// SHA-256 of the ingested bytes.
    pub config_sha256: String,
    pub master_seed: u64,
    pub out_dir: String,
    pub tool_version: String,
    /// `running` until the run ends, then `complete` or `failed`.
    pub status: String,
    pub partial: bool,
    pub failed_points: usize,
    pub outputs: Vec<String>,
    pub wall_clock_s: Option<f64>,
    pub error: Option<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Manifest that is on disk from the start of a run and rewritten when it ends.
pub struct ManifestWriter {
    path: PathBuf,
    started: Instant,
    pub manifest: RunManifest,
}

impl ManifestWriter {
    pub fn begin(
        subcommand: &str,
        config_path: &Path,
        config_bytes: &[u8],
        master_seed: u64,
        out_dir: &Path,
    ) -> std::io::Result<Self> {
        fs::create_dir_all(out_dir)?;
        let w = Self {
            path: out_dir.join(MANIFEST_FILE),
            started: Instant::now(),
            manifest: RunManifest {
                subcommand: subcommand.into(),
                config_path: config_path.display().to_string(),
                config_sha256: sha256_hex(config_bytes),
                master_seed,
                out_dir: out_dir.display().to_string(),
                tool_version: env!("CARGO_PKG_VERSION").into(),
                status: "running".into(),
                partial: false,
                failed_points: 0,
                outputs: Vec::new(),
                wall_clock_s: None,
                error: None,
            },
        };
        w.write()?;
        Ok(w)
    }

    fn write(&self) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serialises");
        fs::write(&self.path, text + "\n")
    }

    pub fn finish(mut self, error: Option<String>) -> std::io::Result<()> {
        self.manifest.wall_clock_s = Some(self.started.elapsed().as_secs_f64());
        self.manifest.status = if error.is_some() { "failed" } else { "complete" }.into();
        self.manifest.partial |= error.is_some();
        self.manifest.error = error;
        self.write()
    }
}
