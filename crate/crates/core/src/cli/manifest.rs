use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const MANIFEST_FILE: &str = "manifest.toml";

/// Provenance of one command run. Kept as TOML, so the wall-clock fields
/// never touch the JSON and CSV artifacts that must be byte-identical
/// across reruns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub seed: u64,
    /// SHA-256 of the config bytes, or of the canonical argument string
    /// when there is no config file.
    pub config_hash: String,
    pub output_dir: PathBuf,
    /// Seconds since the Unix epoch.
    pub started: f64,
    pub finished: f64,
    pub outputs: Vec<String>,
    pub exit_code: i32,
    pub version: String,
}

impl RunManifest {
    pub fn begin(command: &str, config_path: Option<&Path>, seed: u64, hashed: &[u8], out: &Path) -> Self {
        Self {
            command: command.into(),
            config_path: config_path.map(Path::to_path_buf),
            seed,
            config_hash: content_hash(hashed),
            output_dir: out.to_path_buf(),
            started: now(),
            finished: 0.0,
            outputs: Vec::new(),
            exit_code: 0,
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    /// Stamps the end time and writes the manifest into the output directory.
    pub fn finish(mut self, exit_code: i32) -> Result<()> {
        self.finished = now();
        self.exit_code = exit_code;
        let text = toml::to_string(&self).map_err(|e| Error::Schema(e.to_string()))?;
        write_atomic(&self.output_dir.join(MANIFEST_FILE), text.as_bytes())
    }
}

pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

/// Writes to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::Config(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })?;
    Ok(())
}
