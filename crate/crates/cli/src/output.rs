use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Writes `bytes` to `path` through a temp file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let io = |e: std::io::Error| CliError::Data(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written next to the primary output of every command.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Arguments after the program name; `rerun` replays them.
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub timestamp_unix: u64,
}

/// Collects inputs read and outputs written during one command.
#[derive(Debug, Default)]
pub struct Recorder {
    inputs: Vec<FileDigest>,
    outputs: Vec<(PathBuf, FileDigest)>,
}

impl Recorder {
    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes =
            fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        self.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    pub fn read_string(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = self.read(path)?;
        String::from_utf8(bytes).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }

    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        write_atomic(path, bytes)?;
        self.outputs.push((
            path.to_path_buf(),
            FileDigest {
                path: path.display().to_string(),
                sha256: sha256_hex(bytes),
            },
        ));
        Ok(())
    }

    /// Writes `<first output>.manifest.json`.
    pub fn finish(
        self,
        subcommand: &str,
        argv: &[String],
        config: serde_json::Value,
        seed: Option<u64>,
    ) -> Result<Option<PathBuf>, CliError> {
        let Some((primary, _)) = self.outputs.first() else {
            return Ok(None);
        };
        let manifest_path = manifest_path_for(primary);
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            argv: argv.to_vec(),
            config,
            seed,
            inputs: self.inputs,
            outputs: self.outputs.into_iter().map(|(_, d)| d).collect(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let mut text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::Data(format!("manifest: {e}")))?;
        text.push('\n');
        write_atomic(&manifest_path, text.as_bytes())?;
        Ok(Some(manifest_path))
    }
}

pub fn manifest_path_for(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}
