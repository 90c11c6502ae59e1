//! Provenance records written next to every command's outputs.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub eventstory: String,
    pub core: String,
    pub model: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: Vec<String>,
    pub seed: u64,
    /// The effective configuration after layering file, environment and flags.
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub versions: Versions,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
}

pub fn manifest_name(command: &str) -> String {
    format!("manifest.{command}.json")
}

pub fn sha256_file(path: &Path) -> Result<(String, u64), CliError> {
    let file = File::open(path).map_err(|_| CliError::MissingInput(path.to_path_buf()))?;
    let mut reader = BufReader::new(file);
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    let mut total = 0u64;
    loop {
        let n = reader
            .read(&mut buf)
            .map_err(|e| CliError::InvalidInput { path: path.to_path_buf(), message: e.to_string() })?;
        if n == 0 {
            break;
        }
        total += n as u64;
        hasher.update(&buf[..n]);
    }
    let hex: String = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
    Ok((hex, total))
}

/// Digest every regular file under `path` (or `path` itself), sorted.
pub fn digest_all(path: &Path) -> Result<Vec<FileDigest>, CliError> {
    let mut files = Vec::new();
    collect(path, &mut files);
    files.sort();
    files
        .iter()
        .filter(|p| !p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("manifest.")))
        .map(|p| {
            let (sha256, bytes) = sha256_file(p)?;
            Ok(FileDigest { path: p.display().to_string(), sha256, bytes })
        })
        .collect()
}

fn collect(path: &Path, out: &mut Vec<PathBuf>) {
    if path.is_file() {
        out.push(path.to_path_buf());
    } else if let Ok(entries) = std::fs::read_dir(path) {
        for e in entries.flatten() {
            collect(&e.path(), out);
        }
    }
}

/// Collects provenance while a command runs.
pub struct Recorder {
    command: String,
    started: Instant,
    started_unix: u64,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Recorder {
    pub fn start(command: &str) -> Self {
        Recorder {
            command: command.to_string(),
            started: Instant::now(),
            started_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, p: &Path) {
        self.inputs.push(p.to_path_buf());
    }

    pub fn output(&mut self, p: &Path) {
        self.outputs.push(p.to_path_buf());
    }

    /// Write `manifest.<command>.json` into `dir`.
    pub fn finish(self, dir: &Path, seed: u64, config: serde_json::Value) -> Result<PathBuf, CliError> {
        let mut inputs = Vec::new();
        for p in &self.inputs {
            inputs.extend(digest_all(p)?);
        }
        let mut outputs = Vec::new();
        for p in &self.outputs {
            outputs.extend(digest_all(p)?);
        }
        let manifest = RunManifest {
            command: self.command.clone(),
            arguments: std::env::args().skip(1).collect(),
            seed,
            config,
            inputs,
            outputs,
            versions: Versions {
                eventstory: env!("CARGO_PKG_VERSION").to_string(),
                core: eventstory_core::VERSION.to_string(),
                model: eventstory_model::VERSION.to_string(),
            },
            started_unix: self.started_unix,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
        };
        std::fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))?;
        let path = dir.join(manifest_name(&self.command));
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::output(&path, e))?;
        std::fs::write(&path, text + "\n").map_err(|e| CliError::output(&path, e))?;
        Ok(path)
    }
}
