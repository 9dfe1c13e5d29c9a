use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};
use sideband_core::io::{to_json, write_text};
use sideband_core::{Error, Result};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Run record. `content_hash` covers everything except the timestamps.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
    pub notes: BTreeMap<String, serde_json::Value>,
    pub started_unix_s: u64,
    pub finished_unix_s: u64,
    pub content_hash: String,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub struct Recorder {
    out: std::path::PathBuf,
    command: String,
    seed: Option<u64>,
    config: serde_json::Value,
    inputs: Vec<FileEntry>,
    outputs: Vec<FileEntry>,
    notes: BTreeMap<String, serde_json::Value>,
    started: u64,
}

impl Recorder {
    pub fn new(out: &Path, command: &str, seed: Option<u64>, config: &impl Serialize) -> Result<Self> {
        std::fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
        Ok(Self {
            out: out.to_path_buf(),
            command: command.into(),
            seed,
            config: serde_json::to_value(config).map_err(|e| Error::Serialization(e.to_string()))?,
            inputs: Vec::new(),
            outputs: Vec::new(),
            notes: BTreeMap::new(),
            started: now(),
        })
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        self.inputs.push(FileEntry { path: name, sha256: sha256_hex(&bytes), bytes: bytes.len() });
        Ok(())
    }

    /// Write one output file and record its hash.
    pub fn write(&mut self, name: &str, text: &str) -> Result<()> {
        write_text(&self.out.join(name), text)?;
        self.outputs.push(FileEntry { path: name.into(), sha256: sha256_hex(text.as_bytes()), bytes: text.len() });
        Ok(())
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        if let Ok(v) = serde_json::to_value(value) {
            self.notes.insert(key.into(), v);
        }
    }

    pub fn finish(self) -> Result<RunManifest> {
        let mut m = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: self.command,
            seed: self.seed,
            config: self.config,
            inputs: self.inputs,
            outputs: self.outputs,
            notes: self.notes,
            started_unix_s: 0,
            finished_unix_s: 0,
            content_hash: String::new(),
        };
        m.content_hash = sha256_hex(to_json(&m)?.as_bytes());
        m.started_unix_s = self.started;
        m.finished_unix_s = now();
        write_text(&self.out.join("manifest.json"), &to_json(&m)?)?;
        Ok(m)
    }
}
