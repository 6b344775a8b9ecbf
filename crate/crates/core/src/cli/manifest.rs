use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Provenance of one command run: resolved configuration, timings and a
/// content hash for every file written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config_path: Option<PathBuf>,
    pub config: BTreeMap<String, String>,
    pub out_dir: PathBuf,
    pub timings_secs: BTreeMap<String, f64>,
    pub outputs: Vec<OutputEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(command: &str, config_path: Option<PathBuf>, config: BTreeMap<String, String>, out_dir: &Path) -> Self {
        Self {
            command: command.to_string(),
            version: concat!("v", env!("CARGO_PKG_VERSION")).to_string(),
            config_path,
            config,
            out_dir: out_dir.to_path_buf(),
            timings_secs: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    /// Write `contents` to `name` inside the output directory and record it.
    pub fn emit(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.outputs.push(OutputEntry {
            file: name.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
            bytes: contents.len() as u64,
        });
        Ok(())
    }

    pub fn time(&mut self, stage: &str, secs: f64) {
        self.timings_secs.insert(stage.to_string(), secs);
    }

    pub fn save(&self) -> Result<()> {
        let path = self.out_dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Files whose current contents no longer match the recorded hash.
    pub fn stale_outputs(&self, dir: &Path) -> Result<Vec<String>> {
        let mut stale = Vec::new();
        for entry in &self.outputs {
            let path = dir.join(&entry.file);
            let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            if sha256_hex(&bytes) != entry.sha256 {
                stale.push(entry.file.clone());
            }
        }
        Ok(stale)
    }
}
