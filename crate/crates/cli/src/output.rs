//! Artifact writing and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::Failure;

/// Git-style content hash: sha256 over `blob <len>\0<bytes>`.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub version: &'static str,
    pub seed: u64,
    pub config_hash: String,
    pub config: &'a ExperimentConfig,
    pub derived: BTreeMap<&'static str, serde_json::Value>,
    pub notes: Vec<String>,
    /// Relative path to content hash, for every artifact written.
    pub artifacts: BTreeMap<String, String>,
}

pub struct Run<'a> {
    pub cfg: &'a ExperimentConfig,
    pub command: &'a str,
    pub dir: PathBuf,
    pub derived: BTreeMap<&'static str, serde_json::Value>,
    pub notes: Vec<String>,
}

impl<'a> Run<'a> {
    pub fn start(cfg: &'a ExperimentConfig, command: &'a str) -> Result<Self, Failure> {
        fs::create_dir_all(&cfg.out)?;
        Ok(Run { cfg, command, dir: cfg.out.clone(), derived: BTreeMap::new(), notes: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn derive(&mut self, key: &'static str, value: impl Serialize) {
        self.derived.insert(key, serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
    }

    pub fn note(&mut self, message: impl Into<String>) {
        let message = message.into();
        eprintln!("mfinv: {message}");
        self.notes.push(message);
    }

    pub fn write_json(&self, name: &str, value: &impl Serialize) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value)?;
        fs::write(self.path(name), text + "\n")?;
        Ok(())
    }

    pub fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), Failure> {
        let mut text = header.join(",");
        text.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        fs::write(self.path(name), text)?;
        Ok(())
    }

    /// Hashes every file under the run directory and writes `manifest.json`.
    pub fn finish(self) -> Result<PathBuf, Failure> {
        // The output location does not change the experiment.
        let identity = ExperimentConfig { out: PathBuf::new(), ..self.cfg.clone() };
        let config_text = toml::to_string(&identity).map_err(|e| Failure::Config(e.to_string()))?;
        let mut artifacts = BTreeMap::new();
        collect(&self.dir, &self.dir, &mut artifacts)?;
        artifacts.remove("manifest.json");
        let manifest = Manifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            seed: self.cfg.seed,
            config_hash: content_hash(config_text.as_bytes()),
            config: self.cfg,
            derived: self.derived,
            notes: self.notes,
            artifacts,
        };
        let path = self.dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(path)
    }
}

fn collect(root: &Path, dir: &Path, out: &mut BTreeMap<String, String>) -> Result<(), Failure> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect(root, &path, out)?;
        } else {
            let rel = path.strip_prefix(root).unwrap_or(&path).to_string_lossy().replace('\\', "/");
            out.insert(rel, content_hash(&fs::read(&path)?));
        }
    }
    Ok(())
}
