//! Atomic file output and run manifests.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Collects files written by one command so the manifest can list them.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: BTreeMap<String, String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: BTreeMap::new(),
        })
    }

    /// Write `bytes` to `rel` via a temp file in the same directory and a rename.
    pub fn write_bytes(&mut self, rel: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(rel);
        let dir = path.parent().unwrap_or(&self.root).to_path_buf();
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut builder = tempfile::Builder::new();
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            builder.permissions(std::fs::Permissions::from_mode(0o644));
        }
        let mut tmp = builder
            .tempfile_in(&dir)
            .with_context(|| format!("creating temp file in {}", dir.display()))?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path)
            .with_context(|| format!("renaming into {}", path.display()))?;
        self.written.insert(rel.to_string(), hex::encode(Sha256::digest(bytes)));
        Ok(path)
    }

    /// Render through `f` into memory, then write atomically.
    pub fn write_with<F>(&mut self, rel: &str, f: F) -> Result<PathBuf>
    where
        F: FnOnce(&mut Vec<u8>) -> climidx_core::Result<()>,
    {
        let mut buf = Vec::new();
        f(&mut buf).with_context(|| format!("rendering {rel}"))?;
        self.write_bytes(rel, &buf)
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<PathBuf> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_bytes(rel, &bytes)
    }

    /// CSV from a header and string rows.
    pub fn write_rows(&mut self, rel: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
        self.write_bytes(rel, &bytes)
    }

    /// `manifest.json`, listing every file written so far with its SHA-256.
    pub fn finish(mut self, manifest: Manifest) -> Result<PathBuf> {
        let manifest = Manifest {
            outputs: std::mem::take(&mut self.written),
            ..manifest
        };
        self.write_json("manifest.json", &manifest)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub command: String,
    pub config_sha256: String,
    pub config: serde_json::Value,
    pub parallel: bool,
    pub jobs: Option<usize>,
    pub seeds: BTreeMap<String, u64>,
    /// Command-specific facts (series info, failures, fits).
    pub details: serde_json::Value,
    pub outputs: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: &str, loaded: &crate::config::Loaded, jobs: Option<usize>) -> Self {
        Self {
            tool: "climidx",
            version: env!("CARGO_PKG_VERSION"),
            core_version: climidx_core::VERSION,
            command: command.to_string(),
            config_sha256: loaded.hash(),
            config: serde_json::to_value(&loaded.config).expect("config serializes"),
            parallel: cfg!(feature = "parallel") && jobs != Some(1),
            jobs,
            seeds: BTreeMap::new(),
            details: serde_json::Value::Null,
            outputs: BTreeMap::new(),
        }
    }
}
