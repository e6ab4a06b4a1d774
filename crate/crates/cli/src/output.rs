//! Artifact files: output directory, manifest and JSON summaries.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Output(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Writes a file through a buffered writer.
    pub fn write_with<F>(&self, name: &str, body: F) -> Result<PathBuf, CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    {
        let path = self.path(name);
        let file = File::create(&path).map_err(|e| CliError::Output(format!("cannot create {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush()?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        self.write_with(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(std::io::Error::other)?;
            w.write_all(b"\n")
        })
    }
}

/// SHA-256 of the canonical JSON form of a resolved config.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    format!("{:x}", Sha256::digest(&bytes))
}

/// Everything needed to reproduce a run. Contains no timestamps so that
/// reruns produce identical manifests.
#[derive(Serialize)]
pub struct Manifest<'a, T: Serialize> {
    pub command: &'a str,
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub core_version: &'static str,
    pub seed: u64,
    pub config_hash: String,
    pub config: &'a T,
    pub artifacts: Vec<String>,
}

impl<'a, T: Serialize> Manifest<'a, T> {
    pub fn new(command: &'a str, seed: u64, config: &'a T) -> Self {
        Self {
            command,
            tool: env!("CARGO_PKG_NAME"),
            tool_version: env!("CARGO_PKG_VERSION"),
            core_version: safeopt_core::VERSION,
            seed,
            config_hash: config_hash(config),
            config,
            artifacts: Vec::new(),
        }
    }
}
