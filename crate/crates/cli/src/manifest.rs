//! Run manifests: resolved settings plus content hashes of every input.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

use crate::settings::Settings;

/// Git-style object id: SHA-256 over `blob <len>\0` followed by the bytes.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn file_hash(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(content_hash(&bytes))
}

#[derive(Clone, Debug, Default)]
pub struct Manifest {
    pub command: String,
    pub inputs: Vec<(String, PathBuf, String)>,
    pub notes: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Manifest {
            command: command.into(),
            ..Manifest::default()
        }
    }

    pub fn input(&mut self, label: &str, path: &Path) -> Result<&mut Self> {
        let hash = file_hash(path)?;
        self.inputs.push((label.into(), path.to_path_buf(), hash));
        Ok(self)
    }

    pub fn note(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.notes.push((key.into(), value.to_string()));
        self
    }

    pub fn render(&self, settings: &Settings) -> String {
        let mut s = format!("# share {}\n", self.command);
        let _ = writeln!(s, "version = {}", env!("CARGO_PKG_VERSION"));
        for (label, path, hash) in &self.inputs {
            let _ = writeln!(s, "input.{label} = {}", path.display());
            let _ = writeln!(s, "input.{label}.sha256 = {hash}");
        }
        for (k, v) in &self.notes {
            let _ = writeln!(s, "{k} = {v}");
        }
        s.push_str("\n# resolved settings\n");
        s.push_str(&settings.to_text());
        s
    }

    pub fn write(&self, dir: &Path, settings: &Settings) -> Result<()> {
        let path = dir.join("manifest.txt");
        fs::write(&path, self.render(settings)).with_context(|| format!("writing {}", path.display()))
    }
}
