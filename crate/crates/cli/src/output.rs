//! Run directories: atomic file writes and the hashed manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::spec::ExperimentSpec;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    /// Some outputs are missing or truncated; see `error`.
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub command: String,
    pub seed: u64,
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub files: Vec<FileEntry>,
    pub notes: Vec<String>,
    pub spec: ExperimentSpec,
}

impl Manifest {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let path = dir.as_ref().join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn file(&self, name: &str) -> Option<&FileEntry> {
        self.files.iter().find(|f| f.path == name)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Write through a temporary sibling and rename, so readers never see a
/// half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| CliError::io(format!("writing {}", tmp.display()), e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(format!("renaming to {}", path.display()), e))
}

/// Collects every file written for one run.
#[derive(Debug)]
pub struct RunDir {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl RunDir {
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
        Ok(RunDir { dir, files: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let bytes = contents.as_ref();
        write_atomic(&self.dir.join(name), bytes)?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(())
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    /// Write `manifest.json` last, listing everything written so far.
    pub fn finish(
        self,
        command: &str,
        spec: &ExperimentSpec,
        status: RunStatus,
        error: Option<String>,
        notes: Vec<String>,
    ) -> Result<Manifest> {
        let manifest = Manifest {
            name: spec.name.clone(),
            command: command.to_string(),
            seed: spec.train.seed,
            status,
            error,
            files: self.files.clone(),
            notes,
            spec: spec.clone(),
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::config(e.to_string()))?;
        write_atomic(&self.dir.join(MANIFEST_FILE), format!("{text}\n").as_bytes())?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn atomic_write_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let mut run = RunDir::create(dir.path().join("r")).unwrap();
        run.write("a.csv", "x\n").unwrap();
        run.write("a.csv", "y\n").unwrap();
        assert_eq!(run.files().len(), 1);
        let names: Vec<_> = fs::read_dir(run.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names, vec![std::ffi::OsString::from("a.csv")]);
        assert_eq!(fs::read_to_string(run.path().join("a.csv")).unwrap(), "y\n");
    }
}
