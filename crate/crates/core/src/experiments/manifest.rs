use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::Abort;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    /// Running, interrupted, or killed; `run --resume` picks it up.
    Incomplete,
    Complete,
    /// Stopped by a numerical failure; see `abort`.
    Aborted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub step: u64,
    pub t: f64,
    /// Checkpoint path relative to the run directory.
    pub file: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub n: usize,
    pub mu1: f64,
    pub mu2: f64,
    /// Wall-clock seconds since the Unix epoch.
    pub started: f64,
    pub finished: Option<f64>,
    pub status: RunStatus,
    /// `‖u(0)‖_∞`, the reference of the blow-up guard.
    pub reference_sup_u: f64,
    pub snapshots: Vec<SnapshotEntry>,
    /// Every other file in the run directory.
    pub files: Vec<FileEntry>,
    pub abort: Option<Abort>,
}

pub(crate) fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

fn walk(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            walk(root, &path, out)?;
        } else {
            out.push(path.strip_prefix(root).expect("inside root").to_path_buf());
        }
    }
    Ok(())
}

fn relative_name(p: &Path) -> String {
    p.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/")
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Writes via a temporary file and rename so a crash never leaves a
    /// truncated manifest.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let tmp = dir.join(format!("{MANIFEST_FILE}.tmp"));
        fs::write(&tmp, serde_json::to_string_pretty(self)?)?;
        fs::rename(&tmp, dir.join(MANIFEST_FILE))?;
        Ok(())
    }

    /// Re-lists every file under `dir` except the manifest itself.
    pub fn refresh_files(&mut self, dir: &Path) -> Result<()> {
        let mut paths = Vec::new();
        walk(dir, dir, &mut paths)?;
        paths.sort();
        self.files = paths
            .into_iter()
            .map(|p| relative_name(&p))
            .filter(|p| !p.starts_with(MANIFEST_FILE))
            .map(|path| {
                let bytes = fs::metadata(dir.join(&path))?.len();
                Ok(FileEntry { path, bytes })
            })
            .collect::<Result<_>>()?;
        Ok(())
    }

    /// Checks that every listed file exists with its recorded length.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for f in &self.files {
            let len = fs::metadata(dir.join(&f.path))
                .map_err(|e| Error::InvalidInput(format!("manifest lists {}: {e}", f.path)))?
                .len();
            if len != f.bytes {
                return Err(Error::InvalidInput(format!("{}: {} bytes, manifest says {}", f.path, len, f.bytes)));
            }
        }
        for s in &self.snapshots {
            if !dir.join(&s.file).is_file() {
                return Err(Error::InvalidInput(format!("missing checkpoint {}", s.file)));
            }
        }
        Ok(())
    }
}
