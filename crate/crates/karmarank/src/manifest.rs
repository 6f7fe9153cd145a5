//! Stage manifests: every pipeline stage records its config hash, seed,
//! and hashed inputs/outputs, and refuses to run when an upstream stage's
//! manifest is missing or stale.

use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileStamp {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub stage: String,
    pub config_hash: String,
    pub seed: u64,
    pub inputs: Vec<FileStamp>,
    pub outputs: Vec<FileStamp>,
    /// Stages whose manifests were verified before this one ran.
    pub upstream: Vec<String>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = std::fs::File::open(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(format!("{:x}", hasher.finalize()))
}

pub fn stamp(path: &Path) -> Result<FileStamp> {
    Ok(FileStamp {
        path: path.to_path_buf(),
        sha256: sha256_file(path)?,
    })
}

/// Stamps every regular file under a directory, sorted by path.
pub fn stamp_dir(dir: &Path) -> Result<Vec<FileStamp>> {
    let mut paths = Vec::new();
    collect_files(dir, &mut paths)?;
    paths.sort();
    paths.iter().map(|p| stamp(p)).collect()
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

impl Manifest {
    fn file_name(stage: &str) -> String {
        format!("{stage}.manifest.json")
    }

    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(out_dir.join(Self::file_name(&self.stage)), json)?;
        Ok(())
    }

    pub fn read(out_dir: &Path, stage: &str) -> Result<Manifest> {
        let path = out_dir.join(Self::file_name(stage));
        let text = std::fs::read_to_string(&path).map_err(|_| {
            Error::Data(format!(
                "missing manifest for stage `{stage}`; run `karmarank {stage}` first"
            ))
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

/// Verifies that `stage` ran with this exact config and that its recorded
/// outputs are still on disk unchanged. Returns the manifest on success.
pub fn require_upstream(out_dir: &Path, stage: &str, config_hash: &str) -> Result<Manifest> {
    let manifest = Manifest::read(out_dir, stage)?;
    if manifest.config_hash != config_hash {
        return Err(Error::Data(format!(
            "stale manifest for stage `{stage}`: config changed; rerun `karmarank {stage}`"
        )));
    }
    for out in &manifest.outputs {
        let current = sha256_file(&out.path).map_err(|_| {
            Error::Data(format!(
                "output {} of stage `{stage}` is missing; rerun `karmarank {stage}`",
                out.path.display()
            ))
        })?;
        if current != out.sha256 {
            return Err(Error::Data(format!(
                "output {} of stage `{stage}` changed on disk; rerun `karmarank {stage}`",
                out.path.display()
            )));
        }
    }
    Ok(manifest)
}
