//! Writing result files plus a hashed manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST: &str = "manifest.json";

/// One output file, held in memory until the experiment has finished.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    /// Path relative to the output directory, `/`-separated.
    pub rel_path: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(rel_path: impl Into<String>, bytes: impl Into<Vec<u8>>) -> Self {
        Artifact {
            rel_path: rel_path.into(),
            bytes: bytes.into(),
        }
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(&self.bytes))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

/// Writes every artifact under `out_dir`, then `manifest.json` listing each
/// one with its SHA-256. Nothing is written when `artifacts` is empty, and the
/// manifest is written last so its presence marks a complete output.
pub fn emit_artifacts(artifacts: &[Artifact], out_dir: &Path) -> Result<Manifest> {
    if artifacts.is_empty() {
        return Err(Error::EmptyResults);
    }
    let mut entries: Vec<ManifestEntry> = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        if a.rel_path.is_empty()
            || a.rel_path == MANIFEST
            || Path::new(&a.rel_path).is_absolute()
            || a.rel_path.split('/').any(|c| c == "..")
        {
            return Err(Error::invalid(format!(
                "bad artifact path {:?}",
                a.rel_path
            )));
        }
        entries.push(ManifestEntry {
            path: a.rel_path.clone(),
            sha256: a.sha256(),
            bytes: a.bytes.len() as u64,
        });
    }
    entries.sort_by(|a, b| a.path.cmp(&b.path));
    if entries.windows(2).any(|w| w[0].path == w[1].path) {
        return Err(Error::invalid("duplicate artifact path"));
    }

    // a stale manifest from an earlier run must not describe the new files
    let manifest_path = out_dir.join(MANIFEST);
    match std::fs::remove_file(&manifest_path) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => {
            return Err(Error::io(&manifest_path, e))
        }
        _ => {}
    }
    for a in artifacts {
        let path: PathBuf = out_dir.join(&a.rel_path);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(&path, &a.bytes).map_err(|e| Error::io(&path, e))?;
    }
    let manifest = Manifest { files: entries };
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    std::fs::write(&manifest_path, json).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest)
}

pub fn read_manifest(out_dir: &Path) -> Result<Manifest> {
    let path = out_dir.join(MANIFEST);
    let text = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
    Ok(serde_json::from_slice(&text)?)
}

/// Serializes `rows` as CSV with a header row taken from the field names.
pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner()
        .map_err(|e| Error::invalid(format!("csv buffer: {e}")))
}

/// One JSON document per line.
pub fn jsonl_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for row in rows {
        serde_json::to_writer(&mut out, row)?;
        out.push(b'\n');
    }
    Ok(out)
}
