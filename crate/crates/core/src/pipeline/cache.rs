//! Content-hash stamps that let stages skip work whose inputs are unchanged.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const STAMP_DIR: &str = ".envsynth/stamps";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageStamp {
    pub stage: String,
    pub key: String,
    /// Output path (relative to the workspace root) → content hash.
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Run,
    Cached,
}

/// Every regular file under `dir`, sorted. A missing directory is empty.
pub fn list_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    if !dir.exists() {
        return Ok(out);
    }
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| Error::io(&d, e))? {
            let path = entry.map_err(|e| Error::io(&d, e))?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn hash_file(path: &Path) -> Result<String> {
    let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&data)))
}

/// Hash of file names (relative to `root`) and contents, in the given order.
pub fn hash_files(root: &Path, files: &[PathBuf]) -> Result<String> {
    let mut h = Sha256::new();
    for f in files {
        let rel = f.strip_prefix(root).unwrap_or(f);
        h.update(rel.to_string_lossy().as_bytes());
        h.update([0]);
        h.update(hash_file(f)?.as_bytes());
    }
    Ok(hex::encode(h.finalize()))
}

/// Stage key from its settings and an input hash.
pub fn stage_key(stage: &str, settings: &serde_json::Value, inputs: &str) -> String {
    let text = serde_json::json!({ "stage": stage, "settings": settings, "inputs": inputs }).to_string();
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn stamp_path(root: &Path, stage: &str) -> PathBuf {
    root.join(STAMP_DIR).join(format!("{stage}.json"))
}

pub fn read_stamp(root: &Path, stage: &str) -> Result<Option<StageStamp>> {
    let p = stamp_path(root, stage);
    if !p.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
    serde_json::from_str(&text).map(Some).map_err(|e| Error::Parse {
        path: p,
        line: e.line(),
        message: e.to_string(),
    })
}

/// Decide whether `stage` must run. A stamp with a different key is a
/// staleness error unless `force` is set; a matching key with missing or
/// edited outputs reruns the stage.
/// With `force` the stage always runs.
pub fn decide(root: &Path, stage: &str, key: &str, force: bool) -> Result<Decision> {
    if force {
        return Ok(Decision::Run);
    }
    let Some(stamp) = read_stamp(root, stage)? else {
        return Ok(Decision::Run);
    };
    if stamp.key != key {
        return Err(Error::Stale {
            stage: stage.into(),
            detail: "inputs or settings differ from the cached run".into(),
        });
    }
    for (rel, want) in &stamp.outputs {
        let p = root.join(rel);
        if !p.exists() || hash_file(&p)? != *want {
            return Ok(Decision::Run);
        }
    }
    Ok(Decision::Cached)
}

pub fn record(root: &Path, stage: &str, key: &str, outputs: &[PathBuf]) -> Result<()> {
    let mut map = BTreeMap::new();
    for f in outputs {
        let rel = f.strip_prefix(root).unwrap_or(f).to_string_lossy().into_owned();
        map.insert(rel, hash_file(f)?);
    }
    let stamp = StageStamp {
        stage: stage.into(),
        key: key.into(),
        outputs: map,
    };
    let p = stamp_path(root, stage);
    let dir = p.parent().expect("stamp dir");
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let text = serde_json::to_string_pretty(&stamp).expect("stamp serializes") + "\n";
    std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
}
