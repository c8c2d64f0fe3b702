//! Content-hash manifest of stage inputs and outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult, IoContext};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stages: BTreeMap<String, StageEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageEntry {
    pub tool_version: String,
    /// Hash of the stage's config subset.
    pub config_hash: String,
    pub config: serde_json::Value,
    /// Input file → content hash; paths inside the output dir are relative.
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

pub fn hash_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> CliResult<String> {
    Ok(hash_bytes(&fs::read(path).at(path)?))
}

pub fn hash_json(value: &serde_json::Value) -> String {
    hash_bytes(value.to_string().as_bytes())
}

/// Path as recorded in the manifest: relative to `root` when inside it.
pub fn manifest_key(root: &Path, path: &Path) -> String {
    path.strip_prefix(root)
        .unwrap_or(path)
        .to_string_lossy()
        .replace('\\', "/")
}

pub fn key_path(root: &Path, key: &str) -> PathBuf {
    let p = Path::new(key);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        root.join(p)
    }
}

impl Manifest {
    pub fn load(root: &Path) -> CliResult<Self> {
        let path = root.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(Manifest::default());
        }
        let text = fs::read_to_string(&path).at(&path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Core(e.into()))
    }

    pub fn save(&self, root: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Core(e.into()))?;
        write_atomic(&root.join(MANIFEST_FILE), format!("{text}\n").as_bytes())
    }

    /// Why the recorded entry no longer matches, or `None` when it is fresh.
    pub fn staleness(&self, root: &Path, stage: &str, config_hash: &str) -> CliResult<Option<String>> {
        let Some(entry) = self.stages.get(stage) else {
            return Ok(Some("has not been run".into()));
        };
        if entry.tool_version != TOOL_VERSION {
            return Ok(Some(format!("was produced by {}", entry.tool_version)));
        }
        if entry.config_hash != config_hash {
            return Ok(Some("has a changed configuration".into()));
        }
        for (kind, files) in [("input", &entry.inputs), ("output", &entry.outputs)] {
            for (key, hash) in files {
                let path = key_path(root, key);
                if !path.is_file() {
                    return Ok(Some(format!("is missing {kind} {key}")));
                }
                if &hash_file(&path)? != hash {
                    return Ok(Some(format!("has a changed {kind} {key}")));
                }
            }
        }
        Ok(None)
    }
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).at(dir)?;
    }
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).at(&tmp)?;
    fs::rename(&tmp, path).at(path)
}

/// Every regular file below `dir`, sorted.
pub fn list_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).at(&d)? {
            let path = entry.at(&d)?.path();
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
