//! Report envelope and atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::AnalysisConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const TOOL: &str = env!("CARGO_PKG_NAME");

/// SHA-256 of the canonical JSON of the effective configuration, with the
/// output directory blanked so it does not affect the digest.
pub fn config_digest(cfg: &AnalysisConfig) -> String {
    let mut canonical = cfg.clone();
    canonical.output.dir = String::new();
    let bytes = serde_json::to_vec(&canonical).expect("config serializes");
    format!("sha256:{}", hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config_digest: &'a str,
    pub seed: u64,
    pub result: &'a T,
}

/// Writes `bytes` to `dir/name` through a temporary file in the same
/// directory and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&target).map_err(|e| e.error)?;
    Ok(target)
}

pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report serializes");
    out.push(b'\n');
    out
}
