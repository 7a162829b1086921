//! Writing results: atomic file replacement and the per-run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{hex, version_string, ExperimentConfig};
use crate::run::RunOutput;

/// Writes `contents` to a temporary file next to `path`, then renames it over
/// `path`, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

/// The manifest describing one run: version, config, its hash, and a digest
/// of every file written.
pub fn manifest(config: &ExperimentConfig, out: &RunOutput) -> String {
    let files: Vec<_> = out
        .files
        .iter()
        .map(|(name, body)| json!({"path": name, "sha256": sha256_hex(body.as_bytes()), "bytes": body.len()}))
        .collect();
    let doc = json!({
        "version": version_string(),
        "config_hash": config.hash(),
        "config": config.to_json(),
        "files": files,
        "assertions_failed": out.failures,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("manifest serializes");
    s.push('\n');
    s
}

/// Writes every output file, the manifest, and a TOML copy of the config
/// that `josephus run --config` accepts. Returns the paths written.
pub fn write_run(dir: &Path, config: &ExperimentConfig, out: &RunOutput) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let stem = config.command.name();
    let mut written = Vec::new();
    for (name, body) in &out.files {
        let path = dir.join(name);
        write_atomic(&path, body.as_bytes())?;
        written.push(path);
    }
    let cfg_path = dir.join(format!("{stem}.config.toml"));
    write_atomic(&cfg_path, config.to_toml().as_bytes())?;
    written.push(cfg_path);
    let manifest_path = dir.join(format!("{stem}.manifest.json"));
    write_atomic(&manifest_path, manifest(config, out).as_bytes())?;
    written.push(manifest_path);
    Ok(written)
}
