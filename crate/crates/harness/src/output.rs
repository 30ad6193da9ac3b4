//! CSV results and the JSON run manifest written next to them.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde::Serialize;

use crate::error::{HarnessError, Result};

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io(dir))?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(io(path))?;
    Ok(())
}

/// `results.csv` gets `results.manifest.json`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

/// Commit of the working directory, or `"unknown"` outside a repository.
pub fn git_hash() -> String {
    Command::new("git")
        .args(["rev-parse", "HEAD"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .unwrap_or_else(|| "unknown".into())
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub command: &'a str,
    pub version: &'static str,
    pub git_hash: String,
    pub seed: u64,
    pub config: &'a C,
    pub rows: usize,
    /// Wall time per grid point where the command measures it.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub wall_time_s: Vec<f64>,
}

impl<'a, C: Serialize> Manifest<'a, C> {
    pub fn new(command: &'a str, seed: u64, config: &'a C, rows: usize) -> Self {
        Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            git_hash: git_hash(),
            seed,
            config,
            rows,
            wall_time_s: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(io(path))
    }
}
