use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::args::Cli;

/// Bumped whenever the artifact layout changes.
pub const ARTIFACT_VERSION: u32 = 1;

/// Self-describing wrapper around every JSON result.
#[derive(Serialize)]
pub struct Artifact<'a, T: Serialize> {
    pub artifact_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub threads: usize,
    pub config: &'a Cli,
    pub wall_time_seconds: f64,
    pub result: T,
}

/// Writes `text` to `path`, or stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                out.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?)
}

/// `runs.csv` → `runs.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}
