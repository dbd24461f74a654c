//! Run manifests written beside every command's outputs.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// How every random draw is derived from the user's seed.
const RNG_NOTE: &str = "ChaCha20 keyed by (seed, domain); stream index per item. \
Domains: 1 mixture means/covariances, 2 class weights, 3 samples (stream = row), \
4 forest trees (stream = tree), 5 single tree, 6 fold shuffle, 7 sweep split.";

#[derive(Debug, Serialize)]
pub struct RunManifest<'a, C: Serialize> {
    pub command: &'a str,
    pub version: &'static str,
    pub started_unix: f64,
    pub jobs: Option<usize>,
    pub seeds: Vec<u64>,
    pub rng: &'static str,
    pub inputs: Vec<&'a Path>,
    pub outputs: Vec<&'a Path>,
    pub config: &'a C,
    /// Command-specific results such as training accuracy.
    pub results: Value,
}

impl<'a, C: Serialize> RunManifest<'a, C> {
    pub fn new(command: &'a str, config: &'a C, started: SystemTime, jobs: Option<usize>) -> Self {
        Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            started_unix: started
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs_f64())
                .unwrap_or(0.0),
            jobs,
            seeds: Vec::new(),
            rng: RNG_NOTE,
            inputs: Vec::new(),
            outputs: Vec::new(),
            config,
            results: Value::Null,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}

/// `out.csv` gets `out.csv.manifest.json`.
pub fn beside(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}
