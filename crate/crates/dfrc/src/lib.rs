//! Experiment harness for hybrid DFRC beamformer design: TOML
//! configuration, CSV artifacts with a content manifest, and the
//! `pareto`, `se-vs-snr`, `beampattern`, `doa` and `design` experiments.

pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod plot;
pub mod table;

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use experiments::{run, Artifacts, Experiment};

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    config_hash: String,
    seeds: &'a [u64],
    version: &'a str,
    files: Vec<ManifestFile>,
}

#[derive(Debug, Serialize)]
struct ManifestFile {
    name: String,
    sha256: String,
}

fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes the artifacts, the resolved `config.toml` and `manifest.toml`
/// into `dir`.
pub fn emit(dir: &Path, experiment: Experiment, cfg: &ExperimentConfig, artifacts: &Artifacts) -> Result<()> {
    let mut files = Vec::new();
    let config_text = cfg.to_toml();
    let all = artifacts
        .files
        .iter()
        .map(|(n, b)| (n.as_str(), b.as_slice()))
        .chain([("config.toml", config_text.as_bytes())]);
    for (name, bytes) in all {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(Error::io(parent))?;
        }
        std::fs::write(&path, bytes).map_err(Error::io(&path))?;
        files.push(ManifestFile {
            name: name.to_string(),
            sha256: hex_sha256(bytes),
        });
    }
    let manifest = Manifest {
        experiment: experiment.name(),
        config_hash: cfg.hash(),
        seeds: &cfg.sweep.seeds,
        version: env!("CARGO_PKG_VERSION"),
        files,
    };
    let path = dir.join("manifest.toml");
    let text = toml::to_string(&manifest).expect("manifest serializes");
    std::fs::write(&path, text).map_err(Error::io(&path))
}
