use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::kv::{render, KeyValues};
use crate::detector::DetectorConfig;
use crate::error::{Error, Result};

/// Reads a detector config file whose keys are the [`DetectorConfig`] field
/// names. Missing keys keep their defaults.
pub fn load_detector_config(path: &Path) -> Result<DetectorConfig> {
    parse_detector_config(&KeyValues::load(path)?)
}

pub fn parse_detector_config(kv: &KeyValues) -> Result<DetectorConfig> {
    let mut kv = kv.clone();
    let d = DetectorConfig::default();
    let cfg = DetectorConfig {
        window: kv.get("window")?.unwrap_or(d.window),
        depth: kv.get("depth")?.unwrap_or(d.depth),
        history: kv.get("history")?.unwrap_or(d.history),
        threshold: kv.get("threshold")?.unwrap_or(d.threshold),
        sigma_min: kv.get("sigma_min")?.unwrap_or(d.sigma_min),
        seed: kv.get("seed")?.unwrap_or(d.seed),
        jitter: kv.get("jitter")?.unwrap_or(d.jitter),
    };
    kv.finish()?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn detector_config_to_kv(cfg: &DetectorConfig) -> String {
    render(&[
        ("window", cfg.window.to_string()),
        ("depth", cfg.depth.to_string()),
        ("history", cfg.history.to_string()),
        ("threshold", cfg.threshold.to_string()),
        ("sigma_min", cfg.sigma_min.to_string()),
        ("seed", cfg.seed.to_string()),
        ("jitter", cfg.jitter.to_string()),
    ])
}

/// Hex SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Everything needed to repeat an `analyze` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub input: PathBuf,
    pub input_sha256: String,
    pub config: DetectorConfig,
    pub seed: u64,
    pub start: usize,
    pub end: usize,
    pub spectrum_at: Vec<usize>,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}
