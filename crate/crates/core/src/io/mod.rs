//! Files in and out: dataset CSV, key-value configs, record CSV, manifests
//! and the command implementations used by the `rmtad` binary.

pub mod commands;
mod config;
mod dataset;
pub mod format;
pub mod kv;

pub use config::{detector_config_to_kv, file_digest, load_detector_config, parse_detector_config, RunManifest};
pub use dataset::{Dataset, Timestamp};
