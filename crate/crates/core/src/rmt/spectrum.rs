use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{RingLawModel, SpectralSample};
use crate::error::{Error, Result};
use crate::io::format::{format_number, parse_real};
use crate::linalg::C64;

/// Side-car record written next to every spectrum CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMetadata {
    pub c: f64,
    #[serde(rename = "L")]
    pub depth: usize,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub msr: f64,
}

impl SpectrumMetadata {
    pub fn new(sample: &SpectralSample, model: &RingLawModel) -> Self {
        Self {
            c: model.c,
            depth: model.depth,
            inner_radius: model.inner_radius(),
            outer_radius: model.outer_radius(),
            msr: sample.msr,
        }
    }
}

fn metadata_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes `re,im` rows to `csv` and the model metadata to `csv` with a
/// `.json` extension. Returns the metadata path.
pub fn write_spectrum(csv: &Path, sample: &SpectralSample, model: &RingLawModel) -> Result<PathBuf> {
    let mut text = String::from("re,im\n");
    for z in &sample.eigenvalues {
        text.push_str(&format_number(z.re));
        text.push(',');
        text.push_str(&format_number(z.im));
        text.push('\n');
    }
    fs::write(csv, text).map_err(|e| Error::io(csv, e))?;
    let meta = metadata_path(csv);
    let json = serde_json::to_string_pretty(&SpectrumMetadata::new(sample, model))?;
    fs::write(&meta, json + "\n").map_err(|e| Error::io(&meta, e))?;
    Ok(meta)
}

pub fn read_spectrum_csv(csv: &Path) -> Result<Vec<C64>> {
    let text = fs::read_to_string(csv).map_err(|e| Error::io(csv, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "re,im")) => {}
        _ => {
            return Err(Error::Parse {
                path: csv.into(),
                line: 1,
                message: "expected header `re,im`".into(),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let bad = |message: String| Error::Parse {
                path: csv.into(),
                line: i + 1,
                message,
            };
            let (re, im) = line
                .split_once(',')
                .ok_or_else(|| bad("expected two columns".into()))?;
            let re = parse_real(re).ok_or_else(|| bad(format!("bad number `{re}`")))?;
            let im = parse_real(im).ok_or_else(|| bad(format!("bad number `{im}`")))?;
            Ok(C64::new(re, im))
        })
        .collect()
}
