use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::format::{format_number, parse_real};

pub const RECORD_HEADER: [&str; 7] = ["t", "msr", "eta", "eta_hat", "confidence", "anomaly", "error"];

/// Detector output at one sample. Fields stay `None` during warm-up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub t: usize,
    pub msr: Option<f64>,
    pub eta: Option<f64>,
    pub eta_hat: Option<f64>,
    pub confidence: Option<f64>,
    pub anomaly: Option<bool>,
    pub error: Option<String>,
}

impl DetectionRecord {
    pub fn empty(t: usize) -> Self {
        Self {
            t,
            msr: None,
            eta: None,
            eta_hat: None,
            confidence: None,
            anomaly: None,
            error: None,
        }
    }

    pub fn is_anomaly(&self) -> bool {
        self.anomaly == Some(true)
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

pub fn records_to_csv(records: &[DetectionRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RECORD_HEADER).expect("in-memory write");
    for r in records {
        w.write_record([
            r.t.to_string(),
            opt(r.msr),
            opt(r.eta),
            opt(r.eta_hat),
            r.confidence.map(|c| format!("{c:.6}")).unwrap_or_default(),
            r.anomaly.map(|a| if a { "1" } else { "0" }.to_string()).unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

pub fn write_records(path: &Path, records: &[DetectionRecord]) -> Result<()> {
    fs::write(path, records_to_csv(records)).map_err(|e| Error::io(path, e))
}

/// Reads a record CSV back. Numbers carry the precision they were written
/// with.
pub fn parse_records_csv(text: &str, path: &Path) -> Result<Vec<DetectionRecord>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let err = |line: u64, message: String| Error::Parse {
        path: path.into(),
        line: line as usize,
        message,
    };
    let header = reader.headers().map_err(|e| err(1, e.to_string()))?.clone();
    if header.iter().ne(RECORD_HEADER) {
        return Err(err(1, format!("expected header `{}`", RECORD_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |k: usize| -> Result<Option<f64>> {
            match &rec[k] {
                "" => Ok(None),
                s if s == "inf" => Ok(Some(f64::INFINITY)),
                s => parse_real(s)
                    .map(Some)
                    .ok_or_else(|| err(line, format!("column {}: bad number `{s}`", k + 1))),
            }
        };
        out.push(DetectionRecord {
            t: rec[0].parse().map_err(|_| err(line, format!("bad index `{}`", &rec[0])))?,
            msr: num(1)?,
            eta: num(2)?,
            eta_hat: num(3)?,
            confidence: num(4)?,
            anomaly: match &rec[5] {
                "" => None,
                "0" => Some(false),
                "1" => Some(true),
                s => return Err(err(line, format!("anomaly must be 0 or 1, got `{s}`"))),
            },
            error: (!rec[6].is_empty()).then(|| rec[6].to_string()),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut a = DetectionRecord::empty(199);
        let b = DetectionRecord {
            t: 300,
            msr: Some(0.75880123456),
            eta: Some(0.00123),
            eta_hat: Some(2.5),
            confidence: Some(0.98765432),
            anomaly: Some(true),
            error: None,
        };
        a.error = Some("dead channel(s) with zero variance: rows [1, 2]".into());
        let text = records_to_csv(&[a.clone(), b.clone()]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,msr,eta,eta_hat,confidence,anomaly,error");
        assert_eq!(lines[1], "199,,,,,,\"dead channel(s) with zero variance: rows [1, 2]\"");
        assert_eq!(lines[2], "300,0.758801235,0.00123,2.5,0.987654,1,");
        let back = parse_records_csv(&text, Path::new("r.csv")).unwrap();
        assert_eq!(back[0], a);
        assert_eq!(back[1].confidence, Some(0.987654));
        assert_eq!(back[1].anomaly, Some(true));
    }

    #[test]
    fn rejects_bad_header() {
        assert!(parse_records_csv("t,msr\n1,2\n", Path::new("r.csv")).is_err());
    }
}
