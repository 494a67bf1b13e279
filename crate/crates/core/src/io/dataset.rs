use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};

use super::format::{format_complex, parse_complex};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

/// A sample label: an integer index or an ISO-8601 instant. ISO values keep
/// their original text so files round-trip unchanged.
#[derive(Debug, Clone, PartialEq)]
pub enum Timestamp {
    Index(i64),
    Iso { text: String, instant: NaiveDateTime },
}

impl Timestamp {
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Ok(i) = s.parse::<i64>() {
            return Some(Timestamp::Index(i));
        }
        let instant = DateTime::parse_from_rfc3339(s)
            .map(|d| d.naive_utc())
            .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f"))
            .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S%.f"))
            .or_else(|_| NaiveDate::parse_from_str(s, "%Y-%m-%d").map(|d| d.and_hms_opt(0, 0, 0).unwrap()))
            .ok()?;
        Some(Timestamp::Iso {
            text: s.to_string(),
            instant,
        })
    }

    /// `true` when `self` is strictly earlier than `next` and both are of the
    /// same kind.
    fn precedes(&self, next: &Timestamp) -> bool {
        match (self, next) {
            (Timestamp::Index(a), Timestamp::Index(b)) => a < b,
            (Timestamp::Iso { instant: a, .. }, Timestamp::Iso { instant: b, .. }) => a < b,
            _ => false,
        }
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Timestamp::Index(i) => write!(f, "{i}"),
            Timestamp::Iso { text, .. } => f.write_str(text),
        }
    }
}

/// `p` channels by `N` samples. On disk every row is one sample and every
/// column after the first is a channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    channel_ids: Vec<String>,
    timestamps: Vec<Timestamp>,
    values: ComplexMatrix,
}

impl Dataset {
    pub fn new(channel_ids: Vec<String>, timestamps: Vec<Timestamp>, values: ComplexMatrix) -> Result<Self> {
        if values.rows() != channel_ids.len() || values.cols() != timestamps.len() {
            return Err(Error::Dimension(format!(
                "values are {}x{} but there are {} channels and {} timestamps",
                values.rows(),
                values.cols(),
                channel_ids.len(),
                timestamps.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = channel_ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(Error::Config(format!("duplicate channel id `{dup}`")));
        }
        if let Some(k) = (1..timestamps.len()).find(|&k| !timestamps[k - 1].precedes(&timestamps[k])) {
            return Err(Error::Config(format!(
                "timestamps must be strictly increasing: `{}` follows `{}`",
                timestamps[k],
                timestamps[k - 1]
            )));
        }
        Ok(Self {
            channel_ids,
            timestamps,
            values,
        })
    }

    /// Channels `ch1..chp` and sample indices `1..N`.
    pub fn from_matrix(values: ComplexMatrix) -> Self {
        let channel_ids = (1..=values.rows()).map(|i| format!("ch{i}")).collect();
        let timestamps = (1..=values.cols() as i64).map(Timestamp::Index).collect();
        Self {
            channel_ids,
            timestamps,
            values,
        }
    }

    pub fn channel_ids(&self) -> &[String] {
        &self.channel_ids
    }

    pub fn timestamps(&self) -> &[Timestamp] {
        &self.timestamps
    }

    pub fn values(&self) -> &ComplexMatrix {
        &self.values
    }

    pub fn channels(&self) -> usize {
        self.values.rows()
    }

    pub fn samples(&self) -> usize {
        self.values.cols()
    }

    pub fn is_complex(&self) -> bool {
        self.values.as_slice().iter().any(|z| z.im != 0.0)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, path)
    }

    /// Parses CSV text; `path` is only used in error messages.
    pub fn parse_csv(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut records = reader.records();
        let header = match records.next() {
            Some(r) => r.map_err(|e| err(1, e.to_string()))?,
            None => return Err(err(1, "empty file".into())),
        };
        if header.len() < 2 {
            return Err(err(1, "header needs a timestamp column and at least one channel".into()));
        }
        let channel_ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let p = channel_ids.len();
        let mut seen = HashSet::new();
        if let Some(dup) = channel_ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(err(1, format!("duplicate channel id `{dup}`")));
        }

        let mut timestamps: Vec<Timestamp> = Vec::new();
        let mut columns: Vec<C64> = Vec::new();
        for rec in records {
            let rec = rec.map_err(|e| err(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            if rec.iter().all(str::is_empty) {
                continue;
            }
            if rec.len() != p + 1 {
                return Err(err(line, format!("expected {} fields, found {}", p + 1, rec.len())));
            }
            let ts = Timestamp::parse(&rec[0]).ok_or_else(|| err(line, format!("column 1: bad timestamp `{}`", &rec[0])))?;
            if let Some(prev) = timestamps.last() {
                if !prev.precedes(&ts) {
                    return Err(err(line, format!("timestamp `{ts}` does not increase past `{prev}`")));
                }
            }
            timestamps.push(ts);
            for (k, cell) in rec.iter().enumerate().skip(1) {
                let z = parse_complex(cell).ok_or_else(|| err(line, format!("column {}: cannot parse `{cell}`", k + 1)))?;
                columns.push(z);
            }
        }
        let n = timestamps.len();
        if n == 0 {
            return Err(err(1, "no samples".into()));
        }
        // Rows on disk are samples; transpose into channels x samples.
        let values = ComplexMatrix::from_fn(p, n, |i, j| columns[j * p + i]);
        Ok(Self {
            channel_ids,
            timestamps,
            values,
        })
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        let mut header = vec!["timestamp".to_string()];
        header.extend(self.channel_ids.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        let mut row = Vec::with_capacity(self.channels() + 1);
        for (j, ts) in self.timestamps.iter().enumerate() {
            row.clear();
            row.push(ts.to_string());
            row.extend((0..self.channels()).map(|i| format_complex(self.values[(i, j)])));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn parse(text: &str) -> Result<Dataset> {
        Dataset::parse_csv(text, &PathBuf::from("mem.csv"))
    }

    #[test]
    fn two_channels_three_samples() {
        let d = parse("timestamp,a,b\n1,1.0,2\n2,3,4\n3,5,6\n").unwrap();
        assert_eq!((d.channels(), d.samples()), (2, 3));
        assert_eq!(d.values()[(0, 2)], C64::new(5.0, 0.0));
        assert_eq!(d.values()[(1, 0)], C64::new(2.0, 0.0));
        assert_eq!(d.channel_ids(), ["a", "b"]);
        assert!(!d.is_complex());
    }

    #[test]
    fn complex_cell() {
        let d = parse("timestamp,a\n1,1.5-2i\n").unwrap();
        assert_eq!(d.values()[(0, 0)], C64::new(1.5, -2.0));
        assert!(d.is_complex());
    }

    #[test]
    fn ragged_row_names_line() {
        let e = parse("timestamp,a,b\n1,1,2\n2,3\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        assert!(e.to_string().contains("mem.csv:3"));
    }

    #[test]
    fn bad_cell_names_line_and_column() {
        let e = parse("timestamp,a,b\n1,1,2\n2,3,x\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains(":3:") && msg.contains("column 3"), "{msg}");
    }

    #[test]
    fn duplicate_channel_and_time_order() {
        assert!(parse("timestamp,a,a\n1,1,2\n").is_err());
        let e = parse("timestamp,a\n2,1\n2,1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
        assert!(parse("timestamp,a\n1,1\n2020-01-01T00:00:00,2\n").is_err());
    }

    #[test]
    fn iso_timestamps() {
        let d = parse("timestamp,a\n2024-03-01T00:00:00Z,1\n2024-03-01T00:00:00.5Z,2\n2024-03-01T00:00:01+00:00,3\n").unwrap();
        assert_eq!(d.timestamps()[1].to_string(), "2024-03-01T00:00:00.5Z");
        assert!(parse("timestamp,a\n2024-03-01T03:00:00+02:00,1\n2024-03-01T00:00:00Z,2\n").is_err());
    }

    #[test]
    fn round_trip_text() {
        let text = "timestamp,x,y\n1,0.5,1-0.25i\n4,-2,3e-07\n";
        let d = parse(text).unwrap();
        assert_eq!(d.to_csv_string(), text);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        d.save_csv(&path).unwrap();
        assert_eq!(Dataset::load_csv(&path).unwrap(), d);
    }

    #[test]
    fn constructor_checks() {
        let v = ComplexMatrix::zeros(2, 2);
        let ts = vec![Timestamp::Index(1), Timestamp::Index(2)];
        assert!(Dataset::new(vec!["a".into()], ts.clone(), v.clone()).is_err());
        assert!(Dataset::new(vec!["a".into(), "a".into()], ts.clone(), v.clone()).is_err());
        let d = Dataset::from_matrix(v);
        assert_eq!(d.channel_ids(), ["ch1", "ch2"]);
        assert_eq!(d.timestamps(), ts.as_slice());
    }
}
