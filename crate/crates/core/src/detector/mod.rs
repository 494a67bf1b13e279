//! The sliding-window detector. At every sample `t` the `L` windows ending
//! at `t - L + 1 ..= t` are standardized, replaced by their singular value
//! equivalents and multiplied; the MSR of the re-standardized product feeds
//! the increment `eta`, whose t-statistic over the last `T` increments gives
//! a two-sided confidence that is compared against a threshold.

mod record;
mod stats;

use std::collections::VecDeque;

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Dataset;
use crate::linalg::{ComplexMatrix, RandomSource};
use crate::rmt::{
    jitter_dead_rows, product, singular_value_equivalent, spectral_sample, standardize_product, standardize_rows,
    SpectralSample, DEFAULT_SIGMA_MIN,
};

pub use record::{parse_records_csv, records_to_csv, write_records, DetectionRecord, RECORD_HEADER};
pub use stats::{eta_stat, t_cdf, two_sided_confidence, DEGENERATE_SIGMA};

pub const DEFAULT_WINDOW: usize = 200;
pub const DEFAULT_HISTORY: usize = 100;
pub const DEFAULT_THRESHOLD: f64 = 0.98;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Window width `n`.
    pub window: usize,
    /// Product depth `L`.
    pub depth: usize,
    /// Increments `T` behind each confidence value.
    pub history: usize,
    pub threshold: f64,
    pub sigma_min: f64,
    pub seed: u64,
    /// Revive zero-variance channels with tiny noise instead of failing.
    pub jitter: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            depth: 1,
            history: DEFAULT_HISTORY,
            threshold: DEFAULT_THRESHOLD,
            sigma_min: DEFAULT_SIGMA_MIN,
            seed: 0,
            jitter: false,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::Config("window width must be positive".into()));
        }
        if self.depth == 0 {
            return Err(Error::Config("product depth must be at least 1".into()));
        }
        if self.history < 3 {
            return Err(Error::Config(format!("history length must be at least 3, got {}", self.history)));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Config(format!("threshold must lie in (0, 1), got {}", self.threshold)));
        }
        if !(self.sigma_min >= 0.0 && self.sigma_min.is_finite()) {
            return Err(Error::Config(format!("sigma_min must be a nonnegative number, got {}", self.sigma_min)));
        }
        Ok(())
    }

    /// Validates and checks the window against `p` channels.
    pub fn check(&self, p: usize) -> Result<()> {
        self.validate()?;
        if p == 0 || p > self.window {
            return Err(Error::Ratio {
                p,
                n: self.window,
                c: p as f64 / self.window as f64,
            });
        }
        Ok(())
    }

    /// First 1-based sample with an MSR value.
    pub fn first_msr(&self) -> usize {
        self.window + self.depth - 1
    }

    /// First 1-based sample with an increment.
    pub fn first_eta(&self) -> usize {
        self.first_msr() + 1
    }

    /// First 1-based sample with a confidence value.
    pub fn first_confidence(&self) -> usize {
        self.first_msr() + self.history
    }
}

/// Random source for the window ending at 1-based sample `t`: the master seed
/// selects the key and `t` the stream, so every window's draws are fixed no
/// matter which thread or in what order it is computed.
pub fn window_rng(seed: u64, t: usize) -> RandomSource {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t as u64);
    rng
}

/// Columns `t - n + 1 ..= t` (1-based) of the dataset.
pub fn extract_window(data: &Dataset, t: usize, n: usize) -> Result<ComplexMatrix> {
    if n == 0 || t < n || t > data.samples() {
        return Err(Error::OutOfRange(format!(
            "window of width {n} ending at t = {t} does not fit in {} samples",
            data.samples()
        )));
    }
    data.values().columns(t - n, t)
}

/// Singular value equivalent of the standardized window ending at `t`.
pub fn window_equivalent(data: &Dataset, t: usize, cfg: &DetectorConfig) -> Result<ComplexMatrix> {
    let mut rng = window_rng(cfg.seed, t);
    let mut x = extract_window(data, t, cfg.window)?;
    if cfg.jitter {
        x = jitter_dead_rows(&x, cfg.sigma_min, &mut rng);
    }
    let x = standardize_rows(&x, cfg.sigma_min)?;
    singular_value_equivalent(&x, &mut rng)
}

fn sample_from_equivalents(factors: &[ComplexMatrix], p: usize, cfg: &DetectorConfig) -> Result<SpectralSample> {
    let z = product(factors)?;
    let z = standardize_product(&z, cfg.sigma_min)?;
    spectral_sample(&z, p as f64 / cfg.window as f64, cfg.depth)
}

/// Spectrum of the standardized product at `t`, identical to the one behind
/// the record's MSR.
pub fn spectrum_at(data: &Dataset, t: usize, cfg: &DetectorConfig) -> Result<SpectralSample> {
    cfg.check(data.channels())?;
    if t < cfg.first_msr() || t > data.samples() {
        return Err(Error::OutOfRange(format!(
            "spectrum requested at t = {t}; valid range is {}..={}",
            cfg.first_msr(),
            data.samples()
        )));
    }
    let factors = (t + 1 - cfg.depth..=t)
        .map(|s| window_equivalent(data, s, cfg))
        .collect::<Result<Vec<_>>>()?;
    sample_from_equivalents(&factors, data.channels(), cfg)
}

/// Turns an MSR sequence into increments, t-statistics and decisions.
#[derive(Debug, Clone)]
pub struct EtaTracker {
    history: usize,
    threshold: f64,
    prev: Option<(usize, f64)>,
    etas: VecDeque<f64>,
}

impl EtaTracker {
    pub fn new(history: usize, threshold: f64) -> Self {
        Self {
            history,
            threshold,
            prev: None,
            etas: VecDeque::with_capacity(history),
        }
    }

    /// Folds the outcome at `t` into the record. Increments need MSR at two
    /// consecutive samples.
    pub fn push(&mut self, rec: &mut DetectionRecord) {
        let Some(msr) = rec.msr else {
            self.prev = None;
            return;
        };
        if let Some((pt, pm)) = self.prev {
            if pt + 1 == rec.t {
                let eta = (msr - pm).abs();
                rec.eta = Some(eta);
                if self.etas.len() == self.history {
                    self.etas.pop_front();
                }
                self.etas.push_back(eta);
                if self.etas.len() == self.history {
                    let (eta_hat, conf) = eta_stat(self.etas.make_contiguous());
                    rec.eta_hat = Some(eta_hat);
                    rec.confidence = Some(conf);
                    rec.anomaly = Some(conf >= self.threshold);
                }
            }
        }
        self.prev = Some((rec.t, msr));
    }
}

/// Streaming detector fed one sample index at a time. Equivalents of the
/// last `L` windows are cached so each step computes one new one.
pub struct DetectorState {
    cfg: DetectorConfig,
    p: usize,
    cache: VecDeque<(usize, std::result::Result<ComplexMatrix, String>)>,
    tracker: EtaTracker,
}

impl DetectorState {
    pub fn new(cfg: DetectorConfig, p: usize) -> Result<Self> {
        cfg.check(p)?;
        let tracker = EtaTracker::new(cfg.history, cfg.threshold);
        Ok(Self {
            cfg,
            p,
            cache: VecDeque::new(),
            tracker,
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.cfg
    }

    fn equivalent(&mut self, data: &Dataset, t: usize) -> std::result::Result<ComplexMatrix, String> {
        if let Some((_, r)) = self.cache.iter().find(|(s, _)| *s == t) {
            return r.clone();
        }
        let r = window_equivalent(data, t, &self.cfg).map_err(|e| e.to_string());
        self.cache.push_back((t, r.clone()));
        while self.cache.len() > self.cfg.depth {
            self.cache.pop_front();
        }
        r
    }

    /// Record for 1-based sample `t`. Failures land in the record's error
    /// field and the stream carries on.
    pub fn step(&mut self, data: &Dataset, t: usize) -> Result<DetectionRecord> {
        if data.channels() != self.p {
            return Err(Error::Dimension(format!(
                "detector set up for {} channels, dataset has {}",
                self.p,
                data.channels()
            )));
        }
        if t == 0 || t > data.samples() {
            return Err(Error::OutOfRange(format!("t = {t} outside 1..={}", data.samples())));
        }
        let mut rec = DetectionRecord::empty(t);
        if t >= self.cfg.first_msr() {
            let factors: std::result::Result<Vec<_>, String> =
                (t + 1 - self.cfg.depth..=t).map(|s| self.equivalent(data, s)).collect();
            match factors.and_then(|f| sample_from_equivalents(&f, self.p, &self.cfg).map_err(|e| e.to_string())) {
                Ok(s) => rec.msr = Some(s.msr),
                Err(e) => rec.error = Some(e),
            }
        }
        self.tracker.push(&mut rec);
        Ok(rec)
    }
}

/// Samples per parallel batch in [`run`].
const BATCH: usize = 64;

/// One record per `t` from `n + L - 1` to `N`. Window equivalents and MSR
/// values are computed in parallel batches; the output is identical to
/// stepping a [`DetectorState`] serially.
pub fn run(data: &Dataset, cfg: &DetectorConfig) -> Result<Vec<DetectionRecord>> {
    cfg.check(data.channels())?;
    let first = cfg.first_msr();
    let last = data.samples();
    if last < first {
        return Err(Error::OutOfRange(format!(
            "{last} samples are fewer than the {first} needed for one record (n + L - 1)"
        )));
    }
    let p = data.channels();
    let mut tracker = EtaTracker::new(cfg.history, cfg.threshold);
    let mut out = Vec::with_capacity(last - first + 1);
    let mut start = first;
    while start <= last {
        let end = (start + BATCH - 1).min(last);
        let lo = start + 1 - cfg.depth;
        let equivalents: Vec<std::result::Result<ComplexMatrix, String>> = (lo..=end)
            .into_par_iter()
            .map(|s| window_equivalent(data, s, cfg).map_err(|e| e.to_string()))
            .collect();
        let outcomes: Vec<std::result::Result<f64, String>> = (start..=end)
            .into_par_iter()
            .map(|t| {
                let factors = equivalents[t + 1 - cfg.depth - lo..=t - lo]
                    .iter()
                    .cloned()
                    .collect::<std::result::Result<Vec<_>, String>>()?;
                sample_from_equivalents(&factors, p, cfg)
                    .map(|s| s.msr)
                    .map_err(|e| e.to_string())
            })
            .collect();
        for (t, outcome) in (start..=end).zip(outcomes) {
            let mut rec = DetectionRecord::empty(t);
            match outcome {
                Ok(m) => rec.msr = Some(m),
                Err(e) => rec.error = Some(e),
            }
            tracker.push(&mut rec);
            out.push(rec);
        }
        start = end + 1;
    }
    Ok(out)
}

/// `(t, msr)` pairs with their increments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MsrSeries {
    pub points: Vec<(usize, f64)>,
}

impl MsrSeries {
    pub fn from_records(records: &[DetectionRecord]) -> Self {
        Self {
            points: records.iter().filter_map(|r| r.msr.map(|m| (r.t, m))).collect(),
        }
    }

    /// `(t, |msr(t) - msr(t - 1)|)` wherever both samples are present.
    pub fn etas(&self) -> Vec<(usize, f64)> {
        self.points
            .windows(2)
            .filter(|w| w[1].0 == w[0].0 + 1)
            .map(|w| (w[1].0, (w[1].1 - w[0].1).abs()))
            .collect()
    }

    pub fn get(&self, t: usize) -> Option<f64> {
        self.points
            .binary_search_by_key(&t, |&(s, _)| s)
            .ok()
            .map(|k| self.points[k].1)
    }

    /// Mean MSR over `lo..=hi`, skipping missing samples.
    pub fn mean_over(&self, lo: usize, hi: usize) -> Option<f64> {
        let vals: Vec<f64> = self.points.iter().filter(|(t, _)| (lo..=hi).contains(t)).map(|p| p.1).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sample_ginibre, seeded, Field, C64};

    fn noise(p: usize, n: usize, seed: u64) -> Dataset {
        Dataset::from_matrix(sample_ginibre(p, n, &mut seeded(seed), Field::Real))
    }

    fn cfg(window: usize, depth: usize, history: usize) -> DetectorConfig {
        DetectorConfig {
            window,
            depth,
            history,
            ..DetectorConfig::default()
        }
    }

    #[test]
    fn window_boundaries() {
        let d = Dataset::from_matrix(ComplexMatrix::from_fn(2, 6, |i, j| C64::new((10 * i + j) as f64, 0.0)));
        let w = extract_window(&d, 3, 3).unwrap();
        assert_eq!(w.row(1).iter().map(|z| z.re).collect::<Vec<_>>(), vec![10.0, 11.0, 12.0]);
        let w = extract_window(&d, 4, 3).unwrap();
        assert_eq!(w.row(0).iter().map(|z| z.re).collect::<Vec<_>>(), vec![1.0, 2.0, 3.0]);
        assert!(extract_window(&d, 2, 3).is_err());
        assert!(extract_window(&d, 7, 3).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(cfg(10, 1, 2).validate().is_err());
        assert!(cfg(10, 0, 5).validate().is_err());
        assert!(DetectorConfig { threshold: 1.0, ..cfg(10, 1, 5) }.validate().is_err());
        assert!(matches!(cfg(10, 1, 5).check(12), Err(Error::Ratio { p: 12, n: 10, .. })));
        cfg(10, 1, 5).check(10).unwrap();
    }

    #[test]
    fn warm_up_fields() {
        let (n, l, t_hist) = (12, 2, 4);
        let c = cfg(n, l, t_hist);
        let d = noise(6, 30, 1);
        let mut st = DetectorState::new(c.clone(), 6).unwrap();
        for t in 1..=30 {
            let r = st.step(&d, t).unwrap();
            assert_eq!(r.msr.is_some(), t >= n + l - 1, "t={t}");
            assert_eq!(r.eta.is_some(), t >= n + l, "t={t}");
            assert_eq!(r.confidence.is_some(), t >= n + l - 1 + t_hist, "t={t}");
            if let Some(conf) = r.confidence {
                assert_eq!(r.anomaly, Some(conf >= c.threshold));
            }
        }
        assert_eq!((c.first_msr(), c.first_eta(), c.first_confidence()), (13, 14, 17));
    }

    #[test]
    fn run_matches_serial_steps() {
        let c = cfg(10, 3, 5);
        let d = noise(5, 90, 2);
        let records = run(&d, &c).unwrap();
        assert_eq!(records.first().unwrap().t, 12);
        assert_eq!(records.len(), 90 - 12 + 1);
        let mut st = DetectorState::new(c, 5).unwrap();
        let serial: Vec<_> = (12..=90).map(|t| st.step(&d, t).unwrap()).collect();
        assert_eq!(records, serial);
    }

    #[test]
    fn single_record_when_exactly_enough_samples() {
        let c = cfg(10, 2, 5);
        let r = run(&noise(4, 11, 3), &c).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].msr.is_some() && r[0].eta.is_none());
        assert!(run(&noise(4, 10, 3), &c).is_err());
    }

    #[test]
    fn dead_channel_becomes_error_record() {
        let mut v = sample_ginibre(3, 30, &mut seeded(4), Field::Real);
        for j in 9..17 {
            v.row_mut(1)[j] = C64::new(2.0, 0.0);
        }
        let d = Dataset::from_matrix(v);
        let records = run(&d, &cfg(5, 1, 3)).unwrap();
        let bad: Vec<usize> = records.iter().filter(|r| r.error.is_some()).map(|r| r.t).collect();
        assert_eq!(bad, (14..=17).collect::<Vec<_>>());
        assert!(records.iter().find(|r| r.t == 18).unwrap().eta.is_none());
        assert!(records.iter().find(|r| r.t == 19).unwrap().eta.is_some());
        let jittered = run(&d, &DetectorConfig { jitter: true, ..cfg(5, 1, 3) }).unwrap();
        assert!(jittered.iter().all(|r| r.error.is_none()));
    }

    #[test]
    fn window_rng_streams_differ() {
        use rand::Rng;
        let a: u64 = window_rng(7, 100).random();
        let b: u64 = window_rng(7, 101).random();
        let c: u64 = window_rng(7, 100).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn spectrum_matches_record() {
        let c = cfg(10, 2, 3);
        let d = noise(6, 30, 5);
        let records = run(&d, &c).unwrap();
        let s = spectrum_at(&d, 20, &c).unwrap();
        assert_eq!(Some(s.msr), records.iter().find(|r| r.t == 20).unwrap().msr);
        assert!(spectrum_at(&d, 10, &c).is_err());
    }

    #[test]
    fn msr_series_increments() {
        let s = MsrSeries {
            points: vec![(5, 0.7), (6, 0.75), (8, 0.6), (9, 0.5)],
        };
        let e = s.etas();
        assert_eq!(e.len(), 2);
        assert!((e[0].1 - 0.05).abs() < 1e-12 && e[1].0 == 9);
        assert_eq!(s.get(8), Some(0.6));
        assert!((s.mean_over(5, 6).unwrap() - 0.725).abs() < 1e-12);
    }
}
