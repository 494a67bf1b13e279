use std::fmt::Display;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::kv::{render, KeyValues};
use crate::io::Dataset;
use crate::linalg::{sample_ginibre, seeded, ComplexMatrix, Field, C64};

/// Weight on the first listed channel of an anomaly.
pub const EPICENTER_WEIGHT: f64 = 1.0;
/// Weight on every other listed channel.
pub const NEIGHBOR_WEIGHT: f64 = 0.5;

pub const DEFAULT_SNR: f64 = 10_000.0;
pub const DEFAULT_BASE: f64 = 1.0;

/// Additive disturbance on a set of channels (1-based, epicenter first).
/// Levels are `from` before the change and `to` after it.
#[derive(Debug, Clone, PartialEq)]
pub enum Anomaly {
    None,
    Step {
        t0: usize,
        from: f64,
        to: f64,
        channels: Vec<usize>,
    },
    /// Held at `from` before `t0`, linear on `[t0, t1]`, held at `to` after.
    Ramp {
        t0: usize,
        t1: usize,
        from: f64,
        to: f64,
        channels: Vec<usize>,
    },
}

impl Anomaly {
    fn kind(&self) -> &'static str {
        match self {
            Anomaly::None => "none",
            Anomaly::Step { .. } => "step",
            Anomaly::Ramp { .. } => "ramp",
        }
    }

    fn channels(&self) -> &[usize] {
        match self {
            Anomaly::None => &[],
            Anomaly::Step { channels, .. } | Anomaly::Ramp { channels, .. } => channels,
        }
    }

    /// Anomaly level at 1-based sample `t`.
    pub fn level(&self, t: usize) -> f64 {
        match *self {
            Anomaly::None => 0.0,
            Anomaly::Step { t0, from, to, .. } => {
                if t < t0 {
                    from
                } else {
                    to
                }
            }
            Anomaly::Ramp { t0, t1, from, to, .. } => {
                if t <= t0 {
                    from
                } else if t >= t1 {
                    to
                } else {
                    from + (to - from) * (t - t0) as f64 / (t1 - t0) as f64
                }
            }
        }
    }

    /// Response weight of 0-based channel `i`.
    pub fn weight(&self, i: usize) -> f64 {
        match self.channels().iter().position(|&c| c == i + 1) {
            Some(0) => EPICENTER_WEIGHT,
            Some(_) => NEIGHBOR_WEIGHT,
            None => 0.0,
        }
    }
}

/// Everything needed to regenerate a synthetic stream.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub p: usize,
    pub samples: usize,
    /// One level for every channel, or one per channel.
    pub base: Vec<f64>,
    pub anomaly: Anomaly,
    pub snr: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn pure_noise(p: usize, samples: usize, seed: u64) -> Self {
        Self {
            p,
            samples,
            base: vec![DEFAULT_BASE],
            anomaly: Anomaly::None,
            snr: DEFAULT_SNR,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.p == 0 || self.samples == 0 {
            return bad("p and N must be positive".into());
        }
        if !(self.snr > 0.0 && self.snr.is_finite()) {
            return bad(format!("snr must be positive, got {}", self.snr));
        }
        if self.base.len() != 1 && self.base.len() != self.p {
            return bad(format!("base needs 1 or {} values, got {}", self.p, self.base.len()));
        }
        if self.base.iter().any(|b| !b.is_finite()) {
            return bad("base levels must be finite".into());
        }
        let (t0, t1) = match self.anomaly {
            Anomaly::None => return Ok(()),
            Anomaly::Step { t0, .. } => (t0, t0),
            Anomaly::Ramp { t0, t1, .. } => (t0, t1),
        };
        if !(1 <= t0 && t0 <= t1 && t1 <= self.samples) {
            return bad(format!(
                "anomaly interval [{t0}, {t1}] must satisfy 1 <= t0 <= t1 <= N = {}",
                self.samples
            ));
        }
        let channels = self.anomaly.channels();
        if channels.is_empty() {
            return bad("anomaly.channels must list at least one channel".into());
        }
        if let Some(c) = channels.iter().find(|&&c| c == 0 || c > self.p) {
            return bad(format!("anomaly channel {c} outside 1..={}", self.p));
        }
        for (k, c) in channels.iter().enumerate() {
            if channels[..k].contains(c) {
                return bad(format!("anomaly channel {c} listed twice"));
            }
        }
        Ok(())
    }

    pub fn base_level(&self, i: usize) -> f64 {
        if self.base.len() == 1 {
            self.base[0]
        } else {
            self.base[i]
        }
    }

    /// The noiseless `p x N` signal.
    pub fn signal(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.p, self.samples, |i, j| {
            C64::new(self.base_level(i) + self.anomaly.weight(i) * self.anomaly.level(j + 1), 0.0)
        })
    }

    pub fn to_kv_string(&self) -> String {
        let mut pairs: Vec<(&str, String)> = vec![
            ("p", self.p.to_string()),
            ("N", self.samples.to_string()),
            ("base", join(&self.base)),
            ("anomaly.kind", self.anomaly.kind().into()),
        ];
        match &self.anomaly {
            Anomaly::None => {}
            Anomaly::Step { t0, from, to, channels } => {
                pairs.push(("anomaly.t0", t0.to_string()));
                pairs.push(("anomaly.magnitude", format!("{from}->{to}")));
                pairs.push(("anomaly.channels", join(channels)));
            }
            Anomaly::Ramp {
                t0,
                t1,
                from,
                to,
                channels,
            } => {
                pairs.push(("anomaly.t0", t0.to_string()));
                pairs.push(("anomaly.t1", t1.to_string()));
                pairs.push(("anomaly.magnitude", format!("{from}->{to}")));
                pairs.push(("anomaly.channels", join(channels)));
            }
        }
        pairs.push(("snr", self.snr.to_string()));
        pairs.push(("seed", self.seed.to_string()));
        render(&pairs)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        Self::from_kv(KeyValues::parse(text, path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_kv(KeyValues::load(path)?)
    }

    fn from_kv(mut kv: KeyValues) -> Result<Self> {
        let p: usize = kv.require("p")?;
        let samples: usize = kv.require("N")?;
        let base = match kv.raw("base") {
            None => vec![DEFAULT_BASE],
            Some((v, line)) => split_list(&v).map_err(|m| kv.error(line, format!("base: {m}")))?,
        };
        let kind = kv.get::<String>("anomaly.kind")?.unwrap_or_else(|| "none".into());
        let anomaly = match kind.as_str() {
            "none" => Anomaly::None,
            "step" | "ramp" => {
                let t0: usize = kv.require("anomaly.t0")?;
                let (mag, line) = kv
                    .raw("anomaly.magnitude")
                    .ok_or_else(|| kv.error(0, "missing required key `anomaly.magnitude`".into()))?;
                let (from, to) = parse_magnitude(&mag).map_err(|m| kv.error(line, format!("anomaly.magnitude: {m}")))?;
                let (ch, line) = kv
                    .raw("anomaly.channels")
                    .ok_or_else(|| kv.error(0, "missing required key `anomaly.channels`".into()))?;
                let channels = split_list(&ch).map_err(|m| kv.error(line, format!("anomaly.channels: {m}")))?;
                if kind == "step" {
                    Anomaly::Step { t0, from, to, channels }
                } else {
                    Anomaly::Ramp {
                        t0,
                        t1: kv.require("anomaly.t1")?,
                        from,
                        to,
                        channels,
                    }
                }
            }
            other => return Err(kv.error(0, format!("anomaly.kind must be none, step or ramp, got `{other}`"))),
        };
        let snr = kv.get("snr")?.unwrap_or(DEFAULT_SNR);
        let seed = kv.get("seed")?.unwrap_or(0);
        kv.finish()?;
        let spec = Self {
            p,
            samples,
            base,
            anomaly,
            snr,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn join<T: Display>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn split_list<T: std::str::FromStr>(s: &str) -> std::result::Result<Vec<T>, String> {
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| format!("cannot parse `{}`", x.trim())))
        .collect()
}

/// `"b"` means `0 -> b`; `"a->b"` is explicit.
fn parse_magnitude(s: &str) -> std::result::Result<(f64, f64), String> {
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("cannot parse `{}`", x.trim()));
    match s.split_once("->") {
        Some((a, b)) => Ok((num(a)?, num(b)?)),
        None => Ok((0.0, num(s)?)),
    }
}

/// Ground truth written next to a simulated dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    pub kind: String,
    pub t0: Option<usize>,
    pub t1: Option<usize>,
    pub channels: Vec<usize>,
    pub snr: f64,
    pub gamma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub dataset: Dataset,
    pub truth: GroundTruth,
    pub signal: ComplexMatrix,
    pub noise: ComplexMatrix,
}

/// `sqrt(Tr(D D^H) / (Tr(E E^H) * snr))`.
pub fn noise_scale_gamma(d: &ComplexMatrix, e: &ComplexMatrix, snr: f64) -> Result<f64> {
    if (d.rows(), d.cols()) != (e.rows(), e.cols()) {
        return Err(Error::Dimension(format!(
            "signal is {}x{} but noise is {}x{}",
            d.rows(),
            d.cols(),
            e.rows(),
            e.cols()
        )));
    }
    if !(snr > 0.0) {
        return Err(Error::Config(format!("snr must be positive, got {snr}")));
    }
    let e_energy = e.frobenius_norm().powi(2);
    if e_energy <= 0.0 {
        return Err(Error::Config("noise matrix has zero energy".into()));
    }
    Ok((d.frobenius_norm().powi(2) / (e_energy * snr)).sqrt())
}

/// Signal plus `gamma E` with `E` standard real Gaussian drawn from the
/// spec's seed.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.validate()?;
    let signal = spec.signal();
    let noise = sample_ginibre(spec.p, spec.samples, &mut seeded(spec.seed), Field::Real);
    let gamma = noise_scale_gamma(&signal, &noise, spec.snr)?;
    let values = signal.add(&noise.scale_real(gamma))?;
    let (t0, t1) = match spec.anomaly {
        Anomaly::None => (None, None),
        Anomaly::Step { t0, .. } => (Some(t0), Some(spec.samples)),
        Anomaly::Ramp { t0, t1, .. } => (Some(t0), Some(t1)),
    };
    Ok(Scenario {
        dataset: Dataset::from_matrix(values),
        truth: GroundTruth {
            kind: spec.anomaly.kind().into(),
            t0,
            t1,
            channels: spec.anomaly.channels().to_vec(),
            snr: spec.snr,
            gamma,
            seed: spec.seed,
        },
        signal,
        noise,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn step(t0: usize) -> ScenarioSpec {
        ScenarioSpec {
            anomaly: Anomaly::Step {
                t0,
                from: 0.0,
                to: 0.5,
                channels: vec![3, 1, 4],
            },
            ..ScenarioSpec::pure_noise(6, 20, 11)
        }
    }

    #[test]
    fn gamma_examples() {
        let d = ComplexMatrix::from_real(1, 1, &[10.0]).unwrap();
        let e = ComplexMatrix::from_real(1, 1, &[10.0]).unwrap();
        assert!((noise_scale_gamma(&d, &e, 10_000.0).unwrap() - 0.01).abs() < 1e-15);
        assert!((noise_scale_gamma(&d, &e, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let g1 = noise_scale_gamma(&d, &e, 7.0).unwrap();
        let g2 = noise_scale_gamma(&d.scale_real(2.0), &e, 7.0).unwrap();
        assert!((g2 - 2.0 * g1).abs() < 1e-15);
        assert!(noise_scale_gamma(&d, &ComplexMatrix::zeros(1, 1), 1.0).is_err());
    }

    #[test]
    fn snr_identity_holds() {
        let s = generate_scenario(&step(8)).unwrap();
        let noisy = s.dataset.values().sub(&s.signal).unwrap();
        let ratio = s.signal.frobenius_norm().powi(2) / noisy.frobenius_norm().powi(2);
        assert!((ratio / 10_000.0 - 1.0).abs() < 1e-10);
        assert!((noisy.distance(&s.noise.scale_real(s.truth.gamma))) < 1e-15);
    }

    #[test]
    fn step_profile_and_weights() {
        let spec = step(8);
        let d = spec.signal();
        // channel 3 is the epicenter, 1 and 4 neighbors, 2 untouched
        assert_eq!(d[(2, 6)].re, 1.0);
        assert_eq!(d[(2, 7)].re, 1.5);
        assert_eq!(d[(0, 19)].re, 1.25);
        assert_eq!(d[(3, 7)].re, 1.25);
        assert_eq!(d[(1, 19)].re, 1.0);
    }

    #[test]
    fn ramp_profile() {
        let a = Anomaly::Ramp {
            t0: 5,
            t1: 9,
            from: 20.0,
            to: 70.0,
            channels: vec![1],
        };
        let levels: Vec<f64> = (1..=11).map(|t| a.level(t)).collect();
        assert_eq!(levels, vec![20.0, 20.0, 20.0, 20.0, 20.0, 32.5, 45.0, 57.5, 70.0, 70.0, 70.0]);
    }

    #[test]
    fn deterministic_by_seed() {
        let a = generate_scenario(&step(8)).unwrap();
        let b = generate_scenario(&step(8)).unwrap();
        assert_eq!(a.dataset.to_csv_string(), b.dataset.to_csv_string());
        let mut other = step(8);
        other.seed = 12;
        assert_ne!(generate_scenario(&other).unwrap().dataset, a.dataset);
        assert_eq!(a.truth.t0, Some(8));
    }

    #[test]
    fn invalid_specs() {
        assert!(step(0).validate().is_err());
        assert!(step(21).validate().is_err());
        let mut s = step(3);
        s.anomaly = Anomaly::Ramp {
            t0: 10,
            t1: 4,
            from: 0.0,
            to: 1.0,
            channels: vec![1],
        };
        assert!(s.validate().is_err());
        let mut s = step(3);
        s.snr = 0.0;
        assert!(s.validate().is_err());
        let mut s = step(3);
        s.base = vec![1.0, 2.0];
        assert!(s.validate().is_err());
        let mut s = step(3);
        s.anomaly = Anomaly::Step {
            t0: 3,
            from: 0.0,
            to: 1.0,
            channels: vec![7],
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn parse_documented_keys() {
        let text = "p = 4\nN = 30\nbase = 1,2,3,4\nanomaly.kind = ramp\nanomaly.t0 = 10\nanomaly.t1 = 20\n\
                    anomaly.magnitude = 20->70\nanomaly.channels = 2,3\nsnr = 1000\nseed = 5\n";
        let s = ScenarioSpec::parse(text, Path::new("s.txt")).unwrap();
        assert_eq!(s.base, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(
            s.anomaly,
            Anomaly::Ramp {
                t0: 10,
                t1: 20,
                from: 20.0,
                to: 70.0,
                channels: vec![2, 3]
            }
        );
        let s = ScenarioSpec::parse(
            "p=3\nN=9\nanomaly.kind=step\nanomaly.t0=4\nanomaly.magnitude=0.5\nanomaly.channels=1\n",
            Path::new("s.txt"),
        )
        .unwrap();
        assert_eq!(s.anomaly.level(3), 0.0);
        assert_eq!(s.anomaly.level(4), 0.5);
        assert_eq!(s.snr, DEFAULT_SNR);
        let e = ScenarioSpec::parse("p=3\nN=9\nanomaly.kind=step\nanomaly.t0=12\nanomaly.magnitude=1\nanomaly.channels=1\n", Path::new("s.txt"));
        assert!(e.is_err());
        assert!(ScenarioSpec::parse("p=3\nN=9\nbogus=1\n", Path::new("s.txt")).is_err());
    }

    fn any_spec() -> impl Strategy<Value = ScenarioSpec> {
        (1usize..20, 1usize..200, any::<u64>(), 0.5f64..1e5, -10.0f64..10.0, -10.0f64..10.0, 0u8..3)
            .prop_flat_map(|(p, n, seed, snr, a, b, kind)| {
                (Just((p, n, seed, snr, a, b, kind)), 1..=n, 1..=n, proptest::sample::subsequence((1..=p).collect::<Vec<_>>(), 1..=p), proptest::collection::vec(-5.0f64..5.0, p))
            })
            .prop_map(|((p, n, seed, snr, a, b, kind), x, y, channels, per_channel)| {
                let (t0, t1) = (x.min(y), x.max(y));
                let anomaly = match kind {
                    0 => Anomaly::None,
                    1 => Anomaly::Step { t0, from: a, to: b, channels },
                    _ => Anomaly::Ramp { t0, t1, from: a, to: b, channels },
                };
                let base = if seed % 2 == 0 { vec![a] } else { per_channel };
                ScenarioSpec { p, samples: n, base, anomaly, snr, seed }
            })
    }

    proptest! {
        #[test]
        fn spec_text_round_trip(spec in any_spec()) {
            let text = spec.to_kv_string();
            let back = ScenarioSpec::parse(&text, Path::new("s.txt")).unwrap();
            prop_assert_eq!(back, spec);
        }
    }
}
