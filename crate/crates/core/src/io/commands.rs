//! The work behind each `rmtad` subcommand, kept here so it can be tested
//! and called without a process boundary.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{file_digest, RunManifest};
use super::Dataset;
use crate::detector::{run, spectrum_at, write_records, DetectionRecord, DetectorConfig};
use crate::error::{Error, Result};
use crate::linalg::{sample_ginibre, Field};
use crate::rmt::{analyze_windows, ring_conformance, write_spectrum, ConformanceReport, RingLawModel, DEFAULT_MARGIN};
use crate::synth::{generate_scenario, ScenarioSpec};

pub const RECORDS_FILE: &str = "records.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Process exit codes shared by every subcommand.
pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_ANOMALY: i32 = 2;

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub input: PathBuf,
    pub config: DetectorConfig,
    pub spectrum_at: Vec<usize>,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
    /// Digest the input must have, when repeating a recorded run.
    pub expected_digest: Option<String>,
}

impl AnalyzeOptions {
    /// Options that repeat the run described by `manifest`.
    pub fn from_manifest(manifest: &RunManifest, out_dir: PathBuf) -> Self {
        Self {
            input: manifest.input.clone(),
            config: manifest.config.clone(),
            spectrum_at: manifest.spectrum_at.clone(),
            out_dir,
            threads: None,
            expected_digest: Some(manifest.input_sha256.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumOutput {
    pub t: usize,
    pub csv: PathBuf,
    pub metadata: PathBuf,
    pub report: ConformanceReport,
}

#[derive(Debug, Clone)]
pub struct AnalyzeOutcome {
    pub records: Vec<DetectionRecord>,
    pub records_path: PathBuf,
    pub manifest_path: PathBuf,
    pub spectra: Vec<SpectrumOutput>,
}

impl AnalyzeOutcome {
    pub fn anomalies(&self) -> usize {
        self.records.iter().filter(|r| r.is_anomaly()).count()
    }

    pub fn errors(&self) -> usize {
        self.records.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn exit_code(&self) -> i32 {
        if self.anomalies() > 0 {
            EXIT_ANOMALY
        } else {
            EXIT_CLEAN
        }
    }
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {k} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn cmd_analyze(opts: &AnalyzeOptions) -> Result<AnalyzeOutcome> {
    let cfg = &opts.config;
    cfg.validate()?;
    let digest = file_digest(&opts.input)?;
    if let Some(want) = &opts.expected_digest {
        if *want != digest {
            return Err(Error::Config(format!(
                "{} has sha256 {digest}, manifest expects {want}",
                opts.input.display()
            )));
        }
    }
    let data = Dataset::load_csv(&opts.input)?;
    cfg.check(data.channels())?;
    for &t in &opts.spectrum_at {
        if t < cfg.first_msr() || t > data.samples() {
            return Err(Error::OutOfRange(format!(
                "--spectrum-at {t} outside {}..={}",
                cfg.first_msr(),
                data.samples()
            )));
        }
    }
    create_dir(&opts.out_dir)?;

    let (records, samples) = with_threads(opts.threads, || -> Result<_> {
        let records = run(&data, cfg)?;
        let samples = opts
            .spectrum_at
            .iter()
            .map(|&t| spectrum_at(&data, t, cfg).map(|s| (t, s)))
            .collect::<Result<Vec<_>>>()?;
        Ok((records, samples))
    })??;

    let records_path = opts.out_dir.join(RECORDS_FILE);
    write_records(&records_path, &records)?;
    let mut outputs = vec![records_path.clone()];

    let model = RingLawModel::from_dims(data.channels(), cfg.window, cfg.depth)?;
    let mut spectra = Vec::new();
    for (t, sample) in samples {
        let csv = opts.out_dir.join(format!("spectrum_t{t}.csv"));
        let metadata = write_spectrum(&csv, &sample, &model)?;
        let report = ring_conformance(&sample, &model, DEFAULT_MARGIN);
        let report_path = opts.out_dir.join(format!("conformance_t{t}.json"));
        fs::write(&report_path, serde_json::to_string_pretty(&report)? + "\n")
            .map_err(|e| Error::io(&report_path, e))?;
        outputs.extend([csv.clone(), metadata.clone(), report_path]);
        spectra.push(SpectrumOutput { t, csv, metadata, report });
    }

    let manifest_path = opts.out_dir.join(MANIFEST_FILE);
    let manifest = RunManifest {
        version: crate::VERSION.into(),
        input: opts.input.clone(),
        input_sha256: digest,
        config: cfg.clone(),
        seed: cfg.seed,
        start: cfg.first_msr(),
        end: data.samples(),
        spectrum_at: opts.spectrum_at.clone(),
        outputs,
    };
    manifest.save(&manifest_path)?;

    Ok(AnalyzeOutcome {
        records,
        records_path,
        manifest_path,
        spectra,
    })
}

/// Side-car path for a simulated dataset: `x.csv` becomes `x.truth.json`.
pub fn truth_path(out: &Path) -> PathBuf {
    out.with_extension("truth.json")
}

/// Generates the scenario in `spec_path`, writes the dataset CSV to `out` and
/// the ground truth next to it. Returns the side-car path.
pub fn cmd_simulate(spec_path: &Path, out: &Path) -> Result<PathBuf> {
    let spec = ScenarioSpec::load(spec_path)?;
    let scenario = generate_scenario(&spec)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    scenario.dataset.save_csv(out)?;
    let side = truth_path(out);
    fs::write(&side, serde_json::to_string_pretty(&scenario.truth)? + "\n").map_err(|e| Error::io(&side, e))?;
    Ok(side)
}

#[derive(Debug, Clone, Serialize)]
pub struct RingLawRun {
    pub model: RingLawModel,
    pub inner_radius: f64,
    pub analytic_msr: f64,
    pub trials: Vec<ConformanceReport>,
}

impl RingLawRun {
    pub fn mean_msr(&self) -> f64 {
        self.trials.iter().map(|r| r.msr).sum::<f64>() / self.trials.len() as f64
    }

    pub fn mean_in_annulus(&self) -> f64 {
        self.trials.iter().map(|r| r.in_annulus_fraction).sum::<f64>() / self.trials.len() as f64
    }
}

/// Pushes `depth` real Ginibre `p x n` windows through the pipeline `trials`
/// times and checks each spectrum against the Ring Law.
pub fn cmd_ringlaw(p: usize, n: usize, depth: usize, trials: usize, seed: u64) -> Result<RingLawRun> {
    let model = RingLawModel::from_dims(p, n, depth)?;
    if trials == 0 {
        return Err(Error::Config("--trials must be at least 1".into()));
    }
    let reports = (0..trials)
        .map(|k| {
            let mut rng = crate::detector::window_rng(seed, k);
            let windows: Vec<_> = (0..depth).map(|_| sample_ginibre(p, n, &mut rng, Field::Real)).collect();
            let sample = analyze_windows(&windows, crate::rmt::DEFAULT_SIGMA_MIN, &mut rng)?;
            Ok(ring_conformance(&sample, &model, DEFAULT_MARGIN))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RingLawRun {
        inner_radius: model.inner_radius(),
        analytic_msr: crate::rmt::ring_mean_radius(&model),
        model,
        trials: reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::Anomaly;

    fn write_spec(dir: &Path, spec: &ScenarioSpec) -> PathBuf {
        let p = dir.join("spec.txt");
        fs::write(&p, spec.to_kv_string()).unwrap();
        p
    }

    fn small_cfg() -> DetectorConfig {
        DetectorConfig {
            window: 20,
            history: 10,
            seed: 3,
            ..DetectorConfig::default()
        }
    }

    #[test]
    fn simulate_is_deterministic_and_records_truth() {
        let dir = tempfile::tempdir().unwrap();
        let spec = ScenarioSpec {
            anomaly: Anomaly::Step {
                t0: 30,
                from: 0.0,
                to: 0.5,
                channels: vec![2],
            },
            ..ScenarioSpec::pure_noise(4, 50, 9)
        };
        let sp = write_spec(dir.path(), &spec);
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        let side = cmd_simulate(&sp, &a).unwrap();
        cmd_simulate(&sp, &b).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
        let truth: serde_json::Value = serde_json::from_str(&fs::read_to_string(side).unwrap()).unwrap();
        assert_eq!(truth["t0"], 30);
        assert_eq!(truth["kind"], "step");
    }

    #[test]
    fn analyze_writes_artifacts_and_replays() {
        let dir = tempfile::tempdir().unwrap();
        let sp = write_spec(dir.path(), &ScenarioSpec::pure_noise(5, 60, 4));
        let data = dir.path().join("d.csv");
        cmd_simulate(&sp, &data).unwrap();
        let opts = AnalyzeOptions {
            input: data.clone(),
            config: small_cfg(),
            spectrum_at: vec![25],
            out_dir: dir.path().join("out"),
            threads: None,
            expected_digest: None,
        };
        let first = cmd_analyze(&opts).unwrap();
        assert_eq!(first.records.len(), 60 - 20 + 1);
        assert!(first.spectra[0].csv.exists() && first.spectra[0].metadata.exists());
        let manifest = RunManifest::load(&first.manifest_path).unwrap();
        assert_eq!((manifest.start, manifest.end), (20, 60));

        let mut again = AnalyzeOptions::from_manifest(&manifest, dir.path().join("again"));
        again.threads = Some(3);
        let second = cmd_analyze(&again).unwrap();
        assert_eq!(
            fs::read(&first.records_path).unwrap(),
            fs::read(&second.records_path).unwrap()
        );

        fs::write(&data, "timestamp,a\n1,1\n").unwrap();
        assert!(cmd_analyze(&again).is_err());
    }

    #[test]
    fn analyze_rejects_bad_spectrum_index_and_ratio() {
        let dir = tempfile::tempdir().unwrap();
        let sp = write_spec(dir.path(), &ScenarioSpec::pure_noise(5, 40, 4));
        let data = dir.path().join("d.csv");
        cmd_simulate(&sp, &data).unwrap();
        let mut opts = AnalyzeOptions {
            input: data,
            config: small_cfg(),
            spectrum_at: vec![5],
            out_dir: dir.path().join("out"),
            threads: None,
            expected_digest: None,
        };
        assert!(cmd_analyze(&opts).is_err());
        opts.spectrum_at.clear();
        opts.config.window = 4;
        assert!(matches!(cmd_analyze(&opts), Err(Error::Ratio { .. })));
    }

    #[test]
    fn ringlaw_small_run() {
        let r = cmd_ringlaw(40, 50, 2, 2, 1).unwrap();
        assert_eq!(r.trials.len(), 2);
        assert!((r.inner_radius - 0.2).abs() < 1e-12);
        assert!(r.mean_in_annulus() > 0.8, "{}", r.mean_in_annulus());
        assert!(cmd_ringlaw(60, 50, 1, 1, 1).is_err());
        assert!(cmd_ringlaw(10, 50, 1, 0, 1).is_err());
    }

    #[test]
    fn thread_pool_option() {
        assert_eq!(with_threads(Some(2), || rayon::current_num_threads()).unwrap(), 2);
        assert!(with_threads(Some(0), || ()).is_err());
    }
}
