use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rmt_anomaly::detector::DetectorConfig;
use rmt_anomaly::io::commands::{cmd_analyze, cmd_ringlaw, cmd_simulate, AnalyzeOptions, EXIT_CLEAN, EXIT_ERROR};
use rmt_anomaly::io::{load_detector_config, RunManifest};

/// Ring Law anomaly detection for wide measurement streams.
#[derive(Parser)]
#[command(name = "rmtad", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the detector over a dataset CSV. Exits 2 when any anomaly is declared.
    Analyze(AnalyzeArgs),
    /// Generate a synthetic dataset from a scenario spec file.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check Ginibre pipelines against the Ring Law.
    Ringlaw {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Dataset CSV; optional when --manifest names one.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Key-value file with detector settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Repeat the run recorded in this manifest; flags override it.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Window width n.
    #[arg(long)]
    window: Option<usize>,
    /// Product depth L.
    #[arg(long)]
    depth: Option<usize>,
    /// Increment history T.
    #[arg(long)]
    history: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sample indices whose spectra are dumped.
    #[arg(long, value_delimiter = ',')]
    spectrum_at: Vec<usize>,
    /// Revive zero-variance channels with tiny noise.
    #[arg(long)]
    jitter: bool,
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn analyze(args: AnalyzeArgs) -> Result<i32> {
    let mut opts = match &args.manifest {
        Some(m) => {
            let manifest = RunManifest::load(m).with_context(|| format!("reading manifest {}", m.display()))?;
            AnalyzeOptions::from_manifest(&manifest, args.out.clone())
        }
        None => AnalyzeOptions {
            input: PathBuf::new(),
            config: DetectorConfig::default(),
            spectrum_at: Vec::new(),
            out_dir: args.out.clone(),
            threads: None,
            expected_digest: None,
        },
    };
    if let Some(path) = &args.config {
        opts.config = load_detector_config(path)?;
    }
    match (args.input, args.manifest.is_some()) {
        (Some(input), _) => {
            opts.input = input;
            opts.expected_digest = None;
        }
        (None, false) => bail!("--input is required unless --manifest is given"),
        (None, true) => {}
    }
    let cfg = &mut opts.config;
    if let Some(v) = args.window {
        cfg.window = v;
    }
    if let Some(v) = args.depth {
        cfg.depth = v;
    }
    if let Some(v) = args.history {
        cfg.history = v;
    }
    if let Some(v) = args.threshold {
        cfg.threshold = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    cfg.jitter |= args.jitter;
    if !args.spectrum_at.is_empty() {
        opts.spectrum_at = args.spectrum_at;
    }
    opts.threads = args.threads;

    let outcome = cmd_analyze(&opts).with_context(|| format!("analyzing {}", opts.input.display()))?;
    let first = outcome.records.iter().find(|r| r.is_anomaly()).map(|r| r.t);
    println!(
        "records: {} (t = {}..={})",
        outcome.records.len(),
        opts.config.first_msr(),
        outcome.records.last().map_or(0, |r| r.t)
    );
    println!("anomalies: {}", outcome.anomalies());
    if let Some(t) = first {
        println!("first anomaly: t = {t}");
    }
    if outcome.errors() > 0 {
        println!("error records: {}", outcome.errors());
    }
    for s in &outcome.spectra {
        println!(
            "spectrum t = {}: msr {:.6} (ring mean {:.6}), in annulus {:.4}, outliers {}, KS {:.4}",
            s.t,
            s.report.msr,
            s.report.analytic_msr,
            s.report.in_annulus_fraction,
            s.report.outliers.len(),
            s.report.ks_distance
        );
    }
    println!("records: {}", outcome.records_path.display());
    println!("manifest: {}", outcome.manifest_path.display());
    Ok(outcome.exit_code())
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Analyze(args) => analyze(args),
        Command::Simulate { spec, out } => {
            let side = cmd_simulate(&spec, &out).with_context(|| format!("simulating {}", spec.display()))?;
            println!("dataset: {}", out.display());
            println!("ground truth: {}", side.display());
            Ok(EXIT_CLEAN)
        }
        Command::Ringlaw {
            p,
            n,
            depth,
            trials,
            seed,
        } => {
            let run = cmd_ringlaw(p, n, depth, trials, seed)?;
            println!(
                "c = {:.4}, L = {depth}: annulus [{:.6}, 1], ring mean radius {:.6}",
                run.model.c, run.inner_radius, run.analytic_msr
            );
            for (k, r) in run.trials.iter().enumerate() {
                println!(
                    "trial {k}: msr {:.6}, in annulus {:.4}, outliers {}, KS {:.4}",
                    r.msr,
                    r.in_annulus_fraction,
                    r.outliers.len(),
                    r.ks_distance
                );
            }
            println!(
                "mean msr {:.6} (deviation {:+.6}), mean in annulus {:.4}",
                run.mean_msr(),
                run.mean_msr() - run.analytic_msr,
                run.mean_in_annulus()
            );
            Ok(EXIT_CLEAN)
        }
    }
}

fn main() -> ExitCode {
    // Usage errors exit 1 rather than clap's default 2, which here means
    // "anomaly declared".
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_CLEAN };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
