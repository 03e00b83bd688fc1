//! `fri` — synthesize Dirac-stream acquisitions, reconstruct them from
//! noisy samples, and run seeded experiment sweeps.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use fri_core::annihilator::annihilate_reconstruct;
use fri_core::demo::breakdown_demo;
use fri_core::gibbs::{run_gibbs, GibbsConfig, GibbsState};
use fri_core::harness::{
    export_records, import_records, method_summary, replay_records, run_experiment_with_pool,
    summarize, summary_csv, write_trace_csv, ExperimentSpec,
};
use fri_core::llse::llse_refine;
use fri_core::model::{
    add_noise, reconstruction_error, snr_db, synthesize_samples, AcquisitionConfig, FriSignal,
    NoiseSpec, SampleKind, SampleVector,
};

#[derive(Parser)]
#[command(
    name = "fri",
    version,
    about = "Dirac-stream reconstruction from noisy Gaussian-filtered samples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize samples of a filtered Dirac stream (optionally noisy).
    Synth(SynthArgs),
    /// Reconstruct one signal from a samples file.
    Reconstruct(ReconstructArgs),
    /// Run an experiment sweep described by a TOML spec file.
    Experiment(ExperimentArgs),
    /// Re-score a stored records file and report inconsistencies.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Comma-separated Dirac weights (defaults to the bundled demo signal).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    weights: Option<Vec<f64>>,
    /// Comma-separated Dirac locations in seconds.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    locations: Option<Vec<f64>>,
    /// Gaussian kernel width.
    #[arg(long, default_value_t = 4.0)]
    sigma_h: f64,
    /// Sample period T.
    #[arg(long, default_value_t = 1.0)]
    period: f64,
    /// Number of samples N.
    #[arg(long, default_value_t = 30)]
    n: usize,
    /// Noise standard deviation (0 emits noiseless samples).
    #[arg(long, default_value_t = 0.0)]
    sigma_e: f64,
    /// Noise seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = SynthFormat::Json)]
    format: SynthFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SynthFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct ReconstructArgs {
    /// Samples file produced by `fri synth --format json`.
    #[arg(long)]
    input: PathBuf,
    /// Reconstruction method.
    #[arg(long, value_enum)]
    method: CliMethod,
    /// Chain seed (gibbs methods).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Burn-in sweeps.
    #[arg(long)]
    burn_in: Option<usize>,
    /// Kept sweeps averaged into the estimate.
    #[arg(long)]
    keep: Option<usize>,
    /// Grid resolution for the location conditionals.
    #[arg(long)]
    grid_points: Option<usize>,
    /// Write the per-sweep chain trace CSV here (gibbs methods).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the estimate as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliMethod {
    Gibbs,
    GibbsLlse,
    Annihilator,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment spec file (TOML).
    #[arg(long)]
    spec: PathBuf,
    /// Output directory for records.jsonl and summary.csv.
    #[arg(long)]
    out: PathBuf,
    /// Override the spec's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker pool size (overrides the FRI_JOBS environment variable).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct ReplayArgs {
    /// Records file written by `fri experiment`.
    #[arg(long)]
    records: PathBuf,
    /// Relative tolerance for the re-scored error.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
}

/// Self-contained samples document: everything `reconstruct` needs to
/// score an estimate against the generating signal.
#[derive(Serialize, Deserialize)]
struct SamplesDoc {
    schema: String,
    version: u32,
    sigma_h: f64,
    period: f64,
    n_samples: usize,
    truth_weights: Vec<f64>,
    truth_locations: Vec<f64>,
    sigma_e: f64,
    seed: u64,
    kind: SampleKind,
    values: Vec<f64>,
}

const SAMPLES_SCHEMA: &str = "fri-samples";
const SAMPLES_VERSION: u32 = 1;

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Synth(args) => synth(args),
        Command::Reconstruct(args) => reconstruct(args),
        Command::Experiment(args) => experiment(args),
        Command::Replay(args) => replay(args),
    }
}

fn synth(args: SynthArgs) -> Result<()> {
    let signal = match (args.weights, args.locations) {
        (Some(w), Some(t)) => FriSignal::new(w, t)?,
        (None, None) => breakdown_demo().0,
        _ => bail!("--weights and --locations must be given together"),
    };
    let acq = AcquisitionConfig::new(args.sigma_h, args.period, args.n)?;

    let z = synthesize_samples(&signal, &acq);
    let noise = NoiseSpec::new(args.sigma_e, args.seed)?;
    let samples = if args.sigma_e > 0.0 {
        add_noise(&z, &noise)
    } else {
        z
    };

    let doc = SamplesDoc {
        schema: SAMPLES_SCHEMA.to_string(),
        version: SAMPLES_VERSION,
        sigma_h: acq.sigma_h(),
        period: acq.period(),
        n_samples: acq.n_samples(),
        truth_weights: signal.weights().to_vec(),
        truth_locations: signal.locations().to_vec(),
        sigma_e: args.sigma_e,
        seed: args.seed,
        kind: samples.kind,
        values: samples.values.clone(),
    };

    let text = match args.format {
        SynthFormat::Json => {
            let mut text = serde_json::to_string_pretty(&doc).expect("samples doc");
            text.push('\n');
            text
        }
        SynthFormat::Csv => {
            let mut out = String::from("n,value\n");
            for (n, v) in samples.values.iter().enumerate() {
                out.push_str(&format!("{n},{v}\n"));
            }
            out
        }
    };
    match args.out {
        Some(path) => std::fs::write(&path, text.as_bytes())
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load_samples(path: &Path) -> Result<(FriSignal, AcquisitionConfig, SampleVector)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: SamplesDoc = serde_json::from_str(&text)
        .with_context(|| format!("parsing samples file {}", path.display()))?;
    if doc.schema != SAMPLES_SCHEMA || doc.version != SAMPLES_VERSION {
        bail!(
            "unsupported samples schema {}/{} (expected {SAMPLES_SCHEMA}/{SAMPLES_VERSION})",
            doc.schema,
            doc.version
        );
    }
    if doc.values.len() != doc.n_samples {
        bail!(
            "samples file claims {} values but contains {}",
            doc.n_samples,
            doc.values.len()
        );
    }
    let truth = FriSignal::new(doc.truth_weights, doc.truth_locations)?;
    let acq = AcquisitionConfig::new(doc.sigma_h, doc.period, doc.n_samples)?;
    let samples = SampleVector {
        values: doc.values,
        kind: doc.kind,
    };
    Ok((truth, acq, samples))
}

#[derive(Serialize)]
struct EstimateDoc {
    method: &'static str,
    weights: Vec<f64>,
    locations: Vec<f64>,
    reconstruction_error: f64,
    snr_db: f64,
    sigma_e_estimate: Option<f64>,
    projected_roots: bool,
}

fn reconstruct(args: ReconstructArgs) -> Result<()> {
    let (truth, acq, samples) = load_samples(&args.input)?;
    let z = synthesize_samples(&truth, &acq);
    let snr = snr_db(&z, &samples)?;

    let (estimate, sigma_estimate, projected) = match args.method {
        CliMethod::Annihilator => {
            if args.trace.is_some() {
                bail!("--trace applies to the gibbs methods");
            }
            let rec = annihilate_reconstruct(&samples, truth.order(), &acq)?;
            (rec.signal, None, rec.projected_roots)
        }
        CliMethod::Gibbs | CliMethod::GibbsLlse => {
            let mut cfg = GibbsConfig::new(truth.order(), args.seed);
            if let Some(b) = args.burn_in {
                cfg.burn_in = b;
            }
            if let Some(k) = args.keep {
                cfg.keep = k;
            }
            if let Some(g) = args.grid_points {
                cfg.location_grid_points = g;
            }
            cfg.init = GibbsState::zero_init(truth.order());
            let (trace, mmse) = run_gibbs(&samples, &acq, &cfg)?;
            if let Some(path) = &args.trace {
                write_trace_csv(&trace, path)?;
            }
            let estimate = if args.method == CliMethod::GibbsLlse {
                let weights = llse_refine(&samples, &mmse.t, &acq)?;
                FriSignal::new(weights, mmse.t.clone())?
            } else {
                mmse.to_signal()?
            };
            (estimate, Some(mmse.sigma_e), false)
        }
    };

    let error = reconstruction_error(&estimate, &truth, acq.sigma_h())?;
    let method = match args.method {
        CliMethod::Gibbs => "gibbs",
        CliMethod::GibbsLlse => "gibbs_llse",
        CliMethod::Annihilator => "annihilator",
    };
    println!("method: {method}");
    println!("reconstruction_error: {error}");
    println!("snr_db: {snr}");
    if let Some(s) = sigma_estimate {
        println!("sigma_e_estimate: {s}");
    }
    if projected {
        println!("projected_roots: true");
    }
    println!("weights: {:?}", estimate.weights());
    println!("locations: {:?}", estimate.locations());

    if let Some(path) = args.out {
        let doc = EstimateDoc {
            method,
            weights: estimate.weights().to_vec(),
            locations: estimate.locations().to_vec(),
            reconstruction_error: error,
            snr_db: snr,
            sigma_e_estimate: sigma_estimate,
            projected_roots: projected,
        };
        std::fs::write(&path, serde_json::to_string_pretty(&doc).expect("estimate"))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let mut spec = ExperimentSpec::from_toml_file(&args.spec)?;
    if let Some(seed) = args.seed {
        spec.master_seed = seed;
    }
    let jobs = args.jobs.or_else(|| {
        std::env::var("FRI_JOBS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
    });

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let records = run_experiment_with_pool(&spec, jobs)?;
    let records_path = args.out.join("records.jsonl");
    export_records(&records, &records_path)?;
    let csv = summary_csv(&summarize(&records));
    let summary_path = args.out.join("summary.csv");
    std::fs::write(&summary_path, csv.as_bytes())?;

    println!(
        "experiment '{}': {} records ({} cells x {} seeds)",
        spec.name,
        records.len(),
        spec.sigma_e_sweep.len() * spec.n_sweep.len(),
        spec.n_seeds
    );
    for summary in method_summary(&records) {
        println!(
            "  {:<12} mean E = {:.5} over {} runs",
            summary.method.as_str(),
            summary.mean_error,
            summary.n_records
        );
    }
    println!("records: {}", records_path.display());
    println!("summary: {}", summary_path.display());
    Ok(())
}

fn replay(args: ReplayArgs) -> Result<()> {
    let records = import_records(&args.records)?;
    let mismatches = replay_records(&records, args.tolerance)?;
    let scored = records
        .iter()
        .filter(|r| r.estimate_weights.is_some())
        .count();
    if mismatches.is_empty() {
        println!(
            "replay ok: {scored} scored records re-scored within {:.1e}",
            args.tolerance
        );
        Ok(())
    } else {
        for (index, stored, recomputed) in &mismatches {
            eprintln!("record {index}: stored E = {stored}, re-scored E = {recomputed}");
        }
        bail!("{} of {scored} records failed re-scoring", mismatches.len());
    }
}
