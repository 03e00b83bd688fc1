//! Experiment orchestration: seeded sweeps over `(σ_e, N)` grids,
//! per-cell reconstruction records, persistence, and the summary tables
//! the plots are drawn from.
//!
//! Determinism contract: a sweep is a pure function of the experiment
//! spec and master seed. Cell seeds are derived by hashing the master
//! seed with the cell's own coordinates (values, not sweep positions), so
//! removing one sweep value never changes any other cell. Cells run on a
//! worker pool; records are sorted before aggregation so thread timing
//! cannot leak into the output.

mod records;
mod spec;

pub use records::{
    export_records, import_records, method_summary, summarize, summary_csv, write_trace_csv,
    MethodSummary, RunRecord, RunStatus, SummaryRow, RECORDS_SCHEMA_VERSION,
};
pub use spec::{parse_range, ExperimentSpec, GibbsSettings, TruthRule, SPEC_SCHEMA_VERSION};

use rayon::prelude::*;
use thiserror::Error;

use crate::annihilator::{annihilate_reconstruct, AnnihilatorError};
use crate::gibbs::{run_gibbs, GibbsConfig, GibbsError, GibbsState};
use crate::llse::llse_refine;
use crate::model::{
    add_noise, reconstruction_error, snr_db, synthesize_samples, AcquisitionConfig, FriSignal,
    ModelError, NoiseSpec,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error("unsupported spec schema version {found} (expected {expected})")]
    SpecVersion { found: u32, expected: u32 },
    #[error("unsupported records schema version {found} (expected {expected})")]
    RecordsVersion { found: u32, expected: u32 },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("spec file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Gibbs(#[from] GibbsError),
}

/// Reconstruction methods a sweep can exercise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Gibbs,
    GibbsLlse,
    Annihilator,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Gibbs => "gibbs",
            Method::GibbsLlse => "gibbs_llse",
            Method::Annihilator => "annihilator",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "gibbs" => Some(Method::Gibbs),
            "gibbs_llse" | "gibbs-llse" => Some(Method::GibbsLlse),
            "annihilator" => Some(Method::Annihilator),
            _ => None,
        }
    }
}

/// splitmix64 finalizer; the standard 64-bit avalanche.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn mix_seed(parts: &[u64]) -> u64 {
    let mut h = 0x243F6A8885A308D3u64; // arbitrary non-zero start
    for &p in parts {
        h = splitmix64(h ^ p);
    }
    h
}

/// Stream tags keeping the truth, noise, and chain draws independent.
const TAG_TRUTH: u64 = 1;
const TAG_NOISE: u64 = 2;
const TAG_CHAIN: u64 = 3;

/// Truth seed depends on the window (N) and the seed index only, so one
/// signal realization is shared across the σ_e column: noise-level
/// comparisons are paired, as they are in the source experiments.
pub fn truth_seed(master: u64, n_samples: usize, seed_index: u64) -> u64 {
    mix_seed(&[master, TAG_TRUTH, n_samples as u64, seed_index])
}

pub fn noise_seed(master: u64, n_samples: usize, seed_index: u64, sigma_e: f64) -> u64 {
    mix_seed(&[
        master,
        TAG_NOISE,
        n_samples as u64,
        seed_index,
        sigma_e.to_bits(),
    ])
}

pub fn chain_seed(master: u64, n_samples: usize, seed_index: u64, sigma_e: f64) -> u64 {
    mix_seed(&[
        master,
        TAG_CHAIN,
        n_samples as u64,
        seed_index,
        sigma_e.to_bits(),
    ])
}

/// Draw a per-seed random truth: locations with a hard minimum separation
/// inside the observation window (margin kept from both ends), weights
/// uniform in the configured magnitude band with random sign when
/// allowed.
pub fn generate_truth(
    rule: &TruthRule,
    acq: &AcquisitionConfig,
    seed: u64,
) -> Result<FriSignal, HarnessError> {
    match rule {
        TruthRule::Fixed {
            weights,
            locations,
        } => Ok(FriSignal::new(weights.clone(), locations.clone())?),
        TruthRule::Random {
            k,
            min_separation,
            weight_low,
            weight_high,
            signed,
            margin,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lo = *margin;
            let hi = acq.window_end() - margin;
            let span = hi - lo - min_separation * (*k as f64 - 1.0);
            if span <= 0.0 {
                return Err(HarnessError::InvalidSpec(format!(
                    "window [{lo}, {hi}] cannot hold {k} locations {min_separation} apart"
                )));
            }
            let mut offsets: Vec<f64> = (0..*k).map(|_| rng.gen::<f64>() * span).collect();
            offsets.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            let locations: Vec<f64> = offsets
                .iter()
                .enumerate()
                .map(|(i, o)| lo + o + min_separation * i as f64)
                .collect();
            let weights: Vec<f64> = (0..*k)
                .map(|_| {
                    let w = weight_low + (weight_high - weight_low) * rng.gen::<f64>();
                    if *signed && rng.gen::<bool>() {
                        -w
                    } else {
                        w
                    }
                })
                .collect();
            Ok(FriSignal::new(weights, locations)?)
        }
    }
}

/// Run every `(σ_e, N, seed, method)` cell of the spec. Individual cell
/// failures are captured in the record status; the sweep itself never
/// aborts on them.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<RunRecord>, HarnessError> {
    run_experiment_with_pool(spec, None)
}

/// As [`run_experiment`], with an explicit worker count (`None` uses the
/// global pool).
pub fn run_experiment_with_pool(
    spec: &ExperimentSpec,
    jobs: Option<usize>,
) -> Result<Vec<RunRecord>, HarnessError> {
    spec.validate()?;
    let mut cells = Vec::new();
    for (si, &sigma_e) in spec.sigma_e_sweep.iter().enumerate() {
        for (ni, &n) in spec.n_sweep.iter().enumerate() {
            for seed_index in 0..spec.n_seeds {
                cells.push((si, ni, sigma_e, n, seed_index as u64));
            }
        }
    }

    let worker = |&(si, ni, sigma_e, n, seed_index): &(usize, usize, f64, usize, u64)| {
        run_cell(spec, sigma_e, n, seed_index)
            .map(|records| ((si, ni, seed_index), records))
    };

    let mut keyed: Vec<((usize, usize, u64), Vec<RunRecord>)> = match jobs {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build()
                .expect("worker pool");
            pool.install(|| cells.par_iter().map(worker).collect::<Result<_, _>>())?
        }
        None => cells.par_iter().map(worker).collect::<Result<_, _>>()?,
    };
    // Deterministic order regardless of worker scheduling.
    keyed.sort_by_key(|&(key, _)| key);
    Ok(keyed.into_iter().flat_map(|(_, r)| r).collect())
}

/// One `(σ_e, N, seed)` cell: synthesize, add noise, reconstruct with each
/// requested method, score. The gibbs and gibbs_llse entries share one
/// chain so their comparison is paired.
fn run_cell(
    spec: &ExperimentSpec,
    sigma_e: f64,
    n: usize,
    seed_index: u64,
) -> Result<Vec<RunRecord>, HarnessError> {
    let acq = AcquisitionConfig::new(spec.sigma_h, spec.period, n)?;
    let truth = generate_truth(
        &spec.truth,
        &acq,
        truth_seed(spec.master_seed, n, seed_index),
    )?;
    let z = synthesize_samples(&truth, &acq);
    let noise = NoiseSpec::new(
        sigma_e,
        noise_seed(spec.master_seed, n, seed_index, sigma_e),
    )?;
    let y = add_noise(&z, &noise);
    let snr = snr_db(&z, &y)?;

    let base = RunRecord {
        experiment: spec.name.clone(),
        sigma_e,
        n_samples: n,
        seed_index,
        method: Method::Gibbs,
        sigma_h: spec.sigma_h,
        period: spec.period,
        model_order: truth.order(),
        truth_weights: truth.weights().to_vec(),
        truth_locations: truth.locations().to_vec(),
        estimate_weights: None,
        estimate_locations: None,
        error: None,
        snr_db: snr,
        sigma_e_estimate: None,
        wall_clock_ms: 0.0,
        status: RunStatus::Ok,
        failure: None,
        trace_path: None,
    };

    let wants_gibbs = spec.methods.contains(&Method::Gibbs);
    let wants_llse = spec.methods.contains(&Method::GibbsLlse);
    let mut out = Vec::new();

    if wants_gibbs || wants_llse {
        let mut cfg = GibbsConfig::new(truth.order(), chain_seed(spec.master_seed, n, seed_index, sigma_e));
        cfg.burn_in = spec.gibbs.burn_in;
        cfg.keep = spec.gibbs.keep;
        cfg.location_grid_points = spec.gibbs.grid_points;
        cfg.init = GibbsState::zero_init(truth.order());
        cfg.init.sigma_e = spec.gibbs.init_sigma;

        let started = Instant::now();
        let (_, mmse) = run_gibbs(&y, &acq, &cfg)?;
        let chain_ms = started.elapsed().as_secs_f64() * 1e3;

        if wants_gibbs {
            let mut rec = base.clone();
            rec.method = Method::Gibbs;
            rec.wall_clock_ms = chain_ms;
            rec.sigma_e_estimate = Some(mmse.sigma_e);
            match mmse.to_signal() {
                Ok(est) => {
                    rec.error = Some(reconstruction_error(&est, &truth, spec.sigma_h)?);
                    rec.estimate_weights = Some(est.weights().to_vec());
                    rec.estimate_locations = Some(est.locations().to_vec());
                }
                Err(e) => {
                    rec.status = RunStatus::Failed;
                    rec.failure = Some(e.to_string());
                    rec.error = Some(1.0);
                }
            }
            out.push(rec);
        }
        if wants_llse {
            let started = Instant::now();
            let mut rec = base.clone();
            rec.method = Method::GibbsLlse;
            rec.sigma_e_estimate = Some(mmse.sigma_e);
            match llse_refine(&y, &mmse.t, &acq) {
                Ok(weights) => match FriSignal::new(weights, mmse.t.clone()) {
                    Ok(est) => {
                        rec.error = Some(reconstruction_error(&est, &truth, spec.sigma_h)?);
                        rec.estimate_weights = Some(est.weights().to_vec());
                        rec.estimate_locations = Some(est.locations().to_vec());
                    }
                    Err(e) => {
                        rec.status = RunStatus::Failed;
                        rec.failure = Some(e.to_string());
                        rec.error = Some(1.0);
                    }
                },
                Err(e) => {
                    rec.status = RunStatus::Failed;
                    rec.failure = Some(e.to_string());
                    rec.error = Some(1.0);
                }
            }
            rec.wall_clock_ms = chain_ms + started.elapsed().as_secs_f64() * 1e3;
            out.push(rec);
        }
    }

    if spec.methods.contains(&Method::Annihilator) {
        let started = Instant::now();
        let mut rec = base.clone();
        rec.method = Method::Annihilator;
        match annihilate_reconstruct(&y, truth.order(), &acq) {
            Ok(result) => {
                rec.error = Some(reconstruction_error(&result.signal, &truth, spec.sigma_h)?);
                rec.estimate_weights = Some(result.signal.weights().to_vec());
                rec.estimate_locations = Some(result.signal.locations().to_vec());
                if result.projected_roots {
                    rec.status = RunStatus::ProjectedRoots;
                }
            }
            Err(e) => {
                // A failed reconstruction scores as the zero-signal
                // estimate (E = 1): the breakdown is part of the result.
                rec.status = RunStatus::Failed;
                rec.failure = Some(annihilator_failure_label(&e));
                rec.error = Some(1.0);
            }
        }
        rec.wall_clock_ms = started.elapsed().as_secs_f64() * 1e3;
        out.push(rec);
    }

    Ok(out)
}

fn annihilator_failure_label(e: &AnnihilatorError) -> String {
    e.to_string()
}

/// Mean SNR per `(σ_e, N)` cell.
pub fn snr_table(records: &[RunRecord]) -> Vec<((f64, usize), f64)> {
    let mut keys: Vec<(f64, usize)> = Vec::new();
    for r in records {
        if !keys
            .iter()
            .any(|&(s, n)| s.to_bits() == r.sigma_e.to_bits() && n == r.n_samples)
        {
            keys.push((r.sigma_e, r.n_samples));
        }
    }
    keys.iter()
        .map(|&(sigma_e, n)| {
            let snrs: Vec<f64> = records
                .iter()
                .filter(|r| {
                    r.sigma_e.to_bits() == sigma_e.to_bits()
                        && r.n_samples == n
                        && r.method != Method::GibbsLlse
                })
                .map(|r| r.snr_db)
                .collect();
            let mean = if snrs.iter().any(|s| s.is_infinite()) {
                f64::INFINITY
            } else {
                snrs.iter().sum::<f64>() / snrs.len().max(1) as f64
            };
            ((sigma_e, n), mean)
        })
        .collect()
}

/// Re-score stored records against their own stored truth/estimate pairs.
/// Returns `(index, stored, recomputed)` for every mismatch beyond the
/// tolerance.
pub fn replay_records(
    records: &[RunRecord],
    tolerance: f64,
) -> Result<Vec<(usize, f64, f64)>, HarnessError> {
    let mut mismatches = Vec::new();
    for (i, r) in records.iter().enumerate() {
        let (Some(ew), Some(el)) = (&r.estimate_weights, &r.estimate_locations) else {
            continue;
        };
        let truth = FriSignal::new(r.truth_weights.clone(), r.truth_locations.clone())?;
        let est = FriSignal::new(ew.clone(), el.clone())?;
        let recomputed = reconstruction_error(&est, &truth, r.sigma_h)?;
        let stored = r.error.unwrap_or(f64::NAN);
        if !((recomputed - stored).abs() <= tolerance * stored.abs().max(1.0)) {
            mismatches.push((i, stored, recomputed));
        }
    }
    Ok(mismatches)
}
