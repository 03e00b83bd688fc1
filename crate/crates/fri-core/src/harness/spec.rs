//! Experiment-spec schema and the TOML file format behind it.

use serde::Deserialize;

use super::{HarnessError, Method};
use crate::gibbs::{DEFAULT_BURN_IN, DEFAULT_GRID_POINTS, DEFAULT_INIT_SIGMA, DEFAULT_KEEP};

pub const SPEC_SCHEMA_VERSION: u32 = 1;

/// Chain settings a spec may override.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsSettings {
    pub burn_in: usize,
    pub keep: usize,
    pub grid_points: usize,
    pub init_sigma: f64,
}

impl Default for GibbsSettings {
    fn default() -> Self {
        Self {
            burn_in: DEFAULT_BURN_IN,
            keep: DEFAULT_KEEP,
            grid_points: DEFAULT_GRID_POINTS,
            init_sigma: DEFAULT_INIT_SIGMA,
        }
    }
}

/// How ground truth is produced for each cell.
#[derive(Debug, Clone, PartialEq)]
pub enum TruthRule {
    /// One documented signal for every cell (golden runs).
    Fixed {
        weights: Vec<f64>,
        locations: Vec<f64>,
    },
    /// Per-seed random signals with a hard minimum separation (sweeps).
    Random {
        k: usize,
        min_separation: f64,
        weight_low: f64,
        weight_high: f64,
        signed: bool,
        margin: f64,
    },
}

/// A full sweep description: the `(σ_e, N)` grid, acquisition constants,
/// seed count, methods, chain settings, and the ground-truth rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub master_seed: u64,
    pub sigma_e_sweep: Vec<f64>,
    pub n_sweep: Vec<usize>,
    pub period: f64,
    pub sigma_h: f64,
    pub n_seeds: usize,
    pub methods: Vec<Method>,
    pub gibbs: GibbsSettings,
    pub truth: TruthRule,
}

impl ExperimentSpec {
    pub fn new(name: &str, sigma_h: f64, period: f64) -> Self {
        Self {
            name: name.to_string(),
            master_seed: 0,
            sigma_e_sweep: Vec::new(),
            n_sweep: Vec::new(),
            period,
            sigma_h,
            n_seeds: 1,
            methods: vec![Method::Gibbs],
            gibbs: GibbsSettings::default(),
            truth: TruthRule::Random {
                k: 1,
                min_separation: 2.0 * period,
                weight_low: 8.0,
                weight_high: 12.0,
                signed: true,
                margin: 2.0 * sigma_h,
            },
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::InvalidSpec(m.to_string()));
        if self.sigma_e_sweep.is_empty() || self.n_sweep.is_empty() {
            return bad("sigma_e and n sweeps must be non-empty");
        }
        if self.sigma_e_sweep.iter().any(|&s| !(s >= 0.0)) {
            return bad("sigma_e values must be non-negative");
        }
        if self.n_sweep.iter().any(|&n| n < 1) {
            return bad("n values must be >= 1");
        }
        if self.n_seeds < 1 {
            return bad("n_seeds must be >= 1");
        }
        if !(self.period > 0.0) || !(self.sigma_h > 0.0) {
            return bad("period and sigma_h must be strictly positive");
        }
        if self.methods.is_empty() {
            return bad("at least one method is required");
        }
        if self.gibbs.keep < 1 || self.gibbs.grid_points < 2 || !(self.gibbs.init_sigma > 0.0) {
            return bad("gibbs settings invalid: keep >= 1, grid_points >= 2, init_sigma > 0");
        }
        match &self.truth {
            TruthRule::Fixed { weights, locations } => {
                if weights.is_empty() || weights.len() != locations.len() {
                    return bad("fixed truth needs matching non-empty weights/locations");
                }
            }
            TruthRule::Random {
                k,
                min_separation,
                weight_low,
                weight_high,
                ..
            } => {
                if *k < 1 {
                    return bad("random truth needs k >= 1");
                }
                if !(*min_separation >= 0.0) {
                    return bad("min_separation must be >= 0");
                }
                if !(*weight_low > 0.0) || weight_high < weight_low {
                    return bad("weight band must satisfy 0 < weight_low <= weight_high");
                }
            }
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let raw: RawSpec = toml::from_str(text)?;
        raw.into_spec()
    }

    pub fn from_toml_file(path: &std::path::Path) -> Result<Self, HarnessError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

/// Inclusive arithmetic progression in `start:step:stop` notation.
pub fn parse_range(text: &str) -> Result<Vec<f64>, HarnessError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(HarnessError::InvalidSpec(format!(
            "range '{text}' must be start:step:stop"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| HarnessError::InvalidSpec(format!("range '{text}': {e}")))
        })
        .collect::<Result<_, _>>()?;
    let (start, step, stop) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) {
        return Err(HarnessError::InvalidSpec(format!(
            "range '{text}' needs a positive step"
        )));
    }
    let count = ((stop - start) / step + 1.0 + 1e-9).floor() as usize;
    if count == 0 {
        return Err(HarnessError::InvalidSpec(format!("range '{text}' is empty")));
    }
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

/// Sweep values appear either as an explicit array or a Matlab-style
/// range string.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RangeOrList {
    Range(String),
    List(Vec<f64>),
}

impl RangeOrList {
    fn values(&self) -> Result<Vec<f64>, HarnessError> {
        match self {
            RangeOrList::Range(s) => parse_range(s),
            RangeOrList::List(v) => Ok(v.clone()),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    version: u32,
    name: String,
    #[serde(default)]
    master_seed: u64,
    sigma_e: RangeOrList,
    n: RangeOrList,
    period: f64,
    sigma_h: f64,
    n_seeds: usize,
    methods: Vec<String>,
    #[serde(default)]
    gibbs: RawGibbs,
    truth: RawTruth,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGibbs {
    burn_in: Option<usize>,
    keep: Option<usize>,
    grid_points: Option<usize>,
    init_sigma: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTruth {
    mode: String,
    weights: Option<Vec<f64>>,
    locations: Option<Vec<f64>>,
    k: Option<usize>,
    min_separation: Option<f64>,
    weight_low: Option<f64>,
    weight_high: Option<f64>,
    signed: Option<bool>,
    margin: Option<f64>,
}

impl RawSpec {
    fn into_spec(self) -> Result<ExperimentSpec, HarnessError> {
        if self.version != SPEC_SCHEMA_VERSION {
            return Err(HarnessError::SpecVersion {
                found: self.version,
                expected: SPEC_SCHEMA_VERSION,
            });
        }
        let methods = self
            .methods
            .iter()
            .map(|m| {
                Method::parse(m).ok_or_else(|| {
                    HarnessError::InvalidSpec(format!(
                        "unknown method '{m}' (expected gibbs, gibbs_llse, annihilator)"
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let n_sweep = self
            .n
            .values()?
            .into_iter()
            .map(|v| {
                if v.fract() == 0.0 && v >= 1.0 {
                    Ok(v as usize)
                } else {
                    Err(HarnessError::InvalidSpec(format!(
                        "sample count {v} is not a positive integer"
                    )))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;

        let defaults = GibbsSettings::default();
        let gibbs = GibbsSettings {
            burn_in: self.gibbs.burn_in.unwrap_or(defaults.burn_in),
            keep: self.gibbs.keep.unwrap_or(defaults.keep),
            grid_points: self.gibbs.grid_points.unwrap_or(defaults.grid_points),
            init_sigma: self.gibbs.init_sigma.unwrap_or(defaults.init_sigma),
        };

        let truth = match self.truth.mode.as_str() {
            "fixed" => TruthRule::Fixed {
                weights: self.truth.weights.ok_or_else(|| {
                    HarnessError::InvalidSpec("fixed truth needs weights".into())
                })?,
                locations: self.truth.locations.ok_or_else(|| {
                    HarnessError::InvalidSpec("fixed truth needs locations".into())
                })?,
            },
            "random" => TruthRule::Random {
                k: self
                    .truth
                    .k
                    .ok_or_else(|| HarnessError::InvalidSpec("random truth needs k".into()))?,
                min_separation: self.truth.min_separation.unwrap_or(2.0 * self.period),
                weight_low: self.truth.weight_low.unwrap_or(8.0),
                weight_high: self.truth.weight_high.unwrap_or(12.0),
                signed: self.truth.signed.unwrap_or(true),
                margin: self.truth.margin.unwrap_or(2.0 * self.sigma_h),
            },
            other => {
                return Err(HarnessError::InvalidSpec(format!(
                    "unknown truth mode '{other}' (expected fixed or random)"
                )))
            }
        };

        let spec = ExperimentSpec {
            name: self.name,
            master_seed: self.master_seed,
            sigma_e_sweep: self.sigma_e.values()?,
            n_sweep,
            period: self.period,
            sigma_h: self.sigma_h,
            n_seeds: self.n_seeds,
            methods,
            gibbs,
            truth,
        };
        spec.validate()?;
        Ok(spec)
    }
}
