//! Linear least-squares re-estimation of the weights.
//!
//! Once the locations are fixed, the samples are linear in the weights:
//! `y = H c + e` with `H[n][k] = h(nT - t̂_k)`. The refit solves the
//! normal equations `HᵀH c = Hᵀy` through an SVD rather than an explicit
//! inverse; Gaussian columns at nearby locations are close to collinear
//! and the explicit formula would amplify that badly.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::model::{gaussian_kernel_unchecked, AcquisitionConfig, SampleVector};

/// Condition-number ceiling beyond which the system is reported as
/// degenerate instead of solved.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Locations closer than this (in units of the sample period) are merged
/// before solving.
pub const MERGE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum LlseError {
    #[error("sample vector has {samples} entries but the acquisition expects {expected}")]
    ShapeMismatch { samples: usize, expected: usize },
    #[error("no locations supplied")]
    EmptyLocations,
    #[error(
        "design matrix is degenerate (condition number {condition:.3e}); closest columns are {col_a} and {col_b}"
    )]
    DegenerateLocations {
        col_a: usize,
        col_b: usize,
        condition: f64,
    },
    #[error("singular-value decomposition failed to produce a solution")]
    SolveFailed,
}

/// The N×K matrix of kernel responses at the estimated locations.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    entries: DMatrix<f64>,
}

impl DesignMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn shape(&self) -> (usize, usize) {
        self.entries.shape()
    }
}

/// Build `H[n][k] = h(nT - t̂_k)` for rows `n = 0..N-1`.
pub fn build_design_matrix(t_hat: &[f64], acq: &AcquisitionConfig) -> DesignMatrix {
    let sigma_h = acq.sigma_h();
    let entries = DMatrix::from_fn(acq.n_samples(), t_hat.len(), |n, k| {
        gaussian_kernel_unchecked(acq.sample_time(n) - t_hat[k], sigma_h)
    });
    DesignMatrix { entries }
}

/// The weight solution together with any merge bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct LlseSolution {
    /// One weight per input location (merged groups share their fitted
    /// weight equally).
    pub weights: Vec<f64>,
    /// Groups of input indices that were collapsed to a single column.
    pub merged_groups: Vec<Vec<usize>>,
    /// Condition number of the (merged) design matrix.
    pub condition: f64,
}

/// Least-squares weights for the given locations: the minimizer of
/// `‖H c - y‖²`.
pub fn llse_refine(
    y: &SampleVector,
    t_hat: &[f64],
    acq: &AcquisitionConfig,
) -> Result<Vec<f64>, LlseError> {
    llse_refine_full(y, t_hat, acq).map(|s| s.weights)
}

/// As [`llse_refine`], also reporting merged near-duplicate locations and
/// the observed condition number.
pub fn llse_refine_full(
    y: &SampleVector,
    t_hat: &[f64],
    acq: &AcquisitionConfig,
) -> Result<LlseSolution, LlseError> {
    if t_hat.is_empty() {
        return Err(LlseError::EmptyLocations);
    }
    if y.len() != acq.n_samples() {
        return Err(LlseError::ShapeMismatch {
            samples: y.len(),
            expected: acq.n_samples(),
        });
    }

    // Group locations within the merge tolerance; the sampler occasionally
    // collapses two components onto one spot and the unguarded solve would
    // blow up on the identical columns.
    let tol = MERGE_TOLERANCE * acq.period();
    let mut order: Vec<usize> = (0..t_hat.len()).collect();
    order.sort_by(|&a, &b| t_hat[a].partial_cmp(&t_hat[b]).expect("finite locations"));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &idx in &order {
        match groups.last_mut() {
            Some(group) if (t_hat[idx] - t_hat[*group.last().unwrap()]).abs() < tol => {
                group.push(idx)
            }
            _ => groups.push(vec![idx]),
        }
    }
    let merged_locations: Vec<f64> = groups
        .iter()
        .map(|g| g.iter().map(|&i| t_hat[i]).sum::<f64>() / g.len() as f64)
        .collect();

    let design = build_design_matrix(&merged_locations, acq);
    let rhs = DVector::from_column_slice(&y.values);
    let svd = design.entries.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    let condition = if s_min > 0.0 {
        s_max / s_min
    } else {
        f64::INFINITY
    };
    if condition > CONDITION_LIMIT {
        let (col_a, col_b) = closest_pair(&merged_locations);
        return Err(LlseError::DegenerateLocations {
            col_a: groups[col_a][0],
            col_b: groups[col_b][0],
            condition,
        });
    }
    let solved = svd
        .solve(&rhs, s_max * 1e-15)
        .map_err(|_| LlseError::SolveFailed)?;

    // Scatter merged weights back: identical columns are interchangeable,
    // so an even split preserves the fitted signal.
    let mut weights = vec![0.0; t_hat.len()];
    for (g, group) in groups.iter().enumerate() {
        let share = solved[g] / group.len() as f64;
        for &i in group {
            weights[i] = share;
        }
    }
    let merged_groups = groups.into_iter().filter(|g| g.len() > 1).collect();
    Ok(LlseSolution {
        weights,
        merged_groups,
        condition,
    })
}

fn closest_pair(locations: &[f64]) -> (usize, usize) {
    let mut best = (0, locations.len().saturating_sub(1));
    let mut best_gap = f64::INFINITY;
    for i in 0..locations.len() {
        for j in (i + 1)..locations.len() {
            let gap = (locations[i] - locations[j]).abs();
            if gap < best_gap {
                best_gap = gap;
                best = (i, j);
            }
        }
    }
    best
}
