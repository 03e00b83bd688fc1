//! Annihilating-filter baseline.
//!
//! Exponentially reweighting the Gaussian-filtered samples,
//! `p[n] = exp(n²T²/2σ_h²)·z[n]`, turns them into a sum of `K` real
//! exponentials `p[n] = Σ_k a_k u_k^n` with `u_k = exp(t_k T/σ_h²)` and
//! `a_k = c_k exp(-t_k²/2σ_h²)`. A filter annihilating that sequence is
//! found as the smallest right singular vector of the convolution matrix;
//! its roots encode the locations and a least-squares fit recovers the
//! weights.
//!
//! The point of carrying this pipeline is its noise behaviour: the
//! reweighting amplifies any sample-domain noise exponentially in `n`, so
//! recovery is exact on noiseless data yet falls apart at SNRs where the
//! stochastic estimator is untroubled.

use nalgebra::{Complex, DMatrix};
use thiserror::Error;

use crate::llse::{llse_refine, LlseError};
use crate::model::{AcquisitionConfig, FriSignal, ModelError, SampleVector};

/// The exponential weight exceeds f64 range beyond this exponent.
const MAX_WEIGHT_EXPONENT: f64 = 700.0;

/// Relative spread below which the two smallest singular values are
/// reported as tied.
const SINGULAR_TIE_TOLERANCE: f64 = 1e-9;

/// Leading filter coefficients smaller than this times the norm indicate a
/// degree-deficient filter.
const LEADING_COEFF_FLOOR: f64 = 1e-8;

/// Imaginary parts below this (relative) threshold count as real roots.
const IMAGINARY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum AnnihilatorError {
    #[error(
        "exponential weight overflows at sample {n}: exponent {exponent:.1} exceeds {MAX_WEIGHT_EXPONENT}; reduce N or widen the kernel"
    )]
    WeightOverflow { n: usize, exponent: f64 },
    #[error("need N >= 2K+1 samples for order {k}, got {n}")]
    TooFewSamples { n: usize, k: usize },
    #[error("annihilating filter has a vanishing leading coefficient")]
    DegenerateFilter,
    #[error("root {index} maps outside the location domain (u = {value:.6e} <= 0)")]
    NonPositiveRoot { index: usize, value: f64 },
    #[error("weight recovery failed: {0}")]
    WeightRecovery(#[from] LlseError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The reweighted sequence `p[n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSequence {
    pub p: Vec<f64>,
}

/// Unit-norm annihilating-filter coefficients (length K+1).
#[derive(Debug, Clone, PartialEq)]
pub struct AnnihilatorCoeffs {
    pub a: Vec<f64>,
    /// The two smallest singular values were nearly equal, making the
    /// choice of null vector ambiguous.
    pub near_tie: bool,
}

/// Locations recovered from the filter roots.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredLocations {
    pub locations: Vec<f64>,
    /// Complex-conjugate root pairs were projected onto the real line.
    pub projected: bool,
}

/// Full pipeline output.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnihilatorReconstruction {
    pub signal: FriSignal,
    pub projected_roots: bool,
    pub singular_near_tie: bool,
}

/// Apply `p[n] = exp(n²T²/2σ_h²)·z[n]`, guarding against overflow of the
/// weight itself.
pub fn exponential_weights(
    z: &SampleVector,
    acq: &AcquisitionConfig,
) -> Result<WeightedSequence, AnnihilatorError> {
    let scale = acq.period() * acq.period() / (2.0 * acq.sigma_h() * acq.sigma_h());
    let last = z.len().saturating_sub(1) as f64;
    let worst = last * last * scale;
    if worst > MAX_WEIGHT_EXPONENT {
        return Err(AnnihilatorError::WeightOverflow {
            n: z.len() - 1,
            exponent: worst,
        });
    }
    let p = z
        .values
        .iter()
        .enumerate()
        .map(|(n, &v)| ((n * n) as f64 * scale).exp() * v)
        .collect();
    Ok(WeightedSequence { p })
}

/// The filter annihilating `p`: the right singular vector of the
/// convolution matrix `P` (rows `[p[n], p[n-1], ..., p[n-K]]` for
/// `n = K..N-1`) associated with its smallest singular value. Minimizing
/// `‖Pa‖` over unit vectors demands the smallest singular pair; in the
/// noiseless rank-K case `Pa = 0` holds to machine precision.
pub fn annihilating_filter(
    p: &WeightedSequence,
    k: usize,
) -> Result<AnnihilatorCoeffs, AnnihilatorError> {
    let n = p.p.len();
    if k == 0 || n < 2 * k + 1 {
        return Err(AnnihilatorError::TooFewSamples { n, k });
    }
    let rows = n - k;
    let conv = DMatrix::from_fn(rows, k + 1, |r, c| p.p[k + r - c]);
    let svd = conv.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let mut idx = 0usize;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s < svd.singular_values[idx] {
            idx = i;
        }
    }
    let mut second = f64::INFINITY;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if i != idx && s < second {
            second = s;
        }
    }
    let smallest = svd.singular_values[idx];
    let near_tie = second.is_finite()
        && (second - smallest).abs() <= SINGULAR_TIE_TOLERANCE * second.max(f64::MIN_POSITIVE);

    let a: Vec<f64> = v_t.row(idx).iter().cloned().collect();
    Ok(AnnihilatorCoeffs { a, near_tie })
}

/// Roots of `A(z) = Σ_n a[n] z^{-n}` (equivalently of the degree-K
/// polynomial `Σ_n a[n] z^{K-n}`) via companion-matrix eigenvalues, mapped
/// to locations `t_k = σ_h² ln(u_k) / T`.
///
/// Noise routinely pushes root pairs off the real axis. The set of
/// real-rooted polynomials is not a subspace, so there is no exact
/// orthogonal projection onto it; each complex-conjugate pair is replaced
/// by its real part (repeated) and the output is flagged. Roots that are
/// still non-positive have no real location and fail loudly.
pub fn roots_to_locations(
    coeffs: &AnnihilatorCoeffs,
    acq: &AcquisitionConfig,
) -> Result<RecoveredLocations, AnnihilatorError> {
    let a = &coeffs.a;
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if a[0].abs() < LEADING_COEFF_FLOOR * norm {
        return Err(AnnihilatorError::DegenerateFilter);
    }
    let k = a.len() - 1;
    // Monic form: z^K + b_1 z^{K-1} + ... + b_K.
    let b: Vec<f64> = a[1..].iter().map(|&x| x / a[0]).collect();
    let companion = DMatrix::from_fn(k, k, |r, c| {
        if c == k - 1 {
            -b[k - 1 - r]
        } else if r == c + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eigen = companion.complex_eigenvalues();
    let (roots, projected) = project_real_roots(eigen.as_slice());

    let mut locations = Vec::with_capacity(k);
    for (index, &u) in roots.iter().enumerate() {
        if u <= 0.0 {
            return Err(AnnihilatorError::NonPositiveRoot { index, value: u });
        }
        locations.push(acq.sigma_h() * acq.sigma_h() * u.ln() / acq.period());
    }
    locations.sort_by(|x, y| x.partial_cmp(y).expect("finite locations"));
    Ok(RecoveredLocations {
        locations,
        projected,
    })
}

/// Replace each conjugate pair by its real part repeated, preserving the
/// root count.
fn project_real_roots(eigen: &[Complex<f64>]) -> (Vec<f64>, bool) {
    let mut projected = false;
    let mut used = vec![false; eigen.len()];
    let mut out = Vec::with_capacity(eigen.len());
    for i in 0..eigen.len() {
        if used[i] {
            continue;
        }
        let z = eigen[i];
        if z.im.abs() <= IMAGINARY_TOLERANCE * (1.0 + z.re.abs()) {
            out.push(z.re);
            used[i] = true;
            continue;
        }
        projected = true;
        // Find the conjugate partner; real companion matrices produce
        // exact conjugate pairs, but match tolerantly.
        let mut partner = None;
        for j in (i + 1)..eigen.len() {
            if used[j]
                || eigen[j].im * z.im >= 0.0
                || (eigen[j].re - z.re).abs() > 1e-6 * (1.0 + z.re.abs())
            {
                continue;
            }
            partner = Some(j);
            break;
        }
        used[i] = true;
        out.push(z.re);
        if let Some(j) = partner {
            used[j] = true;
            out.push(eigen[j].re);
        }
    }
    (out, projected)
}

/// Full baseline pipeline: reweight, annihilate, root-find, then refit the
/// weights on the original samples at the recovered locations.
pub fn annihilate_reconstruct(
    y: &SampleVector,
    k: usize,
    acq: &AcquisitionConfig,
) -> Result<AnnihilatorReconstruction, AnnihilatorError> {
    let p = exponential_weights(y, acq)?;
    let coeffs = annihilating_filter(&p, k)?;
    let recovered = roots_to_locations(&coeffs, acq)?;
    let weights = llse_refine(y, &recovered.locations, acq)?;
    let signal = FriSignal::new(weights, recovered.locations)?;
    Ok(AnnihilatorReconstruction {
        signal,
        projected_roots: recovered.projected,
        singular_near_tie: coeffs.near_tie,
    })
}
