//! Reconstruction of finite-rate-of-innovation Dirac streams from noisy
//! samples of a Gaussian-filtered acquisition.
//!
//! The crate provides:
//!
//! * [`model`] — the forward acquisition model, noise injection, and the
//!   SNR / normalized-reconstruction-error metrics;
//! * [`distributions`] — the random-variate machinery (Gaussian,
//!   square-root inverted-gamma, grid sampling, rejection sampling);
//! * [`gibbs`] — the Gibbs sampler over `(c, t, σ_e)` with burn-in
//!   handling and MMSE aggregation;
//! * [`llse`] — linear least-squares re-estimation of the weights given
//!   sampled locations;
//! * [`annihilator`] — the annihilating-filter / root-finding baseline
//!   whose noise sensitivity motivates the stochastic approach;
//! * [`harness`] — seeded experiment sweeps, persistence, and summary
//!   tables.

pub mod annihilator;
pub mod demo;
pub mod distributions;
pub mod gibbs;
pub mod harness;
pub mod llse;
pub mod model;

pub use model::{
    AcquisitionConfig, FriSignal, ModelError, NoiseSpec, SampleKind, SampleVector,
};
