//! Canonical demonstration scenarios shared by the CLI defaults, the
//! bundled experiment configs, and the acceptance suite.
//!
//! Both scenarios use K = 5 Diracs observed through N = 30 samples at
//! unit period; they differ in kernel width and amplitude scale because
//! they showcase different regimes:
//!
//! * [`breakdown_demo`] — a wide kernel (σ_h = 4) and centered layout
//!   chosen so the annihilating-filter pipeline recovers the noiseless
//!   signal to machine precision while noise at 137 dB SNR already
//!   wrecks it. The exponential reweighting spans about e^17 here; much
//!   narrower kernels push that beyond double precision and break even
//!   the noiseless case, much wider ones blunt the breakdown.
//! * [`sampler_demo`] — a σ_h = 2 layout with resolvable bumps for the
//!   Gibbs estimator quality checks (about 16 dB SNR at σ_e = 2.5).
//! * [`sampler_demo_low_snr`] — the same layout scaled to 10.2 dB at
//!   σ_e = 2.5, matching the noise level used for the σ_e-estimation
//!   checks; at this level its SNR under σ_e = 10⁻⁶ noise is ≈ 138 dB.

use crate::model::{AcquisitionConfig, FriSignal};

/// σ_e used by the noisy sampler demonstrations.
pub const DEMO_SIGMA_E: f64 = 2.5;

/// Annihilating-filter showcase: exact noiseless recovery, collapse under
/// σ_e = 10⁻⁶ (SNR ≈ 137 dB).
pub fn breakdown_demo() -> (FriSignal, AcquisitionConfig) {
    let signal = FriSignal::new(
        vec![13.4, -10.7, 16.1, -12.0, 14.7],
        vec![6.4, 10.7, 14.6, 18.3, 22.6],
    )
    .expect("static demo signal");
    let acq = AcquisitionConfig::new(4.0, 1.0, 30).expect("static demo acquisition");
    (signal, acq)
}

/// Gibbs estimator showcase at ≈ 16 dB SNR for σ_e = 2.5.
pub fn sampler_demo() -> (FriSignal, AcquisitionConfig) {
    let signal = FriSignal::new(
        vec![23.7, -19.0, 28.5, -21.4, 26.1],
        vec![4.2, 9.5, 14.1, 19.8, 25.3],
    )
    .expect("static demo signal");
    let acq = AcquisitionConfig::new(2.0, 1.0, 30).expect("static demo acquisition");
    (signal, acq)
}

/// The same layout as [`sampler_demo`] scaled down to ≈ 10.2 dB SNR at
/// σ_e = 2.5.
pub fn sampler_demo_low_snr() -> (FriSignal, AcquisitionConfig) {
    let signal = FriSignal::new(
        vec![12.2, -9.7, 14.6, -11.0, 13.4],
        vec![4.2, 9.5, 14.1, 19.8, 25.3],
    )
    .expect("static demo signal");
    let acq = AcquisitionConfig::new(2.0, 1.0, 30).expect("static demo acquisition");
    (signal, acq)
}
