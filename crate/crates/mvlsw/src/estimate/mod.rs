//! Spectral estimation: empirical coefficients, cross-scale
//! periodograms, bias correction, covariance reconstruction and
//! coherence estimators.

mod coeffs;
mod coherence;
mod covariance;
mod periodogram;

pub use coeffs::{empirical_coefficients, EmpiricalCoeffs};
pub use coherence::{partial_windowed_coherence, spectral_coherence, windowed_coherence};
pub use covariance::covariance_from_spectrum;
pub use periodogram::{
    bias_correct, raw_cross_periodogram, smooth_periodogram, CrossScalePeriodogram,
    SpectrumCorrector,
};
