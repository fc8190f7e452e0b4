//! Empirical wavelet coefficients of observed data.

use ndarray::Array3;

use crate::error::Result;
use crate::series::MultichannelSeries;
use crate::wavelet::{nondecimated_transform_with, DiscreteWaveletSet, QuadratureMirrorPair};

/// Per-channel non-decimated wavelet coefficients.
///
/// `values[(p-1, j-1, k)]` holds `d_{j,k}` for channel `p`; row `levels`
/// holds the final smooth coefficients. Coefficients are plain circular
/// correlations with the unit-norm discrete wavelets: with this
/// convention the mean of the raw cross-scale periodogram is exactly the
/// inner-product-operator image of the spectrum, which the bias
/// correction later inverts.
#[derive(Debug, Clone)]
pub struct EmpiricalCoeffs {
    values: Array3<f64>,
    levels: usize,
    filter_label: String,
}

impl EmpiricalCoeffs {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn channels(&self) -> usize {
        self.values.dim().0
    }

    pub fn len(&self) -> usize {
        self.values.dim().2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn filter_label(&self) -> &str {
        &self.filter_label
    }

    /// `d_{j,k}` for channel `p` (1-based channel and scale).
    pub fn get(&self, p: usize, j: usize, k: usize) -> f64 {
        self.values[(p - 1, j - 1, k)]
    }

    /// Smooth coefficient for channel `p` at shift `k`.
    pub fn smooth(&self, p: usize, k: usize) -> f64 {
        self.values[(p - 1, self.levels, k)]
    }

    pub fn values(&self) -> &Array3<f64> {
        &self.values
    }
}

/// Transform every channel of `x` through the non-decimated wavelet
/// transform at `levels` scales.
pub fn empirical_coefficients(
    x: &MultichannelSeries,
    filter: &QuadratureMirrorPair,
    levels: usize,
) -> Result<EmpiricalCoeffs> {
    let wavelets = DiscreteWaveletSet::new(filter, levels)?;
    let p = x.channels();
    let t = x.len();
    let mut values = Array3::zeros((p, levels + 1, t));
    for ch in 1..=p {
        let coeffs = nondecimated_transform_with(&x.channel(ch), &wavelets)?;
        for j in 0..=levels {
            for k in 0..t {
                values[(ch - 1, j, k)] = coeffs[(j, k)];
            }
        }
    }
    Ok(EmpiricalCoeffs {
        values,
        levels,
        filter_label: filter.family_label().to_string(),
    })
}
