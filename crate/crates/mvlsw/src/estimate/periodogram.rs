//! Raw and smoothed cross-scale wavelet periodograms and the
//! inner-product bias correction.

use nalgebra::DMatrix;
use ndarray::Array5;

use crate::error::{Error, Result};
use crate::estimate::EmpiricalCoeffs;
use crate::spectrum::CrossScaleSpectrum;
use crate::wavelet::InnerProductOperator;

/// Cross-scale periodogram at a fixed coefficient lag `delta`.
///
/// `values[(j-1, j'-1, p-1, q-1, k)] = d_{j,k}^{(p)} d_{j',k-delta}^{(q)}`
/// (circularly wrapped), possibly smoothed over a rectangular window of
/// half-width `m`.
#[derive(Debug, Clone)]
pub struct CrossScalePeriodogram {
    values: Array5<f64>,
    levels: usize,
    channels: usize,
    lag: isize,
    smoothed: bool,
    window_halfwidth: usize,
}

impl CrossScalePeriodogram {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.values.dim().4
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lag(&self) -> isize {
        self.lag
    }

    pub fn smoothed(&self) -> bool {
        self.smoothed
    }

    pub fn window_halfwidth(&self) -> usize {
        self.window_halfwidth
    }

    /// Entry at scales `(j, j')`, channels `(p, q)`, shift `k` (1-based
    /// scales and channels).
    pub fn get(&self, j: usize, jp: usize, p: usize, q: usize, k: usize) -> f64 {
        self.values[(j - 1, jp - 1, p - 1, q - 1, k)]
    }

    pub fn values(&self) -> &Array5<f64> {
        &self.values
    }
}

/// Raw periodogram `I_{jj',k(k-delta)}` over all scale and channel pairs.
pub fn raw_cross_periodogram(d: &EmpiricalCoeffs, lag: isize) -> Result<CrossScalePeriodogram> {
    let t = d.len() as isize;
    if lag.abs() >= t {
        return Err(Error::InvalidParameter(format!(
            "coefficient lag {lag} out of range for length {t}"
        )));
    }
    let levels = d.levels();
    let channels = d.channels();
    let tt = d.len();
    let mut values = Array5::zeros((levels, levels, channels, channels, tt));
    for j in 1..=levels {
        for jp in 1..=levels {
            for p in 1..=channels {
                for q in 1..=channels {
                    for k in 0..tt {
                        let k2 = (k as isize - lag).rem_euclid(t) as usize;
                        values[(j - 1, jp - 1, p - 1, q - 1, k)] =
                            d.get(p, j, k) * d.get(q, jp, k2);
                    }
                }
            }
        }
    }
    Ok(CrossScalePeriodogram {
        values,
        levels,
        channels,
        lag,
        smoothed: false,
        window_halfwidth: 0,
    })
}

/// Rectangular smoother of length `2m + 1` across time, both coefficient
/// indices shifted together so the lag is preserved; circular at the
/// boundaries.
pub fn smooth_periodogram(
    raw: &CrossScalePeriodogram,
    m: usize,
) -> Result<CrossScalePeriodogram> {
    let t = raw.len();
    if 2 * m + 1 > t {
        return Err(Error::InvalidParameter(format!(
            "smoothing window {} longer than series {t}",
            2 * m + 1
        )));
    }
    let mut values = raw.values.clone();
    if m > 0 {
        let norm = 1.0 / (2.0 * m as f64 + 1.0);
        for j in 0..raw.levels {
            for jp in 0..raw.levels {
                for p in 0..raw.channels {
                    for q in 0..raw.channels {
                        // Running circular sum over the window.
                        let src: Vec<f64> =
                            (0..t).map(|k| raw.values[(j, jp, p, q, k)]).collect();
                        let mut acc = 0.0;
                        for off in -(m as isize)..=(m as isize) {
                            acc += src[off.rem_euclid(t as isize) as usize];
                        }
                        for k in 0..t {
                            values[(j, jp, p, q, k)] = acc * norm;
                            let old = (k as isize - m as isize).rem_euclid(t as isize) as usize;
                            let new = (k as isize + m as isize + 1).rem_euclid(t as isize) as usize;
                            acc += src[new] - src[old];
                        }
                    }
                }
            }
        }
    }
    Ok(CrossScalePeriodogram {
        values,
        levels: raw.levels,
        channels: raw.channels,
        lag: raw.lag,
        smoothed: true,
        window_halfwidth: m,
    })
}

/// Bias correction: the inverse inner-product operator applied across
/// scale pairs, turning a smoothed periodogram into a spectrum estimate.
#[derive(Debug, Clone)]
pub struct SpectrumCorrector {
    levels: usize,
    lag: isize,
    inverse: DMatrix<f64>,
}

impl SpectrumCorrector {
    /// Invert the operator once; ill-conditioning propagates as an error.
    pub fn new(operator: &InnerProductOperator) -> Result<Self> {
        Ok(Self {
            levels: operator.levels(),
            lag: operator.lag(),
            inverse: operator.invert()?,
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn lag(&self) -> isize {
        self.lag
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }
}

/// Unbias a smoothed cross-scale periodogram: for every channel pair and
/// shift, the vector of smoothed values over scale pairs is multiplied by
/// the inverse operator.
pub fn bias_correct(
    smoothed: &CrossScalePeriodogram,
    corrector: &SpectrumCorrector,
) -> Result<CrossScaleSpectrum> {
    if !smoothed.smoothed() {
        return Err(Error::ConfigMismatch(
            "bias correction needs a smoothed periodogram (smooth with m >= 0 first)".into(),
        ));
    }
    if corrector.levels() != smoothed.levels() {
        return Err(Error::ConfigMismatch(format!(
            "corrector has {} levels, periodogram has {}",
            corrector.levels(),
            smoothed.levels()
        )));
    }
    if corrector.lag() != smoothed.lag() {
        return Err(Error::ConfigMismatch(format!(
            "corrector lag {} does not match periodogram lag {}",
            corrector.lag(),
            smoothed.lag()
        )));
    }
    let levels = smoothed.levels();
    let channels = smoothed.channels();
    let t = smoothed.len();
    let n = levels * levels;
    let u_grid: Vec<f64> = (0..t).map(|k| k as f64 / t as f64).collect();
    let mut out = CrossScaleSpectrum::zeros(levels, channels, u_grid);
    let inv = corrector.inverse();
    let mut vec_in = vec![0.0; n];
    for p in 0..channels {
        for q in 0..channels {
            for k in 0..t {
                for (idx, v) in vec_in.iter_mut().enumerate() {
                    let (l, lp) = (idx / levels, idx % levels);
                    *v = smoothed.values()[(l, lp, p, q, k)];
                }
                for row in 0..n {
                    let mut acc = 0.0;
                    for (col, v) in vec_in.iter().enumerate() {
                        acc += inv[(row, col)] * v;
                    }
                    let (j, jp) = (row / levels, row % levels);
                    out.values_mut()[(j, jp, p, q, k)] = acc;
                }
            }
        }
    }
    Ok(out)
}
