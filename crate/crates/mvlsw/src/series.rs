//! Multichannel time series and scale-specific subprocess containers.

use ndarray::{Array2, Array3};

use crate::error::{Error, Result};
use crate::wavelet::{mra_decompose, QuadratureMirrorPair};

/// A `P x T` real-valued multichannel series with a sampling rate in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelSeries {
    data: Array2<f64>,
    sampling_rate: f64,
}

impl MultichannelSeries {
    pub fn new(data: Array2<f64>, sampling_rate: f64) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::InvalidParameter(
                "series must have at least one channel and one sample".into(),
            ));
        }
        if sampling_rate <= 0.0 || sampling_rate.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "sampling rate must be positive, got {sampling_rate}"
            )));
        }
        Ok(Self {
            data,
            sampling_rate,
        })
    }

    /// Build a single-channel series from a slice.
    pub fn from_channel(x: &[f64], sampling_rate: f64) -> Result<Self> {
        let data = Array2::from_shape_vec((1, x.len()), x.to_vec())
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Self::new(data, sampling_rate)
    }

    pub fn channels(&self) -> usize {
        self.data.nrows()
    }

    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.ncols() == 0
    }

    pub fn sampling_rate(&self) -> f64 {
        self.sampling_rate
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    /// Channel `p` (1-based) as a contiguous vector.
    pub fn channel(&self, p: usize) -> Vec<f64> {
        self.data.row(p - 1).to_vec()
    }
}

/// Scale-specific subprocesses of a multichannel series.
///
/// `detail[(j-1, p-1, t)]` holds the scale-`j` component of channel `p`;
/// the optional smooth level holds the final coarse component. When the
/// smooth level is present the components sum back to the original series.
#[derive(Debug, Clone)]
pub struct SubprocessSet {
    detail: Array3<f64>,
    smooth: Option<Array2<f64>>,
    sampling_rate: f64,
}

impl SubprocessSet {
    pub fn new(detail: Array3<f64>, smooth: Option<Array2<f64>>, sampling_rate: f64) -> Self {
        Self {
            detail,
            smooth,
            sampling_rate,
        }
    }

    /// Multiresolution decomposition of every channel of `series`.
    pub fn decompose(
        series: &MultichannelSeries,
        filter: &QuadratureMirrorPair,
        levels: usize,
    ) -> Result<Self> {
        let p = series.channels();
        let t = series.len();
        let mut detail = Array3::zeros((levels, p, t));
        let mut smooth = Array2::zeros((p, t));
        for ch in 1..=p {
            let x = series.channel(ch);
            let mra = mra_decompose(&x, filter, levels)?;
            for j in 1..=levels {
                for (ti, v) in mra.details[j - 1].iter().enumerate() {
                    detail[(j - 1, ch - 1, ti)] = *v;
                }
            }
            for (ti, v) in mra.smooth.iter().enumerate() {
                smooth[(ch - 1, ti)] = *v;
            }
        }
        Ok(Self {
            detail,
            smooth: Some(smooth),
            sampling_rate: series.sampling_rate(),
        })
    }

    pub fn levels(&self) -> usize {
        self.detail.dim().0
    }

    pub fn channels(&self) -> usize {
        self.detail.dim().1
    }

    pub fn len(&self) -> usize {
        self.detail.dim().2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sampling_rate(&self) -> f64 {
        self.sampling_rate
    }

    pub fn detail(&self) -> &Array3<f64> {
        &self.detail
    }

    pub fn smooth(&self) -> Option<&Array2<f64>> {
        self.smooth.as_ref()
    }

    /// Scale-`j` subprocess of channel `p` (both 1-based).
    pub fn series(&self, j: usize, p: usize) -> Vec<f64> {
        (0..self.len())
            .map(|t| self.detail[(j - 1, p - 1, t)])
            .collect()
    }

    /// Sum of all components of channel `p`, including the smooth level.
    pub fn reconstruct_channel(&self, p: usize) -> Vec<f64> {
        let t = self.len();
        let mut out = vec![0.0; t];
        for j in 0..self.levels() {
            for (ti, o) in out.iter_mut().enumerate() {
                *o += self.detail[(j, p - 1, ti)];
            }
        }
        if let Some(s) = &self.smooth {
            for (ti, o) in out.iter_mut().enumerate() {
                *o += s[(p - 1, ti)];
            }
        }
        out
    }
}
