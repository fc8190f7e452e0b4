//! Discrete non-decimated wavelets, the forward transform and the
//! multiresolution decomposition.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::wavelet::QuadratureMirrorPair;

/// Discrete non-decimated wavelet vectors `psi_j` (and the matching
/// scaling vectors `phi_j`) for scales `j = 1..=J`, each sampled on a
/// support starting at offset 0 and normalized to unit l2 norm.
#[derive(Debug, Clone)]
pub struct DiscreteWaveletSet {
    levels: usize,
    wavelets: Vec<Vec<f64>>,
    scaling: Vec<Vec<f64>>,
}

// One cascade step: upsample `prev` by two and convolve with `h`,
// out[n] = sum_k h[n - 2k] prev[k].
fn cascade_step(h: &[f64], prev: &[f64]) -> Vec<f64> {
    let out_len = 2 * prev.len() + h.len() - 2;
    let mut out = vec![0.0; out_len];
    for (k, &p) in prev.iter().enumerate() {
        for (i, &hv) in h.iter().enumerate() {
            out[i + 2 * k] += hv * p;
        }
    }
    out
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
}

impl DiscreteWaveletSet {
    /// Build the wavelet vectors for scales `1..=levels` by the cascade
    /// `psi_1 = g`, `psi_{j+1}[n] = sum_k h[n-2k] psi_j[k]`.
    pub fn new(filter: &QuadratureMirrorPair, levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::InvalidParameter(
                "number of scales must be at least 1".into(),
            ));
        }
        let h = filter.low_pass();
        let mut wavelets = Vec::with_capacity(levels);
        let mut scaling = Vec::with_capacity(levels);
        let mut psi = filter.high_pass().to_vec();
        let mut phi = h.to_vec();
        normalize(&mut psi);
        normalize(&mut phi);
        wavelets.push(psi);
        scaling.push(phi);
        for j in 1..levels {
            let mut psi = cascade_step(h, &wavelets[j - 1]);
            let mut phi = cascade_step(h, &scaling[j - 1]);
            normalize(&mut psi);
            normalize(&mut phi);
            wavelets.push(psi);
            scaling.push(phi);
        }
        Ok(Self {
            levels,
            wavelets,
            scaling,
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Scale-`j` wavelet vector (1-based scale).
    pub fn wavelet(&self, j: usize) -> &[f64] {
        &self.wavelets[j - 1]
    }

    /// Scale-`j` scaling vector (1-based scale).
    pub fn scaling(&self, j: usize) -> &[f64] {
        &self.scaling[j - 1]
    }

    pub fn support_len(&self, j: usize) -> usize {
        self.wavelets[j - 1].len()
    }
}

/// Circular cross-correlation `out[k] = sum_m kernel[m] x[(k + m) mod T]`.
pub(crate) fn circular_correlate(x: &[f64], kernel: &[f64]) -> Vec<f64> {
    let t = x.len();
    let mut out = vec![0.0; t];
    for (k, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        let mut idx = k;
        for &kv in kernel {
            acc += kv * x[idx];
            idx += 1;
            if idx == t {
                idx = 0;
            }
        }
        *o = acc;
    }
    out
}

/// Circular convolution `out[t] = sum_m kernel[m] x[(t - m) mod T]`.
pub(crate) fn circular_convolve(x: &[f64], kernel: &[f64]) -> Vec<f64> {
    let t = x.len();
    let mut out = vec![0.0; t];
    for (ti, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        let mut idx = ti;
        for &kv in kernel {
            acc += kv * x[idx];
            idx = if idx == 0 { t - 1 } else { idx - 1 };
        }
        *o = acc;
    }
    out
}

fn validate_levels(x_len: usize, wavelets: &DiscreteWaveletSet) -> Result<()> {
    let levels = wavelets.levels();
    let max_level = if x_len >= 1 {
        (usize::BITS - 1 - x_len.leading_zeros()) as usize
    } else {
        0
    };
    if levels > max_level {
        return Err(Error::InvalidParameter(format!(
            "levels {levels} too large for series length {x_len} (need 2^levels <= length)"
        )));
    }
    let support = wavelets
        .support_len(levels)
        .max(wavelets.scaling(levels).len());
    if support > x_len {
        return Err(Error::InvalidParameter(format!(
            "scale-{levels} support {support} exceeds series length {x_len}"
        )));
    }
    Ok(())
}

/// Non-decimated wavelet transform under periodic boundary handling.
///
/// Returns a `(levels + 1) x T` matrix: row `j - 1` holds the detail
/// coefficients `d_{j,k} = sum_m psi_j(m) x[(k+m) mod T]` and the last
/// row holds the scale-`levels` smooth coefficients.
pub fn nondecimated_transform(
    x: &[f64],
    filter: &QuadratureMirrorPair,
    levels: usize,
) -> Result<Array2<f64>> {
    let wavelets = DiscreteWaveletSet::new(filter, levels)?;
    nondecimated_transform_with(x, &wavelets)
}

/// As [`nondecimated_transform`] but reusing precomputed wavelet vectors.
pub fn nondecimated_transform_with(
    x: &[f64],
    wavelets: &DiscreteWaveletSet,
) -> Result<Array2<f64>> {
    validate_levels(x.len(), wavelets)?;
    let levels = wavelets.levels();
    let mut out = Array2::zeros((levels + 1, x.len()));
    for j in 1..=levels {
        let row = circular_correlate(x, wavelets.wavelet(j));
        for (k, v) in row.into_iter().enumerate() {
            out[(j - 1, k)] = v;
        }
    }
    let smooth = circular_correlate(x, wavelets.scaling(levels));
    for (k, v) in smooth.into_iter().enumerate() {
        out[(levels, k)] = v;
    }
    Ok(out)
}

/// Multiresolution components of a single series: `levels` detail series
/// plus the final smooth series, all of the input length.
#[derive(Debug, Clone)]
pub struct MraDecomposition {
    pub details: Vec<Vec<f64>>,
    pub smooth: Vec<f64>,
}

/// Split `x` into detail components `D_1..D_J` and a smooth remainder.
///
/// The components reconstruct the input exactly under the periodic
/// boundary: synthesis projects each coefficient row back through its
/// wavelet with weight `2^-j`, and the two-channel filter identity makes
/// the weighted projections telescope to the identity.
pub fn mra_decompose(
    x: &[f64],
    filter: &QuadratureMirrorPair,
    levels: usize,
) -> Result<MraDecomposition> {
    let wavelets = DiscreteWaveletSet::new(filter, levels)?;
    mra_decompose_with(x, &wavelets)
}

/// As [`mra_decompose`] but reusing precomputed wavelet vectors.
pub fn mra_decompose_with(x: &[f64], wavelets: &DiscreteWaveletSet) -> Result<MraDecomposition> {
    let coeffs = nondecimated_transform_with(x, wavelets)?;
    let levels = wavelets.levels();
    let mut details = Vec::with_capacity(levels);
    for j in 1..=levels {
        let d_row = coeffs.row(j - 1).to_vec();
        let mut comp = circular_convolve(&d_row, wavelets.wavelet(j));
        let w = 0.5f64.powi(j as i32);
        for v in comp.iter_mut() {
            *v *= w;
        }
        details.push(comp);
    }
    let s_row = coeffs.row(levels).to_vec();
    let mut smooth = circular_convolve(&s_row, wavelets.scaling(levels));
    let w = 0.5f64.powi(levels as i32);
    for v in smooth.iter_mut() {
        *v *= w;
    }
    Ok(MraDecomposition { details, smooth })
}
