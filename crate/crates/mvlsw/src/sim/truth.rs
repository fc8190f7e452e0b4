//! Exact spectra and coherence implied by a process specification.

use ndarray::Array5;

use crate::error::Result;
use crate::estimate::spectral_coherence;
use crate::sim::spec::{Level, MvLswSpec};
use crate::spectrum::{CoherenceSurface, CrossScaleSpectrum};

/// Cross-scale local wavelet spectral matrix
/// `S_{jj'}(u) = V_j(u) Q_{jj'}(u) V_{j'}(u)'` on the given grid.
pub fn true_cross_spectrum(spec: &MvLswSpec, u_grid: &[f64]) -> Result<CrossScaleSpectrum> {
    let j_max = spec.levels();
    let p = spec.channels();
    let mut values = Array5::zeros((j_max, j_max, p, p, u_grid.len()));
    for (i, &u) in u_grid.iter().enumerate() {
        for j in 1..=j_max {
            let vj = spec.transfer_at(Level::Detail(j), u)?;
            for jp in 1..=j_max {
                let vjp = spec.transfer_at(Level::Detail(jp), u)?;
                let q = spec.innovation_at(j, jp, u)?;
                let s = &vj * &q * vjp.transpose();
                for a in 0..p {
                    for b in 0..p {
                        values[(j - 1, jp - 1, a, b, i)] = s[(a, b)];
                    }
                }
            }
        }
    }
    Ok(CrossScaleSpectrum::new(
        j_max,
        p,
        values,
        u_grid.to_vec(),
    ))
}

/// Dual-scale wavelet coherence of an exact spectrum:
/// `rho_{jj'}^{(p,q)}(u) = S_{jj'}^{(p,q)} / sqrt(S_jj^{(p,p)} S_{j'j'}^{(q,q)})`.
pub fn true_coherence(spectrum: &CrossScaleSpectrum) -> CoherenceSurface {
    spectral_coherence(spectrum)
}
