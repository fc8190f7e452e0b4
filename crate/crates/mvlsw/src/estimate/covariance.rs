//! Local auto- and cross-covariance reconstructed from a spectrum.

use ndarray::Array4;

use crate::error::{Error, Result};
use crate::spectrum::CrossScaleSpectrum;
use crate::wavelet::AutocorrTable;

/// Dual-scale local covariance
/// `c_{jj'}^{(p,q)}(u, tau) = S_{jj'}^{(p,q)}(u) Psi_{jj'}(tau)`
/// for every scale and channel pair, evaluated at the grid point nearest
/// to `u`. Lags outside the autocorrelation support give zero.
pub fn covariance_from_spectrum(
    spectrum: &CrossScaleSpectrum,
    table: &AutocorrTable,
    u: f64,
    tau: isize,
) -> Result<Array4<f64>> {
    if table.levels() < spectrum.levels() {
        return Err(Error::ConfigMismatch(format!(
            "autocorrelation table covers {} levels, spectrum needs {}",
            table.levels(),
            spectrum.levels()
        )));
    }
    let grid = spectrum.u_grid();
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty spectrum grid".into()));
    }
    let i = grid
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - u).abs().total_cmp(&(b.1 - u).abs()))
        .map(|(i, _)| i)
        .unwrap();
    let j_max = spectrum.levels();
    let p_max = spectrum.channels();
    let mut out = Array4::zeros((j_max, j_max, p_max, p_max));
    for j in 1..=j_max {
        for jp in 1..=j_max {
            let psi = table.get(j, jp, tau);
            for p in 1..=p_max {
                for q in 1..=p_max {
                    out[(j - 1, jp - 1, p - 1, q - 1)] = spectrum.get(j, jp, p, q, i) * psi;
                }
            }
        }
    }
    Ok(out)
}
