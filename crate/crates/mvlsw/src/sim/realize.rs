//! Simulation of MvLSW processes with cross-scale-dependent innovations.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, Array3};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::series::{MultichannelSeries, SubprocessSet};
use crate::sim::spec::{segment_index, CorrModel, Level, MvLswSpec};
use crate::wavelet::{circular_convolve, DiscreteWaveletSet};

/// One simulated realization: the observed series, its true scale
/// subprocesses and the innovation draws that produced them.
#[derive(Debug, Clone)]
pub struct Realization {
    series: MultichannelSeries,
    subprocesses: SubprocessSet,
    /// `(block, channel, k)`; detail scales first, smooth block last.
    innovations: Array3<f64>,
    seed: u64,
}

impl Realization {
    pub fn series(&self) -> &MultichannelSeries {
        &self.series
    }

    pub fn subprocesses(&self) -> &SubprocessSet {
        &self.subprocesses
    }

    pub fn innovations(&self) -> &Array3<f64> {
        &self.innovations
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

// PSD factor F with Sigma = F F'; tiny negative eigenvalues are clamped,
// genuinely negative ones are a specification error.
fn psd_factor(sigma: &DMatrix<f64>, u: f64) -> Result<DMatrix<f64>> {
    let eig = sigma.clone().symmetric_eigen();
    let max_ev = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let tol = 1e-10 * max_ev.max(1.0);
    let min_ev = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    if min_ev < -tol {
        return Err(Error::NotPositiveSemidefinite {
            u,
            min_eigenvalue: min_ev,
        });
    }
    let n = sigma.nrows();
    let mut f = eig.eigenvectors;
    for c in 0..n {
        let s = eig.eigenvalues[c].max(0.0).sqrt();
        for r in 0..n {
            f[(r, c)] *= s;
        }
    }
    Ok(f)
}

fn stacked_covariance(spec: &MvLswSpec, u: f64) -> Result<DMatrix<f64>> {
    let p = spec.channels();
    let j_max = spec.levels();
    let n = j_max * p;
    let mut sigma = DMatrix::zeros(n, n);
    for j in 1..=j_max {
        for jp in 1..=j_max {
            let block = spec.innovation_at(j, jp, u)?;
            for r in 0..p {
                for c in 0..p {
                    sigma[((j - 1) * p + r, (jp - 1) * p + c)] = block[(r, c)];
                }
            }
        }
    }
    Ok(sigma)
}

/// Draw a realization of length `t` from `spec`, deterministically in
/// `seed`.
///
/// Innovations at each shift `k` form a stacked Gaussian vector whose
/// cross-scale blocks come from the specification; each scale's weighted
/// innovation stream is then circularly convolved with its discrete
/// non-decimated wavelet to assemble the subprocesses, and the series is
/// their sum.
pub fn simulate_mvlsw(spec: &MvLswSpec, t: usize, seed: u64) -> Result<Realization> {
    let p = spec.channels();
    let j_max = spec.levels();
    let wavelets = DiscreteWaveletSet::new(spec.filter(), j_max)?;
    if 2usize.pow(j_max as u32) > t {
        return Err(Error::InvalidParameter(format!(
            "levels {j_max} too large for length {t}"
        )));
    }
    if wavelets.support_len(j_max) > t {
        return Err(Error::InvalidParameter(format!(
            "scale-{j_max} support {} exceeds length {t}",
            wavelets.support_len(j_max)
        )));
    }

    let blocks = j_max + usize::from(spec.include_smooth());
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut innovations = Array3::zeros((blocks, p, t));

    // Factorizations of the stacked detail covariance, cached per
    // piecewise segment; identity specs skip factorization entirely.
    let independent = spec.innovation().is_independent();
    let mut segment_cache: Vec<Option<DMatrix<f64>>> = match spec.innovation() {
        CorrModel::Piecewise { breakpoints, .. } => vec![None; breakpoints.len()],
        _ => Vec::new(),
    };

    let n_detail = j_max * p;
    let mut eps = DVector::zeros(n_detail);
    for k in 0..t {
        let u = k as f64 / t as f64;
        for v in eps.iter_mut() {
            *v = rng.sample::<f64, _>(StandardNormal);
        }
        let z = if independent {
            eps.clone()
        } else {
            let factor = match spec.innovation() {
                CorrModel::Piecewise { breakpoints, .. } => {
                    let seg = segment_index(breakpoints, u);
                    if segment_cache[seg].is_none() {
                        segment_cache[seg] = Some(psd_factor(&stacked_covariance(spec, u)?, u)?);
                    }
                    segment_cache[seg].clone().unwrap()
                }
                _ => psd_factor(&stacked_covariance(spec, u)?, u)?,
            };
            &factor * &eps
        };
        for j in 0..j_max {
            for ch in 0..p {
                innovations[(j, ch, k)] = z[j * p + ch];
            }
        }
        if spec.include_smooth() {
            for ch in 0..p {
                innovations[(j_max, ch, k)] = rng.sample::<f64, _>(StandardNormal);
            }
        }
    }

    // Weighted innovation streams w_j[ch][k] = (V_j(k/T) z_{j,k})[ch],
    // then X_j[ch] = w_j[ch] (*) psi_j.
    let mut detail = Array3::zeros((j_max, p, t));
    let mut z_k = DVector::zeros(p);
    for j in 1..=j_max {
        let mut w = vec![vec![0.0; t]; p];
        for k in 0..t {
            let u = k as f64 / t as f64;
            let v = spec.transfer_at(Level::Detail(j), u)?;
            for ch in 0..p {
                z_k[ch] = innovations[(j - 1, ch, k)];
            }
            let wk = &v * &z_k;
            for ch in 0..p {
                w[ch][k] = wk[ch];
            }
        }
        for (ch, w_ch) in w.iter().enumerate() {
            // Scales with an all-zero transfer contribute nothing.
            if w_ch.iter().all(|v| *v == 0.0) {
                continue;
            }
            let x = circular_convolve(w_ch, wavelets.wavelet(j));
            for (k, v) in x.into_iter().enumerate() {
                detail[(j - 1, ch, k)] = v;
            }
        }
    }

    let smooth = if spec.include_smooth() {
        let mut sm = Array2::zeros((p, t));
        let mut w = vec![vec![0.0; t]; p];
        for k in 0..t {
            let u = k as f64 / t as f64;
            let v = spec.transfer_at(Level::Smooth, u)?;
            for ch in 0..p {
                z_k[ch] = innovations[(j_max, ch, k)];
            }
            let wk = &v * &z_k;
            for ch in 0..p {
                w[ch][k] = wk[ch];
            }
        }
        for (ch, w_ch) in w.iter().enumerate() {
            let x = circular_convolve(w_ch, wavelets.scaling(j_max));
            for (k, v) in x.into_iter().enumerate() {
                sm[(ch, k)] = v;
            }
        }
        Some(sm)
    } else {
        None
    };

    let mut data = Array2::zeros((p, t));
    for ch in 0..p {
        for k in 0..t {
            let mut acc = 0.0;
            for j in 0..j_max {
                acc += detail[(j, ch, k)];
            }
            if let Some(sm) = &smooth {
                acc += sm[(ch, k)];
            }
            data[(ch, k)] = acc;
        }
    }

    let rate = spec.sampling_rate();
    Ok(Realization {
        series: MultichannelSeries::new(data, rate)?,
        subprocesses: SubprocessSet::new(detail, smooth, rate),
        innovations,
        seed,
    })
}
