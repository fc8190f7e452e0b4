//! Monte-Carlo null distribution of coherence under cross-scale
//! independence, and significance masking against its quantiles.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimate::windowed_coherence;
use crate::rng::derive_seed;
use crate::sim::{simulate_mvlsw, CorrModel, MvLswSpec, TransferModel};
use crate::spectrum::{CoherenceSurface, ScalePair};
use crate::wavelet::QuadratureMirrorPair;

/// Analysis geometry for a null simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct NullConfig {
    pub levels: usize,
    pub len: usize,
    pub channels: usize,
    pub window: usize,
    pub step: usize,
    /// Lag applied to the second pair member, in samples.
    pub lag: isize,
    pub n_sim: usize,
    pub seed: u64,
}

/// Empirical distribution of `|coherence|` under the independence null,
/// pooled pointwise across time, pairs and replicates.
#[derive(Debug, Clone)]
pub struct NullDistribution {
    samples: Vec<f64>,
    config: NullConfig,
    filter_label: String,
}

impl NullDistribution {
    /// Sorted pooled samples.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn config(&self) -> &NullConfig {
        &self.config
    }

    pub fn filter_label(&self) -> &str {
        &self.filter_label
    }

    /// Empirical quantile of `|coherence|` at `level` in (0, 1).
    pub fn threshold(&self, level: f64) -> Result<f64> {
        if !(0.0 < level && level < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "quantile level must be in (0, 1), got {level}"
            )));
        }
        let n = self.samples.len();
        let idx = ((level * n as f64).ceil() as usize).clamp(1, n) - 1;
        Ok(self.samples[idx])
    }

    /// Threshold for squared coherence: the square of the signed one.
    pub fn threshold_squared(&self, level: f64) -> Result<f64> {
        self.threshold(level).map(|t| t * t)
    }
}

/// All distinct member pairs `(j, p) < (j', q)` of a `levels x channels`
/// subprocess grid: every cross-scale pair plus same-scale cross-channel
/// pairs, all of which have zero coherence under the null.
pub fn null_pairs(levels: usize, channels: usize) -> Vec<ScalePair> {
    let mut pairs = Vec::new();
    for j in 1..=levels {
        for p in 1..=channels {
            for jp in 1..=levels {
                for q in 1..=channels {
                    if (j, p) < (jp, q) {
                        pairs.push(ScalePair::new(j, p, jp, q));
                    }
                }
            }
        }
    }
    pairs
}

fn h0_spec(levels: usize, channels: usize, filter: &QuadratureMirrorPair) -> Result<MvLswSpec> {
    let v = DMatrix::identity(channels, channels);
    MvLswSpec::new(
        channels,
        levels,
        filter.clone(),
        TransferModel::constant(vec![v; levels], None),
        CorrModel::Independent,
    )
}

/// One null replicate's pooled `|coherence|` values.
fn null_replicate(
    spec: &MvLswSpec,
    pairs: &[ScalePair],
    cfg: &NullConfig,
    replicate: u64,
) -> Result<Vec<f64>> {
    let real = simulate_mvlsw(spec, cfg.len, derive_seed(cfg.seed, replicate))?;
    let surface = windowed_coherence(
        real.subprocesses(),
        pairs,
        cfg.window,
        cfg.step,
        cfg.lag,
    )?;
    let mut out = Vec::new();
    for pair in pairs {
        for v in surface.values(pair)?.iter().flatten() {
            out.push(v.abs());
        }
    }
    Ok(out)
}

/// Simulate `n_sim` replicates under the independence null and pool the
/// windowed `|coherence|` values into an empirical distribution.
///
/// Replicates use derived seeds, so the result does not depend on worker
/// scheduling.
pub fn null_distribution(
    cfg: &NullConfig,
    filter: &QuadratureMirrorPair,
) -> Result<NullDistribution> {
    if cfg.n_sim < 100 {
        return Err(Error::InvalidParameter(format!(
            "null simulation needs at least 100 replicates, got {}",
            cfg.n_sim
        )));
    }
    let spec = h0_spec(cfg.levels, cfg.channels, filter)?;
    let pairs = null_pairs(cfg.levels, cfg.channels);
    let mut samples: Vec<f64> = (0..cfg.n_sim as u64)
        .into_par_iter()
        .map(|r| null_replicate(&spec, &pairs, cfg, r))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    samples.sort_by(f64::total_cmp);
    Ok(NullDistribution {
        samples,
        config: cfg.clone(),
        filter_label: filter.family_label().to_string(),
    })
}

/// Boolean exceedance series per pair at a significance level.
#[derive(Debug, Clone)]
pub struct SignificanceMask {
    pub pairs: Vec<ScalePair>,
    /// `masks[pair][i]`: true where `|coherence|` exceeds the threshold.
    pub masks: Vec<Vec<bool>>,
    pub level: f64,
    pub threshold: f64,
}

/// Mark where a surface exceeds the null threshold at `level`.
///
/// The surface must have been produced with the same window, step and
/// lag as the null simulation.
pub fn significance_mask(
    surface: &CoherenceSurface,
    dist: &NullDistribution,
    level: f64,
) -> Result<SignificanceMask> {
    let cfg = dist.config();
    if surface.window() != cfg.window || surface.step() != cfg.step || surface.lag() != cfg.lag
    {
        return Err(Error::ConfigMismatch(format!(
            "surface (window {}, step {}, lag {}) does not match null (window {}, step {}, lag {})",
            surface.window(),
            surface.step(),
            surface.lag(),
            cfg.window,
            cfg.step,
            cfg.lag
        )));
    }
    let threshold = dist.threshold(level)?;
    let masks = surface
        .pairs()
        .iter()
        .enumerate()
        .map(|(i, _)| {
            surface
                .values_by_index(i)
                .iter()
                .map(|v| matches!(v, Some(x) if x.abs() > threshold))
                .collect()
        })
        .collect();
    Ok(SignificanceMask {
        pairs: surface.pairs().to_vec(),
        masks,
        level,
        threshold,
    })
}
