//! Analysis and simulation configuration files.

use anyhow::{bail, Context, Result};
use mvlsw::ndarray::Array2;
use mvlsw::sim::{Ar2LatentSpec, MixingSchedule, MvLswSpecFile};
use mvlsw::spectrum::ScalePair;
use serde::{Deserialize, Serialize};

/// Analysis settings; command-line flags override file values.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Wavelet family label (`haar`, `db1`..`db10`).
    pub wavelet: Option<String>,
    /// Decomposition depth `J`.
    pub levels: Option<usize>,
    /// Moving-window length in samples.
    pub window: Option<usize>,
    /// Moving-window step in samples.
    pub step: Option<usize>,
    /// Lag in samples applied to the second pair member.
    pub lag: Option<i64>,
    /// Lag in seconds (converted via the sampling rate).
    pub lag_seconds: Option<f64>,
    /// Rectangular smoother half-width `M`.
    pub smoothing: Option<usize>,
    /// Pairs in `j:p-j':q` form.
    pub pairs: Option<Vec<String>>,
    /// Control subprocesses `j:p` for partial coherence.
    pub controls: Option<Vec<String>>,
    /// Significance levels for the null thresholds.
    pub quantiles: Option<Vec<f64>>,
    /// Null-simulation replicate count.
    pub nsim: Option<usize>,
    /// Permutation count.
    pub nperm: Option<usize>,
    pub seed: Option<u64>,
    /// Sampling-rate override in Hz.
    pub sampling_rate: Option<f64>,
    /// Maximum frequency for band labeling (defaults to rate/2).
    pub fmax: Option<f64>,
}

impl AnalysisConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("invalid analysis config {}", path.display()))
    }
}

/// Parse `j:p-j':q` into a pair selection.
pub fn parse_pair(text: &str) -> Result<ScalePair> {
    let err = || format!("pair '{text}' is not of the form j:p-j':q");
    let (a, b) = text.split_once('-').with_context(err)?;
    let parse_side = |side: &str| -> Result<(usize, usize)> {
        let (j, p) = side.split_once(':').with_context(err)?;
        Ok((
            j.trim().parse::<usize>().with_context(err)?,
            p.trim().parse::<usize>().with_context(err)?,
        ))
    };
    let (j, p) = parse_side(a)?;
    let (jp, q) = parse_side(b)?;
    if j == 0 || p == 0 || jp == 0 || q == 0 {
        bail!("pair '{text}' uses 1-based scale and channel indices");
    }
    Ok(ScalePair::new(j, p, jp, q))
}

/// Parse a `j:p` control selector.
pub fn parse_control(text: &str) -> Result<(usize, usize)> {
    let err = || format!("control '{text}' is not of the form j:p");
    let (j, p) = text.split_once(':').with_context(err)?;
    let j = j.trim().parse::<usize>().with_context(err)?;
    let p = p.trim().parse::<usize>().with_context(err)?;
    if j == 0 || p == 0 {
        bail!("control '{text}' uses 1-based indices");
    }
    Ok((j, p))
}

/// What `simulate` generates.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimulationConfig {
    /// An MvLSW process specification (piecewise-constant tables).
    Mvlsw(MvLswSpecFile),
    /// AR(2) latent processes combined by a time-varying mixture.
    Ar2Mixture(Ar2MixtureFile),
}

impl SimulationConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("invalid simulation config {}", path.display()))
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Ar2LatentFile {
    pub modulus: f64,
    pub frequency: f64,
    #[serde(default = "one")]
    pub noise_sd: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Ar2MixtureFile {
    pub sampling_rate: f64,
    pub duration_seconds: f64,
    pub latents: Vec<Ar2LatentFile>,
    /// Segment start times in seconds (first must be 0) and one
    /// channels-by-latents weight matrix per segment.
    pub schedule_breakpoints_seconds: Vec<f64>,
    pub schedule_weights: Vec<Vec<Vec<f64>>>,
}

impl Ar2MixtureFile {
    pub fn latent_specs(&self) -> Result<Vec<Ar2LatentSpec>> {
        self.latents
            .iter()
            .map(|l| {
                Ar2LatentSpec::new(l.modulus, l.frequency, l.noise_sd)
                    .map_err(anyhow::Error::from)
            })
            .collect()
    }

    pub fn schedule(&self) -> Result<MixingSchedule> {
        if self.schedule_weights.len() != self.schedule_breakpoints_seconds.len() {
            bail!("schedule needs one weight matrix per breakpoint");
        }
        let weights = self
            .schedule_weights
            .iter()
            .map(|rows| {
                let nr = rows.len();
                let nc = rows.first().map(|r| r.len()).unwrap_or(0);
                if nr == 0 || rows.iter().any(|r| r.len() != nc) {
                    bail!("ragged or empty schedule weight matrix");
                }
                Ok(Array2::from_shape_fn((nr, nc), |(r, c)| rows[r][c]))
            })
            .collect::<Result<Vec<_>>>()?;
        let breakpoints = self
            .schedule_breakpoints_seconds
            .iter()
            .map(|s| (s * self.sampling_rate).round() as usize)
            .collect();
        Ok(MixingSchedule {
            breakpoints,
            weights,
            sampling_rate: self.sampling_rate,
        })
    }

    pub fn len(&self) -> usize {
        (self.duration_seconds * self.sampling_rate).round() as usize
    }
}
