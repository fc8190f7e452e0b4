//! Cross-scale spectra and coherence surfaces.

use ndarray::Array5;

use crate::error::{Error, Result};

/// Cross-scale local wavelet spectral matrix on a rescaled-time grid.
///
/// `values[(j-1, j'-1, p-1, q-1, i)]` is `S_{jj'}^{(p,q)}(u_i)`.
#[derive(Debug, Clone)]
pub struct CrossScaleSpectrum {
    levels: usize,
    channels: usize,
    values: Array5<f64>,
    u_grid: Vec<f64>,
}

impl CrossScaleSpectrum {
    pub fn new(levels: usize, channels: usize, values: Array5<f64>, u_grid: Vec<f64>) -> Self {
        debug_assert_eq!(
            values.dim(),
            (levels, levels, channels, channels, u_grid.len())
        );
        Self {
            levels,
            channels,
            values,
            u_grid,
        }
    }

    pub fn zeros(levels: usize, channels: usize, u_grid: Vec<f64>) -> Self {
        let values = Array5::zeros((levels, levels, channels, channels, u_grid.len()));
        Self {
            levels,
            channels,
            values,
            u_grid,
        }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn u_grid(&self) -> &[f64] {
        &self.u_grid
    }

    pub fn values(&self) -> &Array5<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array5<f64> {
        &mut self.values
    }

    /// `S_{jj'}^{(p,q)}` at grid index `i` (scales and channels 1-based).
    pub fn get(&self, j: usize, jp: usize, p: usize, q: usize, i: usize) -> f64 {
        self.values[(j - 1, jp - 1, p - 1, q - 1, i)]
    }

    pub fn set(&mut self, j: usize, jp: usize, p: usize, q: usize, i: usize, v: f64) {
        self.values[(j - 1, jp - 1, p - 1, q - 1, i)] = v;
    }
}

/// A scale/channel pair selection `(j, p) x (j', q)`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct ScalePair {
    pub j: usize,
    pub p: usize,
    pub j_prime: usize,
    pub q: usize,
}

impl ScalePair {
    pub fn new(j: usize, p: usize, j_prime: usize, q: usize) -> Self {
        Self {
            j,
            p,
            j_prime,
            q,
        }
    }

    /// The same pair with the two members exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            j: self.j_prime,
            p: self.q,
            j_prime: self.j,
            q: self.p,
        }
    }
}

impl std::fmt::Display for ScalePair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}-{}:{}", self.j, self.p, self.j_prime, self.q)
    }
}

/// What a coherence surface measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CoherenceKind {
    /// Spectral coherence from a (true or estimated) cross-scale spectrum.
    Spectral,
    /// Moving-window correlation between subprocess series.
    Windowed,
    /// Moving-window partial correlation given control subprocesses.
    Partial,
}

/// Counts of points that could not be assigned a coherence value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CoherenceDiagnostics {
    /// Denominator at or below the relative floor.
    pub floored_denominators: usize,
    /// Negative estimated diagonal spectra encountered.
    pub negative_diagonals: usize,
    /// Zero-variance or singular windows.
    pub degenerate_windows: usize,
}

/// Time-indexed signed coherence values for a list of pairs.
///
/// Values are in `[-1, 1]`; points where the coherence is undefined hold
/// `None` rather than a clamped or NaN value. Squared coherence is the
/// pointwise square, available through [`CoherenceSurface::squared`].
#[derive(Debug, Clone)]
pub struct CoherenceSurface {
    kind: CoherenceKind,
    pairs: Vec<ScalePair>,
    /// `values[pair][i]` over the time grid.
    values: Vec<Vec<Option<f64>>>,
    /// Time grid in sample units (window centers or coefficient indices).
    times: Vec<f64>,
    /// Applied lag in samples (second member shifted forward).
    lag: isize,
    window: usize,
    step: usize,
    diagnostics: CoherenceDiagnostics,
}

impl CoherenceSurface {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kind: CoherenceKind,
        pairs: Vec<ScalePair>,
        values: Vec<Vec<Option<f64>>>,
        times: Vec<f64>,
        lag: isize,
        window: usize,
        step: usize,
        diagnostics: CoherenceDiagnostics,
    ) -> Self {
        debug_assert_eq!(pairs.len(), values.len());
        for v in &values {
            debug_assert_eq!(v.len(), times.len());
        }
        Self {
            kind,
            pairs,
            values,
            times,
            lag,
            window,
            step,
            diagnostics,
        }
    }

    pub fn kind(&self) -> CoherenceKind {
        self.kind
    }

    pub fn pairs(&self) -> &[ScalePair] {
        &self.pairs
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn lag(&self) -> isize {
        self.lag
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn diagnostics(&self) -> CoherenceDiagnostics {
        self.diagnostics
    }

    fn position(&self, pair: &ScalePair) -> Option<usize> {
        self.pairs.iter().position(|p| p == pair)
    }

    /// Signed values for `pair`, resolving the transposed pair to the
    /// same stored sequence (the construction is transpose-symmetric).
    pub fn values(&self, pair: &ScalePair) -> Result<&[Option<f64>]> {
        let idx = self
            .position(pair)
            .or_else(|| self.position(&pair.swapped()))
            .ok_or_else(|| Error::ConfigMismatch(format!("pair {pair} not in surface")))?;
        Ok(&self.values[idx])
    }

    /// Squared values for `pair`.
    pub fn squared(&self, pair: &ScalePair) -> Result<Vec<Option<f64>>> {
        Ok(self
            .values(pair)?
            .iter()
            .map(|v| v.map(|x| x * x))
            .collect())
    }

    pub fn values_by_index(&self, idx: usize) -> &[Option<f64>] {
        &self.values[idx]
    }

    /// True when two surfaces were produced on the same analysis grid.
    pub fn grid_matches(&self, other: &CoherenceSurface) -> bool {
        self.window == other.window
            && self.step == other.step
            && self.times.len() == other.times.len()
            && self
                .times
                .iter()
                .zip(&other.times)
                .all(|(a, b)| (a - b).abs() < 1e-9)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surface() -> CoherenceSurface {
        CoherenceSurface::new(
            CoherenceKind::Windowed,
            vec![ScalePair::new(1, 1, 2, 1)],
            vec![vec![Some(0.5), None, Some(-0.25)]],
            vec![25.0, 35.0, 45.0],
            0,
            50,
            10,
            CoherenceDiagnostics::default(),
        )
    }

    #[test]
    fn transposed_pair_resolves_to_same_values() {
        let s = surface();
        let direct = s.values(&ScalePair::new(1, 1, 2, 1)).unwrap();
        let swapped = s.values(&ScalePair::new(2, 1, 1, 1)).unwrap();
        assert_eq!(direct, swapped);
    }

    #[test]
    fn squared_preserves_undefined_markers() {
        let s = surface();
        let sq = s.squared(&ScalePair::new(1, 1, 2, 1)).unwrap();
        assert_eq!(sq, vec![Some(0.25), None, Some(0.0625)]);
    }

    #[test]
    fn missing_pair_is_a_mismatch() {
        let s = surface();
        assert!(s.values(&ScalePair::new(3, 1, 1, 1)).is_err());
    }
}
