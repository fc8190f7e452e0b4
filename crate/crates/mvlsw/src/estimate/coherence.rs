//! Coherence surfaces: spectral, moving-window and partial.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::series::SubprocessSet;
use crate::spectrum::{
    CoherenceDiagnostics, CoherenceKind, CoherenceSurface, CrossScaleSpectrum, ScalePair,
};

/// Relative denominator floor for spectral coherence; diagonal power at
/// or below `floor * max diagonal` marks the point undefined.
const DENOMINATOR_FLOOR: f64 = 1e-12;

/// Rank cutoff for within-window correlation matrices.
const SINGULARITY_CUTOFF: f64 = 1e-12;

/// Dual-scale coherence of a (true or estimated) cross-scale spectrum.
///
/// Negative or floored diagonal entries mark the point undefined rather
/// than clipping; counts are reported in the surface diagnostics. Values
/// are clamped to `[-1, 1]`.
pub fn spectral_coherence(spectrum: &CrossScaleSpectrum) -> CoherenceSurface {
    let j_max = spectrum.levels();
    let p_max = spectrum.channels();
    let grid = spectrum.u_grid();
    let mut diagnostics = CoherenceDiagnostics::default();

    let mut max_diag = 0.0f64;
    for j in 1..=j_max {
        for p in 1..=p_max {
            for i in 0..grid.len() {
                max_diag = max_diag.max(spectrum.get(j, j, p, p, i));
            }
        }
    }
    let floor = DENOMINATOR_FLOOR * max_diag;

    let mut pairs = Vec::new();
    let mut values = Vec::new();
    for j in 1..=j_max {
        for p in 1..=p_max {
            for jp in 1..=j_max {
                for q in 1..=p_max {
                    // Canonical member order; the transpose resolves to
                    // the same stored entry.
                    if (jp, q) < (j, p) {
                        continue;
                    }
                    let mut series = Vec::with_capacity(grid.len());
                    for i in 0..grid.len() {
                        let num = spectrum.get(j, jp, p, q, i);
                        let da = spectrum.get(j, j, p, p, i);
                        let db = spectrum.get(jp, jp, q, q, i);
                        if da < 0.0 || db < 0.0 {
                            diagnostics.negative_diagonals += 1;
                            series.push(None);
                        } else if da <= floor || db <= floor {
                            diagnostics.floored_denominators += 1;
                            series.push(None);
                        } else {
                            series.push(Some((num / (da * db).sqrt()).clamp(-1.0, 1.0)));
                        }
                    }
                    pairs.push(ScalePair::new(j, p, jp, q));
                    values.push(series);
                }
            }
        }
    }
    CoherenceSurface::new(
        CoherenceKind::Spectral,
        pairs,
        values,
        grid.to_vec(),
        0,
        0,
        0,
        diagnostics,
    )
}

fn window_starts(t: usize, window: usize, step: usize, lag: isize) -> Result<Vec<usize>> {
    if window == 0 || step == 0 {
        return Err(Error::InvalidParameter(
            "window and step must be positive".into(),
        ));
    }
    if window > t {
        return Err(Error::InvalidParameter(format!(
            "window {window} longer than series {t}"
        )));
    }
    let lo = (-lag).max(0) as usize;
    let reach = window + lag.max(0) as usize;
    if reach > t || lo + window > t {
        return Err(Error::InvalidParameter(format!(
            "lag {lag} leaves no room for window {window} in series of length {t}"
        )));
    }
    let hi = t - reach;
    Ok((lo..=hi).step_by(step).collect())
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        None
    } else {
        Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
    }
}

fn validate_pairs(sub: &SubprocessSet, pairs: &[ScalePair]) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("no pairs requested".into()));
    }
    for pair in pairs {
        if pair.j == 0
            || pair.j > sub.levels()
            || pair.j_prime == 0
            || pair.j_prime > sub.levels()
            || pair.p == 0
            || pair.p > sub.channels()
            || pair.q == 0
            || pair.q > sub.channels()
        {
            return Err(Error::InvalidParameter(format!(
                "pair {pair} outside levels 1..={} / channels 1..={}",
                sub.levels(),
                sub.channels()
            )));
        }
    }
    Ok(())
}

/// Moving-window correlation between subprocess series.
///
/// For each window start `s`, the Pearson correlation between
/// `X_j^{(p)}[s .. s+window)` and `X_{j'}^{(q)}[s+lag .. s+lag+window)`.
/// Windows that would reach outside the series are not emitted; windows
/// with zero variance yield undefined markers. Squared coherence is
/// available through [`CoherenceSurface::squared`].
pub fn windowed_coherence(
    sub: &SubprocessSet,
    pairs: &[ScalePair],
    window: usize,
    step: usize,
    lag: isize,
) -> Result<CoherenceSurface> {
    validate_pairs(sub, pairs)?;
    let starts = window_starts(sub.len(), window, step, lag)?;
    let times: Vec<f64> = starts
        .iter()
        .map(|s| *s as f64 + (window as f64 - 1.0) / 2.0)
        .collect();
    let mut diagnostics = CoherenceDiagnostics::default();
    let mut values = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let x = sub.series(pair.j, pair.p);
        let y = sub.series(pair.j_prime, pair.q);
        let mut series = Vec::with_capacity(starts.len());
        for &s in &starts {
            let ys = (s as isize + lag) as usize;
            let r = pearson(&x[s..s + window], &y[ys..ys + window]);
            if r.is_none() {
                diagnostics.degenerate_windows += 1;
            }
            series.push(r);
        }
        values.push(series);
    }
    Ok(CoherenceSurface::new(
        CoherenceKind::Windowed,
        pairs.to_vec(),
        values,
        times,
        lag,
        window,
        step,
        diagnostics,
    ))
}

// Correlation matrix of the columns of `data`; None when a column has no
// variance.
fn correlation_matrix(data: &[Vec<f64>]) -> Option<DMatrix<f64>> {
    let m = data.len();
    let n = data[0].len() as f64;
    let means: Vec<f64> = data.iter().map(|c| c.iter().sum::<f64>() / n).collect();
    let mut cov = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in a..m {
            let acc: f64 = data[a]
                .iter()
                .zip(&data[b])
                .map(|(x, y)| (x - means[a]) * (y - means[b]))
                .sum();
            cov[(a, b)] = acc;
            cov[(b, a)] = acc;
        }
    }
    let mut corr = DMatrix::zeros(m, m);
    for a in 0..m {
        if cov[(a, a)] <= 0.0 {
            return None;
        }
    }
    for a in 0..m {
        for b in 0..m {
            corr[(a, b)] = cov[(a, b)] / (cov[(a, a)] * cov[(b, b)]).sqrt();
        }
    }
    Some(corr)
}

/// Moving-window partial correlation of each pair given control
/// subprocesses, via the inverse within-window correlation matrix.
///
/// Controls are taken over the unlagged window (aligned with the first
/// pair member). Singular within-window correlation matrices (for
/// example a control identical to a pair member) yield undefined
/// markers. With no controls this reduces to [`windowed_coherence`].
pub fn partial_windowed_coherence(
    sub: &SubprocessSet,
    pairs: &[ScalePair],
    controls: &[(usize, usize)],
    window: usize,
    step: usize,
    lag: isize,
) -> Result<CoherenceSurface> {
    if controls.is_empty() {
        let mut surface = windowed_coherence(sub, pairs, window, step, lag)?;
        surface = CoherenceSurface::new(
            CoherenceKind::Partial,
            surface.pairs().to_vec(),
            pairs
                .iter()
                .map(|p| surface.values(p).map(|v| v.to_vec()))
                .collect::<Result<Vec<_>>>()?,
            surface.times().to_vec(),
            lag,
            window,
            step,
            surface.diagnostics(),
        );
        return Ok(surface);
    }
    validate_pairs(sub, pairs)?;
    for (j, p) in controls {
        if *j == 0 || *j > sub.levels() || *p == 0 || *p > sub.channels() {
            return Err(Error::InvalidParameter(format!(
                "control ({j},{p}) outside levels/channels"
            )));
        }
    }
    let starts = window_starts(sub.len(), window, step, lag)?;
    let times: Vec<f64> = starts
        .iter()
        .map(|s| *s as f64 + (window as f64 - 1.0) / 2.0)
        .collect();
    let control_series: Vec<Vec<f64>> = controls.iter().map(|(j, p)| sub.series(*j, *p)).collect();
    let mut diagnostics = CoherenceDiagnostics::default();
    let mut values = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let x = sub.series(pair.j, pair.p);
        let y = sub.series(pair.j_prime, pair.q);
        let mut series = Vec::with_capacity(starts.len());
        for &s in &starts {
            let ys = (s as isize + lag) as usize;
            let mut cols: Vec<Vec<f64>> = Vec::with_capacity(2 + control_series.len());
            cols.push(x[s..s + window].to_vec());
            cols.push(y[ys..ys + window].to_vec());
            for c in &control_series {
                cols.push(c[s..s + window].to_vec());
            }
            let value = correlation_matrix(&cols).and_then(|corr| {
                let svd = corr.clone().svd(true, true);
                let smax = svd.singular_values.max();
                let smin = svd.singular_values.min();
                if smin <= SINGULARITY_CUTOFF * smax {
                    return None;
                }
                let inv = corr.try_inverse()?;
                let denom = inv[(0, 0)] * inv[(1, 1)];
                if denom <= 0.0 {
                    return None;
                }
                Some((-inv[(0, 1)] / denom.sqrt()).clamp(-1.0, 1.0))
            });
            if value.is_none() {
                diagnostics.degenerate_windows += 1;
            }
            series.push(value);
        }
        values.push(series);
    }
    Ok(CoherenceSurface::new(
        CoherenceKind::Partial,
        pairs.to_vec(),
        values,
        times,
        lag,
        window,
        step,
        diagnostics,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::MultichannelSeries;
    use ndarray::{Array2, Array3};
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn subprocesses_from(series: Vec<Vec<(usize, usize, Vec<f64>)>>) -> SubprocessSet {
        // series: list of (j, p, values); dimensions inferred.
        let levels = series
            .iter()
            .flatten()
            .map(|(j, _, _)| *j)
            .max()
            .unwrap();
        let channels = series
            .iter()
            .flatten()
            .map(|(_, p, _)| *p)
            .max()
            .unwrap();
        let t = series[0][0].2.len();
        let mut detail = Array3::zeros((levels, channels, t));
        for group in &series {
            for (j, p, vals) in group {
                for (ti, v) in vals.iter().enumerate() {
                    detail[(j - 1, p - 1, ti)] = *v;
                }
            }
        }
        SubprocessSet::new(detail, None, 1.0)
    }

    #[test]
    fn self_pair_at_zero_lag_is_one_everywhere() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..200).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sub = subprocesses_from(vec![vec![(1, 1, x)]]);
        let s = windowed_coherence(&sub, &[ScalePair::new(1, 1, 1, 1)], 50, 10, 0).unwrap();
        for v in s.values(&ScalePair::new(1, 1, 1, 1)).unwrap() {
            assert_eq!(*v, Some(1.0));
        }
        let sq = s.squared(&ScalePair::new(1, 1, 1, 1)).unwrap();
        assert!(sq.iter().all(|v| *v == Some(1.0)));
    }

    #[test]
    fn zero_variance_window_is_undefined() {
        let x = vec![1.0; 100];
        let y: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let sub = subprocesses_from(vec![vec![(1, 1, x), (2, 1, y)]]);
        let s = windowed_coherence(&sub, &[ScalePair::new(1, 1, 2, 1)], 20, 20, 0).unwrap();
        assert!(s
            .values(&ScalePair::new(1, 1, 2, 1))
            .unwrap()
            .iter()
            .all(|v| v.is_none()));
        assert!(s.diagnostics().degenerate_windows > 0);
    }

    #[test]
    fn lag_shifts_recover_a_delayed_copy() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..300).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut y = vec![0.0; 300];
        y[7..].copy_from_slice(&x[..293]);
        let sub = subprocesses_from(vec![vec![(1, 1, x), (2, 1, y)]]);
        let s = windowed_coherence(&sub, &[ScalePair::new(1, 1, 2, 1)], 50, 10, 7).unwrap();
        let vals = s.values(&ScalePair::new(1, 1, 2, 1)).unwrap();
        // Away from the zero-padded head every window is exactly aligned.
        for v in vals.iter().skip(2) {
            assert!(v.unwrap() > 0.999, "{v:?}");
        }
    }

    #[test]
    fn window_grid_respects_lag_bounds() {
        let x = vec![0.0; 100];
        let sub = subprocesses_from(vec![vec![(1, 1, x)]]);
        let pair = [ScalePair::new(1, 1, 1, 1)];
        let s = windowed_coherence(&sub, &pair, 50, 10, 40).unwrap();
        assert_eq!(s.times().len(), 2); // starts 0 and 10
        assert!(windowed_coherence(&sub, &pair, 50, 10, 60).is_err());
        let neg = windowed_coherence(&sub, &pair, 50, 10, -30).unwrap();
        assert_eq!(neg.times().len(), 3); // starts 30, 40, 50
    }

    #[test]
    fn empty_control_set_reduces_to_windowed() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..200).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..200)
            .map(|i| 0.6 * x[i] + 0.4 * rng.gen_range(-1.0..1.0))
            .collect();
        let sub = subprocesses_from(vec![vec![(1, 1, x), (2, 1, y)]]);
        let pair = [ScalePair::new(1, 1, 2, 1)];
        let plain = windowed_coherence(&sub, &pair, 40, 10, 0).unwrap();
        let partial = partial_windowed_coherence(&sub, &pair, &[], 40, 10, 0).unwrap();
        assert_eq!(partial.kind(), CoherenceKind::Partial);
        assert_eq!(
            plain.values(&pair[0]).unwrap(),
            partial.values(&pair[0]).unwrap()
        );
    }

    #[test]
    fn control_identical_to_a_member_is_undefined() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let x: Vec<f64> = (0..120).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..120).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sub = subprocesses_from(vec![vec![(1, 1, x), (2, 1, y)]]);
        let pair = [ScalePair::new(1, 1, 2, 1)];
        let s = partial_windowed_coherence(&sub, &pair, &[(1, 1)], 40, 20, 0).unwrap();
        assert!(s.values(&pair[0]).unwrap().iter().all(|v| v.is_none()));
        assert!(s.diagnostics().degenerate_windows > 0);
    }

    #[test]
    fn known_gaussian_triple_partial_correlation_is_recovered() {
        // x = c + e1 and y = c + rho e1 + sqrt(1 - rho^2) e2 have partial
        // correlation exactly rho given c.
        use rand_distr::StandardNormal;
        let rho = 0.5f64;
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let t = 10_000;
        let mut draw = |_: usize| -> f64 { rng.sample(StandardNormal) };
        let c: Vec<f64> = (0..t).map(&mut draw).collect();
        let e1: Vec<f64> = (0..t).map(&mut draw).collect();
        let e2: Vec<f64> = (0..t).map(&mut draw).collect();
        let x: Vec<f64> = (0..t).map(|i| c[i] + e1[i]).collect();
        let y: Vec<f64> = (0..t)
            .map(|i| c[i] + rho * e1[i] + (1.0 - rho * rho).sqrt() * e2[i])
            .collect();
        let sub = subprocesses_from(vec![vec![(1, 1, x), (2, 1, c.clone()), (3, 1, y)]]);
        let pair = [ScalePair::new(1, 1, 3, 1)];
        let window = t / 200; // 200 windows
        let partial =
            partial_windowed_coherence(&sub, &pair, &[(2, 1)], window, window, 0).unwrap();
        let vals = partial.values(&pair[0]).unwrap();
        assert!(vals.len() >= 200);
        let mean = vals.iter().map(|v| v.unwrap()).sum::<f64>() / vals.len() as f64;
        assert!(
            (mean - rho).abs() < 0.1,
            "recovered partial correlation {mean:.3}, expected {rho}"
        );

        // The zero-partial construction: y given c independent of x.
        let y0: Vec<f64> = (0..t).map(|i| c[i] + e2[i]).collect();
        let sub0 = subprocesses_from(vec![vec![(1, 1, sub.series(1, 1)), (2, 1, c), (3, 1, y0)]]);
        let plain = windowed_coherence(&sub0, &pair, 500, 250, 0).unwrap();
        let partial0 =
            partial_windowed_coherence(&sub0, &pair, &[(2, 1)], 500, 250, 0).unwrap();
        let mean_of = |s: &CoherenceSurface| {
            let vals = s.values(&pair[0]).unwrap();
            vals.iter().map(|v| v.unwrap()).sum::<f64>() / vals.len() as f64
        };
        assert!(mean_of(&plain) > 0.3, "plain {}", mean_of(&plain));
        assert!(mean_of(&partial0).abs() < 0.1, "partial {}", mean_of(&partial0));
    }

    #[test]
    fn spectral_coherence_marks_negative_diagonals() {
        use ndarray::Array5;
        let mut values = Array5::zeros((2, 2, 1, 1, 2));
        // S_11 = -0.5 (negative), S_22 = 1, cross = 0.1 at both points.
        for i in 0..2 {
            values[(0, 0, 0, 0, i)] = -0.5;
            values[(1, 1, 0, 0, i)] = 1.0;
            values[(0, 1, 0, 0, i)] = 0.1;
            values[(1, 0, 0, 0, i)] = 0.1;
        }
        let s = CrossScaleSpectrum::new(2, 1, values, vec![0.25, 0.75]);
        let rho = spectral_coherence(&s);
        let cross = rho.values(&ScalePair::new(1, 1, 2, 1)).unwrap();
        assert!(cross.iter().all(|v| v.is_none()));
        assert_eq!(rho.diagnostics().negative_diagonals, cross.len() * 2);
        let diag = rho.values(&ScalePair::new(2, 1, 2, 1)).unwrap();
        assert!(diag.iter().all(|v| *v == Some(1.0)));
    }

    #[test]
    fn partial_surface_respects_checked_dimensions() {
        let x = vec![0.0; 50];
        let sub = subprocesses_from(vec![vec![(1, 1, x)]]);
        let pair = [ScalePair::new(1, 1, 1, 1)];
        assert!(partial_windowed_coherence(&sub, &pair, &[(4, 1)], 20, 10, 0).is_err());
        assert!(windowed_coherence(&sub, &[ScalePair::new(1, 2, 1, 1)], 20, 10, 0).is_err());
    }

    // Keep MultichannelSeries linked into this module's tests: decompose
    // then correlate a channel with itself.
    #[test]
    fn decomposed_channel_is_coherent_with_itself() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let data = Array2::from_shape_fn((1, 256), |_| rng.gen_range(-1.0f64..1.0));
        let series = MultichannelSeries::new(data, 1.0).unwrap();
        let f = crate::wavelet::QuadratureMirrorPair::daubechies(2).unwrap();
        let sub = SubprocessSet::decompose(&series, &f, 3).unwrap();
        let s = windowed_coherence(&sub, &[ScalePair::new(2, 1, 2, 1)], 64, 32, 0).unwrap();
        for v in s.values(&ScalePair::new(2, 1, 2, 1)).unwrap() {
            assert_eq!(*v, Some(1.0));
        }
    }
}
