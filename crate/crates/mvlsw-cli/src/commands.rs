//! Subcommand implementations.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mvlsw::estimate::{
    bias_correct, empirical_coefficients, partial_windowed_coherence, raw_cross_periodogram,
    smooth_periodogram, windowed_coherence, SpectrumCorrector,
};
use mvlsw::infer::{null_distribution, significance_mask, NullConfig, NullDistribution};
use mvlsw::rng::derive_seed;
use mvlsw::sim::{mix_timevarying, simulate_ar2, simulate_mvlsw, MvLswSpec};
use mvlsw::spectrum::{CoherenceSurface, ScalePair};
use mvlsw::wavelet::{AutocorrTable, DiscreteWaveletSet, InnerProductOperator, QuadratureMirrorPair};
use mvlsw::{MultichannelSeries, SubprocessSet};
use serde_json::json;

use crate::cli::{
    CoherenceArgs, DecomposeArgs, NullThresholdArgs, PermtestArgs, SimulateArgs, SpectrumArgs,
};
use crate::config::{parse_control, parse_pair, AnalysisConfig, SimulationConfig};
use crate::csv_io::{
    load_csv, write_components_csv, write_series_csv, LoadedSeries, ResultRow, ResultTable,
};
use crate::manifest::RunManifest;
use crate::util::{log_return, scale_to_band};

fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))
}

fn default_channel_names(p: usize) -> Vec<String> {
    (1..=p).map(|i| format!("ch{i}")).collect()
}

pub fn run_simulate(args: &SimulateArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let config = SimulationConfig::load(&args.config)?;
    let (series, names, settings) = match config {
        SimulationConfig::Mvlsw(file) => {
            let len = args
                .len
                .context("--len is required when simulating an MvLSW specification")?;
            let settings = json!({
                "kind": "mvlsw",
                "channels": file.channels,
                "levels": file.levels,
                "wavelet": file.wavelet.clone(),
                "len": len,
                "sampling_rate": file.sampling_rate,
            });
            let spec = MvLswSpec::try_from(file)?;
            let realization = simulate_mvlsw(&spec, len, args.seed)?;
            let names = default_channel_names(spec.channels());
            (realization.series().clone(), names, settings)
        }
        SimulationConfig::Ar2Mixture(ref file) => {
            let specs = file.latent_specs()?;
            let schedule = file.schedule()?;
            let len = file.len();
            let latents: Vec<Vec<f64>> = specs
                .iter()
                .enumerate()
                .map(|(i, s)| simulate_ar2(s, len, derive_seed(args.seed, i as u64)))
                .collect();
            let series = mix_timevarying(&latents, &schedule)?;
            let names = default_channel_names(series.channels());
            let settings = json!({
                "kind": "ar2_mixture",
                "latents": file.latents.len(),
                "len": len,
                "sampling_rate": file.sampling_rate,
            });
            (series, names, settings)
        }
    };
    let series_path = args.out.join("series.csv");
    write_series_csv(&series_path, &series, &names)?;
    RunManifest::new("simulate", Some(args.seed), settings)
        .with_input(&args.config)
        .with_output(&series_path)
        .write(&args.out.join("manifest.json"))?;
    eprintln!(
        "simulate: wrote {} ({} channels x {} samples)",
        series_path.display(),
        series.channels(),
        series.len()
    );
    Ok(())
}

/// Load the input series, applying rate override and optional log-return
/// preprocessing (which drops the first `n` undefined samples).
fn load_input(
    input: &Path,
    rate_override: Option<f64>,
    log_return_periods: Option<usize>,
) -> Result<LoadedSeries> {
    let mut loaded = load_csv(input, rate_override)?;
    if let Some(n) = log_return_periods {
        let p = loaded.series.channels();
        let t = loaded.series.len();
        if t <= n {
            bail!("log-return period {n} leaves no samples");
        }
        let mut data = mvlsw::ndarray::Array2::zeros((p, t - n));
        for ch in 1..=p {
            let returns = log_return(&loaded.series.channel(ch), n)?;
            for (i, v) in returns.iter().skip(n).enumerate() {
                data[(ch - 1, i)] = v.expect("defined after the first n samples");
            }
        }
        loaded.series = MultichannelSeries::new(data, loaded.series.sampling_rate())?;
        eprintln!("log-return: {n}-period returns, {} samples remain", t - n);
    }
    Ok(loaded)
}

pub fn run_decompose(args: &DecomposeArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let loaded = load_input(&args.input, args.rate, args.log_return)?;
    let filter = QuadratureMirrorPair::from_name(&args.wavelet)?;
    let sub = SubprocessSet::decompose(&loaded.series, &filter, args.levels)?;
    let out_path = args.out.join("components.csv");
    write_components_csv(&out_path, &sub, &loaded.channel_names)?;
    let fmax = loaded.series.sampling_rate() / 2.0;
    let bands: Vec<_> = (1..=args.levels)
        .map(|j| {
            let (lo, hi) = scale_to_band(fmax, j);
            json!({"scale": j, "low_hz": lo, "high_hz": hi})
        })
        .collect();
    RunManifest::new(
        "decompose",
        None,
        json!({
            "wavelet": args.wavelet,
            "levels": args.levels,
            "sampling_rate": loaded.series.sampling_rate(),
            "log_return": args.log_return,
            "scale_bands": bands,
        }),
    )
    .with_input(&args.input)
    .with_output(&out_path)
    .write(&args.out.join("manifest.json"))?;
    eprintln!("decompose: wrote {}", out_path.display());
    Ok(())
}

pub fn run_spectrum(args: &SpectrumArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let loaded = load_input(&args.input, args.rate, args.log_return)?;
    let filter = QuadratureMirrorPair::from_name(&args.wavelet)?;
    let coeffs = empirical_coefficients(&loaded.series, &filter, args.levels)?;
    let raw = raw_cross_periodogram(&coeffs, args.lag)?;
    let smoothed = smooth_periodogram(&raw, args.smoothing)?;
    let wavelets = DiscreteWaveletSet::new(&filter, args.levels)?;
    let operator = InnerProductOperator::new(&AutocorrTable::new(&wavelets), args.lag);
    let corrector = SpectrumCorrector::new(&operator)?;
    let est = bias_correct(&smoothed, &corrector)?;

    let rate = loaded.series.sampling_rate();
    let mut rows = Vec::new();
    for j in 1..=args.levels {
        for jp in 1..=args.levels {
            for p in 1..=loaded.series.channels() {
                for q in 1..=loaded.series.channels() {
                    for (i, _) in est.u_grid().iter().enumerate() {
                        rows.push(ResultRow {
                            time: i as f64 / rate,
                            j,
                            p,
                            jprime: jp,
                            q,
                            kind: "spectrum".into(),
                            value: Some(est.get(j, jp, p, q, i)),
                            significant: None,
                        });
                    }
                }
            }
        }
    }
    let out_path = args.out.join("spectrum.csv");
    ResultTable { rows }.write(&out_path)?;
    RunManifest::new(
        "spectrum",
        None,
        json!({
            "wavelet": args.wavelet,
            "levels": args.levels,
            "smoothing": args.smoothing,
            "lag": args.lag,
            "operator_condition_number": operator.condition_number(),
            "sampling_rate": rate,
        }),
    )
    .with_input(&args.input)
    .with_output(&out_path)
    .write(&args.out.join("manifest.json"))?;
    eprintln!("spectrum: wrote {}", out_path.display());
    Ok(())
}

fn resolve_lag(
    lag: Option<i64>,
    lag_seconds: Option<f64>,
    rate: f64,
) -> Result<isize> {
    match (lag, lag_seconds) {
        (Some(_), Some(_)) => bail!("give either --lag or --lag-seconds, not both"),
        (Some(l), None) => Ok(l as isize),
        (None, Some(s)) => {
            let samples = (s * rate).round() as isize;
            eprintln!("lag: {s} s at {rate} Hz -> {samples} samples");
            Ok(samples)
        }
        (None, None) => Ok(0),
    }
}

pub fn run_coherence(args: &CoherenceArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let file_cfg = match &args.config {
        Some(path) => AnalysisConfig::load(path)?,
        None => AnalysisConfig::default(),
    };
    let wavelet = args
        .wavelet
        .clone()
        .or(file_cfg.wavelet.clone())
        .unwrap_or_else(|| "db2".into());
    let levels = args.levels.or(file_cfg.levels).unwrap_or(4);
    let window = args.window.or(file_cfg.window).unwrap_or(50);
    let step = args.step.or(file_cfg.step).unwrap_or(10);
    let rate_override = args.rate.or(file_cfg.sampling_rate);
    let quantiles = args
        .quantiles
        .clone()
        .or(file_cfg.quantiles.clone())
        .unwrap_or_else(|| vec![0.95, 0.99]);
    let nsim = args.nsim.or(file_cfg.nsim).unwrap_or(0);
    let seed = args.seed.or(file_cfg.seed).unwrap_or(0);
    let level = args.level.unwrap_or(0.99);

    let loaded = load_input(&args.input, rate_override, args.log_return)?;
    let rate = loaded.series.sampling_rate();
    let lag = resolve_lag(
        args.lag.or(file_cfg.lag),
        args.lag_seconds.or(file_cfg.lag_seconds),
        rate,
    )?;

    let pair_strings = args
        .pairs
        .clone()
        .or(file_cfg.pairs.clone())
        .context("no --pairs given (form j:p-j':q[,...])")?;
    let pairs = pair_strings
        .iter()
        .map(|s| parse_pair(s))
        .collect::<Result<Vec<_>>>()?;
    let controls = match args.controls.clone().or(file_cfg.controls.clone()) {
        Some(list) => list
            .iter()
            .map(|s| parse_control(s))
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };

    let filter = QuadratureMirrorPair::from_name(&wavelet)?;
    let sub = SubprocessSet::decompose(&loaded.series, &filter, levels)?;
    let (surface, kind_label) = if controls.is_empty() {
        (
            windowed_coherence(&sub, &pairs, window, step, lag)?,
            "windowed",
        )
    } else {
        (
            partial_windowed_coherence(&sub, &pairs, &controls, window, step, lag)?,
            "partial",
        )
    };

    // Optional Monte-Carlo null calibration at the same geometry.
    let null: Option<NullDistribution> = if nsim > 0 {
        let cfg = NullConfig {
            levels,
            len: loaded.series.len(),
            channels: loaded.series.channels(),
            window,
            step,
            lag,
            n_sim: nsim,
            seed,
        };
        Some(null_distribution(&cfg, &filter)?)
    } else {
        None
    };
    let mask = match &null {
        Some(dist) => Some(significance_mask(&surface, dist, level)?),
        None => None,
    };

    let mut rows = Vec::new();
    for (pi, pair) in pairs.iter().enumerate() {
        let values = surface.values(pair)?;
        for (i, (time, v)) in surface.times().iter().zip(values).enumerate() {
            let significant = mask.as_ref().map(|m| m.masks[pi][i]);
            rows.push(ResultRow {
                time: time / rate,
                j: pair.j,
                p: pair.p,
                jprime: pair.j_prime,
                q: pair.q,
                kind: format!("{kind_label}_signed"),
                value: *v,
                significant,
            });
            rows.push(ResultRow {
                time: time / rate,
                j: pair.j,
                p: pair.p,
                jprime: pair.j_prime,
                q: pair.q,
                kind: format!("{kind_label}_squared"),
                value: v.map(|x| x * x),
                significant,
            });
        }
    }
    let out_path = args.out.join("coherence.csv");
    ResultTable { rows }.write(&out_path)?;

    let thresholds: Vec<_> = match &null {
        Some(dist) => quantiles
            .iter()
            .map(|q| {
                Ok(json!({
                    "level": q,
                    "signed": dist.threshold(*q)?,
                    "squared": dist.threshold_squared(*q)?,
                }))
            })
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };
    let diag = surface.diagnostics();
    let fmax = file_cfg.fmax.unwrap_or(rate / 2.0);
    let bands: Vec<_> = (1..=levels)
        .map(|j| {
            let (lo, hi) = scale_to_band(fmax, j);
            json!({"scale": j, "low_hz": lo, "high_hz": hi})
        })
        .collect();
    RunManifest::new(
        "coherence",
        Some(seed),
        json!({
            "wavelet": wavelet,
            "levels": levels,
            "window": window,
            "step": step,
            "lag_samples": lag,
            "scale_bands": bands,
            "pairs": pair_strings,
            "controls": args.controls.clone().or(file_cfg.controls).unwrap_or_default(),
            "nsim": nsim,
            "significance_level": if nsim > 0 { Some(level) } else { None },
            "quantile_thresholds": thresholds,
            "sampling_rate": rate,
            "undefined_points": {
                "floored_denominators": diag.floored_denominators,
                "negative_diagonals": diag.negative_diagonals,
                "degenerate_windows": diag.degenerate_windows,
            },
        }),
    )
    .with_input(&args.input)
    .with_output(&out_path)
    .write(&args.out.join("manifest.json"))?;
    eprintln!("coherence: wrote {}", out_path.display());
    Ok(())
}

pub fn run_null_threshold(args: &NullThresholdArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let filter = QuadratureMirrorPair::from_name(&args.wavelet)?;
    let cfg = NullConfig {
        levels: args.levels,
        len: args.len,
        channels: args.channels,
        window: args.window,
        step: args.step,
        lag: args.lag as isize,
        n_sim: args.nsim,
        seed: args.seed,
    };
    let dist = null_distribution(&cfg, &filter)?;
    let out_path = args.out.join("thresholds.csv");
    let mut writer = csv::Writer::from_path(&out_path)?;
    writer.write_record(["level", "signed", "squared"])?;
    for q in &args.quantiles {
        writer.write_record(&[
            crate::csv_io::format_float(*q),
            crate::csv_io::format_float(dist.threshold(*q)?),
            crate::csv_io::format_float(dist.threshold_squared(*q)?),
        ])?;
    }
    writer.flush()?;
    RunManifest::new(
        "null-threshold",
        Some(args.seed),
        json!({
            "levels": args.levels,
            "len": args.len,
            "channels": args.channels,
            "window": args.window,
            "step": args.step,
            "lag": args.lag,
            "nsim": args.nsim,
            "wavelet": args.wavelet,
            "quantiles": args.quantiles,
            "pooled_samples": dist.samples().len(),
        }),
    )
    .with_output(&out_path)
    .write(&args.out.join("manifest.json"))?;
    eprintln!("null-threshold: wrote {}", out_path.display());
    Ok(())
}

/// Rebuild a coherence surface for one pair from a result table.
fn surface_from_table(path: &Path, pair: &ScalePair, kind: &str) -> Result<CoherenceSurface> {
    let table = ResultTable::read(path)?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for row in &table.rows {
        let row_pair = ScalePair::new(row.j, row.p, row.jprime, row.q);
        if row.kind == kind && (row_pair == *pair || row_pair == pair.swapped()) {
            times.push(row.time);
            values.push(row.value);
        }
    }
    if times.is_empty() {
        bail!(
            "{}: no rows of kind '{kind}' for pair {pair}",
            path.display()
        );
    }
    Ok(CoherenceSurface::new(
        mvlsw::CoherenceKind::Windowed,
        vec![*pair],
        vec![values],
        times,
        0,
        0,
        0,
        mvlsw::CoherenceDiagnostics::default(),
    ))
}

pub fn run_permtest(args: &PermtestArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let pair = parse_pair(&args.pair)?;
    let load_group = |paths: &[PathBuf]| -> Result<Vec<CoherenceSurface>> {
        paths
            .iter()
            .map(|p| surface_from_table(p, &pair, &args.kind))
            .collect()
    };
    let group_a = load_group(&args.group_a)?;
    let group_b = load_group(&args.group_b)?;
    let refs_a: Vec<&CoherenceSurface> = group_a.iter().collect();
    let refs_b: Vec<&CoherenceSurface> = group_b.iter().collect();
    let result = mvlsw::infer::permutation_test(&refs_a, &refs_b, &pair, args.nperm, args.seed)?;

    let out_path = args.out.join("permutation.csv");
    let mut writer = csv::Writer::from_path(&out_path)?;
    writer.write_record(["draw", "t_permuted"])?;
    for (i, t) in result.t_permuted.iter().enumerate() {
        writer.write_record(&[i.to_string(), crate::csv_io::format_float(*t)])?;
    }
    writer.flush()?;
    let summary_path = args.out.join("result.json");
    std::fs::write(
        &summary_path,
        serde_json::to_string_pretty(&json!({
            "pair": args.pair,
            "kind": args.kind,
            "t_observed": result.t_observed,
            "p_value": result.p_value,
            "n_perm": result.n_perm,
            "seed": result.seed,
            "excluded_points": result.excluded_points,
            "group_sizes": [group_a.len(), group_b.len()],
        }))? + "\n",
    )?;
    RunManifest::new(
        "permtest",
        Some(args.seed),
        json!({
            "pair": args.pair,
            "kind": args.kind,
            "nperm": args.nperm,
        }),
    )
    .with_output(&out_path)
    .with_output(&summary_path)
    .write(&args.out.join("manifest.json"))?;
    eprintln!(
        "permtest: T = {:.6}, p = {:.6} ({} permutations)",
        result.t_observed, result.p_value, result.n_perm
    );
    Ok(())
}
