//! CSV ingestion and the long-format result table.

use std::path::Path;

use mvlsw::ndarray::Array2;
use mvlsw::{MultichannelSeries, SubprocessSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Format { path: String, source: csv::Error },
    #[error("{path}, line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Structure { path: String, message: String },
}

/// A parsed input file: the series plus its channel names.
#[derive(Debug, Clone)]
pub struct LoadedSeries {
    pub series: MultichannelSeries,
    pub channel_names: Vec<String>,
}

/// Read `time,ch1..chP` CSV data. The sampling rate is inferred from the
/// time column (which must be uniform) unless an override is given.
pub fn load_csv(path: &Path, rate_override: Option<f64>) -> Result<LoadedSeries, CsvError> {
    let path_str = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => CsvError::Io {
                path: path_str.clone(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => CsvError::Format {
                path: path_str.clone(),
                source: e,
            },
        })?;
    let headers = reader
        .headers()
        .map_err(|e| CsvError::Format {
            path: path_str.clone(),
            source: e,
        })?
        .clone();
    if headers.is_empty() || !headers[0].trim().eq_ignore_ascii_case("time") {
        return Err(CsvError::Structure {
            path: path_str,
            message: "header must start with a 'time' column".into(),
        });
    }
    let channel_names: Vec<String> = headers.iter().skip(1).map(|h| h.trim().to_string()).collect();
    let p = channel_names.len();
    if p == 0 {
        return Err(CsvError::Structure {
            path: path_str,
            message: "no data channels after the time column".into(),
        });
    }

    let mut times: Vec<f64> = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); p];
    for (i, record) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let record = record.map_err(|e| CsvError::Parse {
            path: path_str.clone(),
            line,
            message: e.to_string(),
        })?;
        if record.len() != p + 1 {
            return Err(CsvError::Parse {
                path: path_str,
                line,
                message: format!("expected {} cells, found {}", p + 1, record.len()),
            });
        }
        let parse = |field: &str, what: &str| -> Result<f64, CsvError> {
            field.trim().parse::<f64>().map_err(|_| CsvError::Parse {
                path: path_str.clone(),
                line,
                message: format!("{what} '{field}' is not numeric"),
            })
        };
        times.push(parse(&record[0], "time value")?);
        for (c, col) in columns.iter_mut().enumerate() {
            col.push(parse(&record[c + 1], "cell")?);
        }
    }
    let t = times.len();
    if t < 2 {
        return Err(CsvError::Structure {
            path: path_str,
            message: "need at least two rows".into(),
        });
    }
    let step = times[1] - times[0];
    if step <= 0.0 || step.is_nan() {
        return Err(CsvError::Parse {
            path: path_str,
            line: 3,
            message: "time column must be strictly increasing".into(),
        });
    }
    for i in 1..t {
        let d = times[i] - times[i - 1];
        if ((d - step) / step).abs() > 1e-6 {
            return Err(CsvError::Parse {
                path: path_str,
                line: i + 2,
                message: format!("non-uniform time step: {d} vs {step}"),
            });
        }
    }
    let rate = rate_override.unwrap_or(1.0 / step);
    let mut data = Array2::zeros((p, t));
    for (c, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            data[(c, i)] = *v;
        }
    }
    let series = MultichannelSeries::new(data, rate).map_err(|e| CsvError::Structure {
        path: path_str,
        message: e.to_string(),
    })?;
    Ok(LoadedSeries {
        series,
        channel_names,
    })
}

/// Write a series as `time,ch1..chP`; floats use the shortest exact
/// decimal representation, so a read-back is bit-faithful.
pub fn write_series_csv(
    path: &Path,
    series: &MultichannelSeries,
    channel_names: &[String],
) -> Result<(), CsvError> {
    let path_str = path.display().to_string();
    let mut writer = csv::Writer::from_path(path).map_err(|e| CsvError::Format {
        path: path_str.clone(),
        source: e,
    })?;
    let mut header = vec!["time".to_string()];
    header.extend_from_slice(channel_names);
    let write_err = |e: csv::Error| CsvError::Format {
        path: path_str.clone(),
        source: e,
    };
    writer.write_record(&header).map_err(write_err)?;
    let rate = series.sampling_rate();
    for i in 0..series.len() {
        let mut row = vec![format_float(i as f64 / rate)];
        for ch in 1..=series.channels() {
            row.push(format_float(series.data()[(ch - 1, i)]));
        }
        writer.write_record(&row).map_err(write_err)?;
    }
    writer.flush().map_err(|e| CsvError::Io {
        path: path_str,
        source: e,
    })?;
    Ok(())
}

/// Write multiresolution components wide: one row per (time, channel)
/// with columns `d1..dJ` and `smooth` that sum back to the input value.
pub fn write_components_csv(
    path: &Path,
    sub: &SubprocessSet,
    channel_names: &[String],
) -> Result<(), CsvError> {
    let path_str = path.display().to_string();
    let mut writer = csv::Writer::from_path(path).map_err(|e| CsvError::Format {
        path: path_str.clone(),
        source: e,
    })?;
    let write_err = |e: csv::Error| CsvError::Format {
        path: path_str.clone(),
        source: e,
    };
    let mut header = vec!["time".to_string(), "channel".to_string()];
    for j in 1..=sub.levels() {
        header.push(format!("d{j}"));
    }
    header.push("smooth".to_string());
    writer.write_record(&header).map_err(write_err)?;
    let rate = sub.sampling_rate();
    for ch in 1..=sub.channels() {
        for i in 0..sub.len() {
            let mut row = vec![
                format_float(i as f64 / rate),
                channel_names[ch - 1].clone(),
            ];
            for j in 1..=sub.levels() {
                row.push(format_float(sub.detail()[(j - 1, ch - 1, i)]));
            }
            let smooth = sub.smooth().map(|s| s[(ch - 1, i)]).unwrap_or(0.0);
            row.push(format_float(smooth));
            writer.write_record(&row).map_err(write_err)?;
        }
    }
    writer.flush().map_err(|e| CsvError::Io {
        path: path_str,
        source: e,
    })?;
    Ok(())
}

/// One long-format result row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    /// Time in seconds (window center or coefficient time).
    pub time: f64,
    pub j: usize,
    pub p: usize,
    pub jprime: usize,
    pub q: usize,
    /// What the value measures, e.g. `windowed_signed`, `spectrum`.
    pub kind: String,
    /// Empty for undefined points.
    pub value: Option<f64>,
    /// Present only when a significance threshold was applied.
    pub significant: Option<bool>,
}

/// Long-format results: one row per grid point and pair per kind.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn write(&self, path: &Path) -> Result<(), CsvError> {
        let path_str = path.display().to_string();
        let mut writer = csv::Writer::from_path(path).map_err(|e| CsvError::Format {
            path: path_str.clone(),
            source: e,
        })?;
        for row in &self.rows {
            writer.serialize(row).map_err(|e| CsvError::Format {
                path: path_str.clone(),
                source: e,
            })?;
        }
        writer.flush().map_err(|e| CsvError::Io {
            path: path_str,
            source: e,
        })?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, CsvError> {
        let path_str = path.display().to_string();
        let mut reader = csv::Reader::from_path(path).map_err(|e| CsvError::Format {
            path: path_str.clone(),
            source: e,
        })?;
        let mut rows = Vec::new();
        for (i, row) in reader.deserialize().enumerate() {
            let row: ResultRow = row.map_err(|e| CsvError::Parse {
                path: path_str.clone(),
                line: i + 2,
                message: e.to_string(),
            })?;
            rows.push(row);
        }
        Ok(Self { rows })
    }
}

/// Shortest decimal text that parses back to the identical double
/// (Rust's float Display is the shortest round-trip form).
pub fn format_float(v: f64) -> String {
    format!("{v}")
}
