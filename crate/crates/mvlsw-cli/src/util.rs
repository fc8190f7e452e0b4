//! Domain utilities: scale/frequency bands and logarithmic returns.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum UtilError {
    #[error("prices must be strictly positive (value {value} at index {index})")]
    NonPositivePrice { index: usize, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Frequency band `(fmax / 2^j, fmax / 2^(j-1))` in Hz covered by the
/// scale-`j` subprocess of a signal with maximum frequency `fmax`.
pub fn scale_to_band(fmax: f64, j: usize) -> (f64, f64) {
    let denom = 2f64.powi(j as i32);
    (fmax / denom, fmax / (denom / 2.0))
}

/// Logarithmic returns in percent over `n` periods:
/// `R_t = 100 ln(V_t / V_{t-n}) / n`; the first `n` outputs are
/// undefined markers.
pub fn log_return(prices: &[f64], n: usize) -> Result<Vec<Option<f64>>, UtilError> {
    if n == 0 {
        return Err(UtilError::InvalidParameter(
            "return period must be at least 1".into(),
        ));
    }
    for (index, &value) in prices.iter().enumerate() {
        if value <= 0.0 || value.is_nan() {
            return Err(UtilError::NonPositivePrice { index, value });
        }
    }
    Ok(prices
        .iter()
        .enumerate()
        .map(|(t, v)| {
            if t < n {
                None
            } else {
                Some(100.0 * (v / prices[t - n]).ln() / n as f64)
            }
        })
        .collect())
}
