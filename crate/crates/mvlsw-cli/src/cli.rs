//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "mvlsw",
    version,
    about = "Cross-scale wavelet coherence for multivariate non-stationary time series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a process specification into a series CSV.
    Simulate(SimulateArgs),
    /// Split every channel into scale subprocesses plus a smooth remainder.
    Decompose(DecomposeArgs),
    /// Bias-corrected cross-scale spectral estimates.
    Spectrum(SpectrumArgs),
    /// Moving-window (partial) coherence between subprocesses, with
    /// optional Monte-Carlo significance thresholds.
    Coherence(CoherenceArgs),
    /// Null-coherence quantiles under cross-scale independence.
    NullThreshold(NullThresholdArgs),
    /// Two-group permutation test on coherence curves.
    Permtest(PermtestArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulation config (MvLSW spec or AR(2) mixture design).
    #[arg(long)]
    pub config: PathBuf,
    /// Series length; required for MvLSW specs, ignored for mixtures.
    #[arg(long)]
    pub len: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Input CSV with header `time,ch1..chP`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "db2")]
    pub wavelet: String,
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    /// Sampling-rate override in Hz (otherwise inferred from the file).
    #[arg(long)]
    pub rate: Option<f64>,
    /// Replace channels by n-period log returns (in percent) first.
    #[arg(long, value_name = "N")]
    pub log_return: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "db2")]
    pub wavelet: String,
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    /// Rectangular smoother half-width M (window 2M+1).
    #[arg(short = 'M', long, default_value_t = 16)]
    pub smoothing: usize,
    /// Coefficient lag between the two transform indices.
    #[arg(long, default_value_t = 0)]
    pub lag: isize,
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long, value_name = "N")]
    pub log_return: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CoherenceArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Analysis config JSON; flags override file values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub wavelet: Option<String>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub step: Option<usize>,
    /// Lag in samples applied to the second pair member.
    #[arg(long, allow_hyphen_values = true)]
    pub lag: Option<i64>,
    /// Lag in seconds (converted via the sampling rate).
    #[arg(long, allow_hyphen_values = true, conflicts_with = "lag")]
    pub lag_seconds: Option<f64>,
    /// Pairs `j:p-j':q`, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub pairs: Option<Vec<String>>,
    /// Control subprocesses `j:p` for partial coherence, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub controls: Option<Vec<String>>,
    /// Number of null simulations; 0 skips significance thresholds.
    #[arg(long)]
    pub nsim: Option<usize>,
    /// Quantile levels recorded in the manifest.
    #[arg(long, value_delimiter = ',')]
    pub quantiles: Option<Vec<f64>>,
    /// Significance level for the output mask column.
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long, value_name = "N")]
    pub log_return: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct NullThresholdArgs {
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    /// Simulated series length.
    #[arg(long, default_value_t = 1000)]
    pub len: usize,
    #[arg(long, default_value_t = 1)]
    pub channels: usize,
    #[arg(long, default_value_t = 50)]
    pub window: usize,
    #[arg(long, default_value_t = 10)]
    pub step: usize,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub lag: i64,
    #[arg(long, default_value_t = 2000)]
    pub nsim: usize,
    #[arg(long, default_value = "db2")]
    pub wavelet: String,
    #[arg(long, value_delimiter = ',', default_values_t = [0.95, 0.99, 0.999])]
    pub quantiles: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PermtestArgs {
    /// Coherence tables of the first group, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub group_a: Vec<PathBuf>,
    /// Coherence tables of the second group, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub group_b: Vec<PathBuf>,
    /// The pair `j:p-j':q` whose curves are compared.
    #[arg(long = "pairs")]
    pub pair: String,
    /// Which result rows to test.
    #[arg(long, default_value = "windowed_squared")]
    pub kind: String,
    #[arg(long, default_value_t = 10000)]
    pub nperm: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}
