mod cli;
mod commands;
mod config;
mod csv_io;
mod manifest;
mod util;

use clap::Parser;

fn main() {
    let args = cli::Cli::parse();
    let result = match &args.command {
        cli::Command::Simulate(a) => commands::run_simulate(a),
        cli::Command::Decompose(a) => commands::run_decompose(a),
        cli::Command::Spectrum(a) => commands::run_spectrum(a),
        cli::Command::Coherence(a) => commands::run_coherence(a),
        cli::Command::NullThreshold(a) => commands::run_null_threshold(a),
        cli::Command::Permtest(a) => commands::run_permtest(a),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
