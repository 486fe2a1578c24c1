//! Command-line driver: configuration checks, the swap tune-up scan, the
//! amplitude-sweep characterisation, offline fits, and raw trajectory and
//! shot exports.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod manifest;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use manifest::{sha256_hex, RunManifest, MANIFEST_FILE};

/// Exit status for domain violations: invalid parameters, failed fits.
pub const EXIT_DOMAIN: i32 = 1;
/// Exit status for I/O, parse, schema and usage errors.
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "simba", version, about = "Switched parametric-amplifier readout simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Master seed for every random stream.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for CSV, JSON and the run manifest.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a configuration and list every violation.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Readout fidelity versus TIB1 transmit duration.
    SwapScan {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4.0)]
        from_ns: f64,
        #[arg(long, default_value_t = 76.0)]
        to_ns: f64,
        #[arg(long, default_value_t = 4.0)]
        step_ns: f64,
        /// Shots per preparation at each duration.
        #[arg(long, default_value_t = 2000)]
        shots: usize,
        /// Readout strength in effective photons.
        #[arg(long, default_value_t = 1.0)]
        photons: f64,
    },
    /// Amplitude sweep, fits, efficiency and backaction.
    Characterize {
        #[command(flatten)]
        common: Common,
        /// Largest drive amplitude; defaults to the projective point (n_r = 2.4).
        #[arg(long)]
        eps_max: Option<f64>,
        #[arg(long, default_value_t = 15)]
        points: usize,
        /// Shots per preparation, and per Ramsey delay, at each amplitude.
        #[arg(long, default_value_t = 10_000)]
        shots: usize,
        #[arg(long, default_value_t = 500)]
        resamples: usize,
    },
    /// Fit an exported or external sweep dataset without simulating.
    Fit {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 500)]
        resamples: usize,
    },
    /// Mean field of both qubit branches over the sequence.
    Trajectory {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2.4)]
        photons: f64,
    },
    /// Single-shot records and histograms for both preparations.
    Shots {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        shots: usize,
        #[arg(long, default_value_t = 2.4)]
        photons: f64,
    },
}

/// Parse `args` (including the program name), run, and return the exit status.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_IO } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match commands::dispatch(cli.command, out) {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            failure.code
        }
    }
}
