//! `chargestate` command-line tool: builds fixed-charge states and writes
//! their statistics as CSV or JSON.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 numeric failure.

mod commands;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use chargestate::{Diagnostic, Nonlinearity};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

#[derive(Parser)]
#[command(name = "chargestate", version, about, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a state and write its JSON document.
    Build {
        #[command(flatten)]
        state: StateArgs,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate one diagnostic over a range of real xi.
    Sweep(SweepArgs),
    /// Photon-number distribution of a state.
    Pnd {
        #[command(flatten)]
        state: StateArgs,
    },
    /// Husimi Q over the alpha1 plane at fixed alpha2.
    Husimi(HusimiArgs),
    /// Eigen-residual and cutoff-convergence report.
    Verify {
        #[command(flatten)]
        state: StateArgs,
        /// Second cutoff for the convergence comparison (default 2 * nmax).
        #[arg(long)]
        nmax2: Option<u64>,
    },
    /// Write the preset sweeps, distributions and Husimi grids, each with a verify report.
    Reproduce {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 80)]
        nmax: u64,
    },
}

#[derive(Args, Clone)]
struct StateArgs {
    /// Deformation: unity | ps:<p> | sqrt | qdef:<q>.
    #[arg(long = "f", value_name = "SPEC")]
    f: Nonlinearity,
    /// Charge n_a - n_b.
    #[arg(long, allow_negative_numbers = true)]
    q: i64,
    /// Eigenvalue as `re` or `re,im`.
    #[arg(long, value_parser = format::parse_complex, allow_hyphen_values = true)]
    xi: Complex64,
    /// Inclusive ladder cutoff.
    #[arg(long)]
    nmax: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    diagnostic: Diagnostic,
    #[arg(long = "f", value_name = "SPEC")]
    f: Nonlinearity,
    #[arg(long, allow_negative_numbers = true)]
    q: i64,
    #[arg(long, allow_negative_numbers = true)]
    xi_start: f64,
    #[arg(long, allow_negative_numbers = true)]
    xi_end: f64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    steps: u64,
    #[arg(long)]
    nmax: u64,
}

#[derive(Args)]
struct HusimiArgs {
    #[command(flatten)]
    state: StateArgs,
    #[arg(long, value_parser = format::parse_complex, allow_hyphen_values = true)]
    alpha2: Complex64,
    #[arg(long, allow_negative_numbers = true)]
    xmin: f64,
    #[arg(long, allow_negative_numbers = true)]
    xmax: f64,
    #[arg(long, allow_negative_numbers = true)]
    ymin: f64,
    #[arg(long, allow_negative_numbers = true)]
    ymax: f64,
    /// Nodes per axis, at least 2.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    grid: u64,
}

fn configure_threads() -> Result<(), commands::Failure> {
    let Ok(raw) = std::env::var("CHARGESTATE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        commands::Failure::Usage(format!("CHARGESTATE_THREADS: invalid count `{raw}`"))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| commands::Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = configure_threads().and_then(|()| commands::run(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
