//! `lindblad3q` command-line front end.
//!
//! Exit status: 0 success, 1 parse or validation failure, 2 unstable model or
//! no steady state, 3 series or quadrature non-convergence, 4 oracle mismatch.

// `!(x > 0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod check;
mod commands;
mod io;
mod plot;

use args::{Cli, Command};
use clap::Parser;
use io::{Failure, Outcome};
use std::process::ExitCode;

const THREADS_ENV: &str = "LINDBLAD3Q_THREADS";

fn configure_threads() -> Outcome {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| Failure::usage(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::usage(e.to_string()))
}

fn run(cli: &Cli) -> Outcome {
    configure_threads()?;
    let opts = &cli.opts;
    match cli.command {
        Command::Spectrum => commands::spectrum(opts),
        Command::SteadyState => commands::steady_state(opts),
        Command::CovarianceEvolve => commands::covariance_evolve(opts),
        Command::WignerEvolve => commands::wigner_evolve(opts),
        Command::KerrWigner => commands::kerr_wigner(opts),
        Command::KerrAverage => commands::kerr_average(opts),
        Command::KerrPropagate => commands::kerr_propagate(opts),
        Command::OracleCheck { check } => check::oracle_check(opts, check),
        Command::Examples => commands::examples(opts),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code as u8)
        }
    }
}
