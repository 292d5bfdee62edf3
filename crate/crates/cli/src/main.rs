//! `solh`: Bohr–Fourier analysis of solenoidal functions from JSON specs.

mod commands;
mod config;
mod error;
mod input;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Session;
use crate::config::SessionConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "solh", version, about = "Bohr–Fourier analysis on the universal solenoid")]
struct Cli {
    #[command(flatten)]
    config: SessionConfig,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spectrum, Parseval gap and invariance residual of a function spec.
    Analyze { spec: PathBuf },
    /// Partial sum s_N of a spectrum, written as a function spec.
    Synth {
        spectrum: PathBuf,
        /// Number of leading terms; all when omitted.
        #[arg(short = 'n', long = "terms", allow_negative_numbers = true)]
        n: Option<i64>,
    },
    /// Property suite: invariance, mean comparison, Parseval, leaf consistency, uniqueness.
    Verify { spec: PathBuf },
    /// Sup-norm error table of partial sums.
    Approx {
        spec: PathBuf,
        /// Comma-separated N values; 0..=terms when omitted.
        #[arg(long = "n-list", value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        /// Require series input (a spec with a majorant).
        #[arg(long)]
        series: bool,
    },
}

fn run(cli: Cli) -> CliResult<Option<String>> {
    let session = Session::new(cli.config)?;
    let outcome = match &cli.command {
        Command::Analyze { spec } => commands::analyze(&session, spec)?,
        Command::Synth { spectrum, n } => commands::synth(&session, spectrum, *n)?,
        Command::Verify { spec } => commands::verify(&session, spec)?,
        Command::Approx { spec, n_list, series } => commands::approx(&session, spec, n_list.clone(), *series)?,
    };
    match &cli.out {
        Some(path) => std::fs::write(path, &outcome.body).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(outcome.body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })?;
        }
    }
    Ok(outcome.failure)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(failure)) => {
            let e = CliError::Property(failure);
            eprintln!("solh: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("solh: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
