//! `hermq`: online CDF and quantile estimates for numeric streams, plus the
//! simulation and verification harness.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

mod args;
mod harness;
mod run;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand};

use args::{RunArgs, SimulateArgs, VerifyArgs};

#[derive(Debug, Parser)]
#[command(
    name = "hermq",
    version,
    about = "Streaming Gauss-Hermite CDF and quantile estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate quantiles of a newline-delimited stream (file or stdin).
    Run(RunArgs),
    /// Monte Carlo RMSE experiment on a synthetic stream model.
    Simulate(SimulateArgs),
    /// Monte Carlo check of a theoretical error bound; prints a JSON report.
    Verify(VerifyArgs),
}

/// Why a command failed, which decides the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or an invalid combination of them.
    Usage(String),
    /// Unreadable input, unwritable output, or a computation that failed.
    Data(String),
}

impl Failure {
    pub fn data(e: impl std::fmt::Display) -> Self {
        Failure::Data(e.to_string())
    }
}

/// Library errors caused by the arguments count as usage errors.
impl From<hermite_quantile::Error> for Failure {
    fn from(e: hermite_quantile::Error) -> Self {
        match e {
            hermite_quantile::Error::Config(_) | hermite_quantile::Error::Domain(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, outcome) = match cli.command {
        Command::Run(a) => ("run", run::run(&a)),
        Command::Simulate(a) => ("simulate", harness::simulate(&a)),
        Command::Verify(a) => ("verify", harness::verify(&a)),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            // render with the subcommand's usage line
            let mut root = Cli::command().bin_name("hermq");
            root.build();
            let cmd = root
                .find_subcommand_mut(name)
                .expect("dispatched subcommand exists");
            let _ = cmd.error(ErrorKind::ValueValidation, msg).print();
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("hermq: {msg}");
            ExitCode::from(2)
        }
    }
}
