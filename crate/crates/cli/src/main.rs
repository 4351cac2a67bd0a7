//! `cole-lab`: evaluates the radial Cole families, sweeps their norms, checks
//! residuals, runs the finite-difference oracle and the acceptance suite.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Options;

#[derive(Debug, Parser)]
#[command(name = "cole-lab", version, about = "Radial Cole equation solutions, norms and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    opts: Options,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Surface data (t, r, u) on a 200 x 200 grid for figure 1, 2 or 3.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        which: u8,
    },
    /// A norm of a family over a grid of times, one column group per exponent.
    Norms,
    /// Log-log slope of a norm sweep.
    Decay,
    /// PDE residuals on the family's canonical grid.
    Residual,
    /// Finite-difference solve from exact data at t0, compared with the family at t1.
    Solve,
    /// The full acceptance suite.
    VerifyAll,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Verify(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Verify(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Verify(m) => write!(f, "verification failed: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<cole_core::Error> for CliError {
    fn from(e: cole_core::Error) -> Self {
        use cole_core::Error as E;
        match e {
            E::Config(_) | E::Domain(_) | E::Unsupported(_) | E::Singular(_) => CliError::Config(e.to_string()),
            E::NonConvergence { .. } | E::Divergent(_) | E::Bracket(_) | E::Unstable(_) | E::DegenerateFit(_) => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli.opts.resolve().and_then(|opts| match cli.command {
        Command::Figure { which } => commands::figure(which, &opts),
        Command::Norms => commands::norms(&opts),
        Command::Decay => commands::decay(&opts),
        Command::Residual => commands::residual(&opts),
        Command::Solve => commands::solve(&opts),
        Command::VerifyAll => commands::verify_all(&opts),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cole-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
