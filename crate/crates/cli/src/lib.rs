//! Command-line front end: point evaluation, figure datasets, Monte-Carlo
//! cross-checks and span sweeps.

pub mod commands;
pub mod error;
pub mod figures;
pub mod settings;

use clap::{Parser, Subcommand};

pub use error::CliError;
pub use settings::{GlobalArgs, Settings};

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "HESTON_ESCAPE_THREADS";

#[derive(Parser, Debug)]
#[command(name = "heston-escape", version, about = "Escape statistics of the Heston model out of [-L/2, L/2]")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate one quantity at a point
    Eval(commands::EvalArgs),
    /// Emit the CSV dataset of a figure
    Figure(commands::FigureArgs),
    /// Compare a closed form with the Monte-Carlo oracle
    McCheck(commands::McCheckArgs),
    /// Fit the growth of the averaged escape time with the span
    #[command(name = "sweep-L")]
    SweepL(commands::SweepArgs),
}

/// Runs a parsed command. `Ok(false)` means a Monte-Carlo check failed.
pub fn run(cli: &Cli) -> Result<bool, CliError> {
    let settings = Settings::resolve(&cli.global)?;
    match &cli.command {
        Command::Eval(a) => commands::run_eval(a, &settings).map(|_| true),
        Command::Figure(a) => commands::run_figure(a, &settings).map(|_| true),
        Command::McCheck(a) => commands::run_mc_check(a, &settings),
        Command::SweepL(a) => commands::run_sweep(a, &settings).map(|_| true),
    }
}
