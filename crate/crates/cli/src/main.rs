use std::process::ExitCode;

use clap::Parser;
use heston_escape_cli::{run, Cli, THREADS_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        match raw.parse::<usize>() {
            Ok(n) if n > 0 => {
                // Only fails if a pool already exists, which cannot happen here.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error kind=domain message=\"{THREADS_ENV} must be a positive integer, got {raw:?}\"");
                return ExitCode::from(2);
            }
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error kind={} message={:?}", e.kind(), e.to_string());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
