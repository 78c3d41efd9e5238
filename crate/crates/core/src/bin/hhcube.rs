use std::process::ExitCode;

use clap::Parser;
use hypercube_hh::cli::{run, Cli, RunConfig, EXIT_ERROR};

fn main() -> ExitCode {
    let config = RunConfig::from(Cli::parse());
    let outcome = run(&config);
    let written = match &config.out {
        Some(path) => std::fs::write(path, &outcome.report),
        None => {
            print!("{}", outcome.report);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("hhcube: cannot write report: {e}");
        return ExitCode::from(EXIT_ERROR as u8);
    }
    if let Some(err) = &outcome.error {
        eprintln!("hhcube: {}", err.message);
    }
    ExitCode::from(outcome.exit_status as u8)
}
