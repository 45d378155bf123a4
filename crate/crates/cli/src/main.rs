mod args;
mod commands;
mod output;

use args::{Cli, Command};
use clap::Parser;
use std::process::ExitCode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] predens::Error),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn run(cli: Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))?;
    }
    let g = &cli.global;
    let result = match &cli.command {
        Command::Risk(a) => commands::risk(g, a)?,
        Command::Dominance(a) => commands::dominance(g, a)?,
        Command::Threshold(a) => commands::threshold(g, a)?,
        Command::Distance(a) => commands::distance(g, a)?,
        Command::Bounds(a) => commands::bounds(g, a)?,
        Command::Verify(a) => commands::verify(g, a)?,
    };
    output::write(&result.table, result.csv, result.out.as_deref())?;
    Ok(result.pass)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
