mod commands;
mod config;
mod error;

use std::process::ExitCode;

use clap::Parser;

use crate::config::Cli;
use crate::error::{CliError, CliResult};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // help and version go to stdout and are not failures
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let (action, config_path, flags) = config::flag_settings(cli);
    let cfg = config::load(config_path.as_deref(), flags)?;
    match cfg.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(|| commands::run(action, &cfg)),
        None => commands::run(action, &cfg),
    }
}
