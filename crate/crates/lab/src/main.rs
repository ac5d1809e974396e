use std::process::ExitCode;

use clap::Parser;
use silt_lab::cli::{self, Cli};
use silt_lab::LabError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // help and version requests print and exit 0
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => return fail(&LabError::config(e.to_string())),
    };
    let env = cli::env_threads();
    match cli::resolve(&cli, env.as_deref()).and_then(|config| silt_lab::run(&config)) {
        Ok(outcome) => {
            print!("{}", outcome.report.stdout);
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &LabError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code())
}
