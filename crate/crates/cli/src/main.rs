use clap::Parser;
use spo_cli::{execute, Cli, ExperimentConfig};
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = ExperimentConfig::from_cli(&cli).and_then(|config| execute(&config));
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("spo: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
