use std::process::ExitCode;

use clap::Parser;
use evocover_cli::cli::{run_to_output, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_to_output(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("evocover: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
