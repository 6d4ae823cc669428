use std::process::ExitCode;

use clap::Parser;
use dimer_cli::cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dimer_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dimer: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
