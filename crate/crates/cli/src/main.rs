use std::process::ExitCode;

use clap::Parser;
use lrscov::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match lrscov::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
