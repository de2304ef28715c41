use std::process::ExitCode;

use clap::Parser;
use polar_ocbm::cli::{exit_code, run, Cli};

fn main() -> ExitCode {
    let cmdline = std::env::args().collect::<Vec<_>>().join(" ");
    let cli = Cli::parse();
    match run(&cli, &cmdline) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
