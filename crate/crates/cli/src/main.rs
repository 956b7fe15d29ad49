use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use gspam_cli::args::Cli;

fn main() -> ExitCode {
    match gspam_cli::run(Cli::parse()) {
        Ok(text) => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
