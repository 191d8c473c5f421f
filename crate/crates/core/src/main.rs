use std::process::ExitCode;

use dissipchain::cli::{parse_args, run, CliError};

fn main() -> ExitCode {
    match parse_args(std::env::args_os()).and_then(|config| run(&config)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Help(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("dissipchain: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
