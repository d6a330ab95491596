use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use trispec::cli::{self, Cli};
use trispec::io::Error;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            let message = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", Error::Config(message.to_string()).to_json());
            return ExitCode::from(2);
        }
    };
    match cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
