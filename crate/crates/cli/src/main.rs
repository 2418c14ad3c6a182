use std::process::ExitCode;

use dualsample_cli::{run, CliError};

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    match run(&argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match e {
                CliError::Usage(ref m) => eprintln!("{m}"),
                CliError::Data(ref m) => eprintln!("error: {m}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
