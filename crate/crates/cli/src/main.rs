use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use edge_surgery_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(outcome.stdout.as_bytes()).is_err() {
                return ExitCode::from(2);
            }
            for line in &outcome.diagnostics {
                eprintln!("{line}");
            }
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
