use std::process::ExitCode;

use clap::Parser;
use ionwire::cli::Cli;
use ionwire::commands::run;
use ionwire::error::exit;

fn main() -> ExitCode {
    // Usage errors exit 1; clap's own default of 2 would read as a blocking budget.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::INPUT } else { exit::SUCCESS });
        }
    };
    let result = cli.into_manifest().and_then(|m| run(&m));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let code = e.exit_code();
            eprintln!("error: {:#}", anyhow::Error::from(e));
            ExitCode::from(code)
        }
    }
}
