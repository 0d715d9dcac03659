mod args;
mod run;

use std::fs;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;
use run::{run, CliError, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    print!("{}", outcome.summary);
    if let Err(source) = fs::write(&outcome.artifact_path, format!("{}\n", outcome.artifact)) {
        let e = CliError::Io { path: outcome.artifact_path, source };
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    eprintln!("wrote {}", outcome.artifact_path.display());
    ExitCode::from(outcome.exit_code())
}
