mod commands;
mod emit;

use std::process::ExitCode;

use clap::Parser;
use wavemera::Error;

use commands::{run, Cli, Failure};

const INVALID_ARGUMENTS: u8 = 2;
const INFEASIBLE: u8 = 3;
const VERIFICATION_FAILED: u8 = 4;
const IO_ERROR: u8 = 5;

fn library_status(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_)
        | Error::OddObservableCount(_)
        | Error::MismatchedSites
        | Error::BoxTooLarge { .. } => INVALID_ARGUMENTS,
        Error::Io(_) | Error::Json(_) => IO_ERROR,
        _ => INFEASIBLE,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INVALID_ARGUMENTS } else { 0 });
        }
    };
    let outcome = match run(&cli) {
        Ok(outcome) => outcome,
        Err(Failure::Library(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(library_status(&e));
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(IO_ERROR);
        }
    };
    let written = emit::render(&outcome.report, &outcome.provenance, cli.format)
        .and_then(|bytes| emit::write_output(&bytes, cli.output.as_deref()));
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(IO_ERROR);
    }
    if !outcome.verified {
        eprintln!("verification failed: a measured discrepancy exceeded its bound");
        return ExitCode::from(VERIFICATION_FAILED);
    }
    ExitCode::SUCCESS
}
