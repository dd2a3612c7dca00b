use std::process::ExitCode;

use jmx::args::parse_args;
use jmx::run::{configure_threads, emit, output_of, run};
use jmx::CliError;

fn main() -> ExitCode {
    match try_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Help(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("jmx: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn try_main() -> Result<(), CliError> {
    let config = parse_args(std::env::args_os())?;
    configure_threads(std::env::var("JMX_THREADS").ok().as_deref())?;
    let report = run(&config)?;
    emit(&report, output_of(&config))?;
    for note in &report.notes {
        eprintln!("{note}");
    }
    match report.failure {
        Some(msg) => Err(CliError::Numeric(msg)),
        None => Ok(()),
    }
}
