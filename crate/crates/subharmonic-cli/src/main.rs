//! `subharmonic`: all-subsets Bayesian variable selection for linear
//! regression, robust to spherically symmetric error laws.
//!
//! # Background
//!
//! Four pipelines share one engine: `select` scores every predictor subset
//! of a CSV dataset, `simulate` and `sweep` measure true-model recovery on
//! synthetic designs, and `bench-laplace` charts the accuracy of the
//! closed-form approximation against exact quadrature.
//!
//! # Implementation
//!
//! Orchestration is single-threaded; the library parallelizes internally,
//! with the worker count capped by the `SUBHARMONIC_THREADS` environment
//! variable. Success writes the report to stdout (or `--output`) and exits
//! zero; any failure prints one machine-readable JSON error line to stderr
//! and exits nonzero.

mod config;
mod error;
mod io;
mod render;
mod run;

use clap::error::ErrorKind;
use clap::Parser;

use crate::config::{Cli, RunConfig};
use crate::error::CliError;

fn configure_threads() {
    if let Ok(raw) = std::env::var("SUBHARMONIC_THREADS") {
        match raw.trim().parse::<usize>() {
            Ok(count) if count >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(count)
                    .build_global();
            }
            _ => eprintln!(
                "warning: ignoring SUBHARMONIC_THREADS={raw:?}; expected a positive integer"
            ),
        }
    }
}

fn fail(error: &CliError) -> ! {
    let payload = serde_json::json!({
        "schema": 1,
        "error": {
            "code": error.code(),
            "message": error.to_string(),
        }
    });
    eprintln!("{payload}");
    std::process::exit(1);
}

// Reports are routinely piped into pagers and `head`; a closed pipe must end
// the program quietly instead of panicking mid-print.
fn write_stdout(rendered: &str) -> Result<(), CliError> {
    use std::io::Write;

    let mut stdout = std::io::stdout().lock();
    match stdout.write_all(rendered.as_bytes()).and_then(|()| stdout.flush()) {
        Ok(()) => Ok(()),
        Err(err) if err.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        Err(err) => Err(CliError::Io {
            path: "<stdout>".to_string(),
            message: err.to_string(),
        }),
    }
}

fn main() {
    configure_threads();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err)
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp
                    | ErrorKind::DisplayVersion
                    | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) =>
        {
            print!("{err}");
            std::process::exit(0);
        }
        Err(err) => fail(&CliError::BadFlag {
            message: err.to_string(),
        }),
    };

    let outcome = RunConfig::from_cli(cli).and_then(|config| {
        let report = run::run(&config)?;
        let rendered = report.render()?;
        match &config.output {
            Some(path) => std::fs::write(path, rendered).map_err(|err| CliError::Io {
                path: path.display().to_string(),
                message: err.to_string(),
            }),
            None => write_stdout(&rendered),
        }
    });
    if let Err(error) = outcome {
        fail(&error);
    }
}
