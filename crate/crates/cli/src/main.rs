//! `shm`: command-line front end for Shoenfield register machines.
//!
//! Exit codes: 0 ok/accept, 1 reject, 2 parse or usage error,
//! 3 not deterministic, 4 fuel exhausted, 5 weight error, 6 budget exceeded,
//! 7 epsilon/eta out of range, 8 undetermined, 9 invalid generator params.

mod args;
mod commands;
mod report;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::{Cli, Format};
use report::{Failure, Report};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { report::EXIT_PARSE } else { 0 });
        }
    };
    let started = Instant::now();
    let (format, outcome) = commands::dispatch(&cli.command);
    match outcome {
        Ok(report) => {
            let elapsed = cli.timing.then(|| started.elapsed());
            emit(&report, format, elapsed);
            ExitCode::from(report.exit)
        }
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

fn emit(report: &Report, format: Format, elapsed: Option<std::time::Duration>) {
    let out = match format {
        Format::Text => report.text.clone(),
        Format::Graph => report.graph.clone().unwrap_or_else(|| report.text.clone()),
        Format::Structured => report.to_json(elapsed),
    };
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.as_bytes());
    if !out.ends_with('\n') {
        let _ = stdout.write_all(b"\n");
    }
}
