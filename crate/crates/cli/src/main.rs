//! `starval` command-line front end.
//!
//! Exit codes: 0 when every checked property holds, 1 on a property failure
//! or a domain error, 2 on a usage or configuration error.

mod args;
mod commands;
mod config;
mod descriptors;
mod failure;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Format};
use crate::failure::{Failure, Outcome};

fn emit(cli: &Cli, report: &commands::Report) -> Outcome<()> {
    let body = match cli.global.format {
        Format::Json => serde_json::to_string_pretty(&report.json)? + "\n",
        Format::Csv => report.csv.clone(),
    };
    for (path, text) in &report.files {
        std::fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    }
    match &cli.global.out {
        Some(path) => std::fs::write(path, body).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let argv = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = commands::run(&cli).and_then(|report| emit(&cli, &report).map(|_| report.passed));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("property check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
