#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;

use clap::Parser;
use herzkit::Error;
use serde_json::json;

mod cli;
mod commands;
mod config;
mod report;
mod source;

use cli::{Cli, Format};

const EXIT_CHECKS_FAILED: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_TRUNCATION: u8 = 4;

fn fail(category: &str, message: &str, code: u8) -> ExitCode {
    let body = json!({ "schema": report::SCHEMA, "error": { "category": category, "message": message } });
    eprintln!("{body}");
    ExitCode::from(code)
}

fn fail_with(e: &Error) -> ExitCode {
    let code = match e {
        Error::Parse(_) => EXIT_PARSE,
        _ => EXIT_PRECONDITION,
    };
    fail(e.category(), &e.to_string(), code)
}

fn main() -> ExitCode {
    let argv = match config::merge(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => return fail_with(&e),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return fail("parse", e.to_string().trim(), EXIT_PARSE);
        }
    };
    let out = commands::output_of(&cli.command).clone();
    if let Some(n) = out.threads {
        if let Err(e) = herzkit::par::configure_threads(n) {
            return fail_with(&e);
        }
    }
    let outcome = match commands::run(&cli.command) {
        Ok(o) => o,
        Err(e) => return fail_with(&e),
    };
    let mut report = outcome.report;
    if outcome.truncation_breach {
        report.status = "truncation-breach".into();
    }
    let text = match out.format {
        Format::Json => report.to_json(),
        Format::Csv => match &outcome.grid_output {
            Some(f) => herzkit::sampled::io::to_csv(f),
            None => {
                return fail_with(&Error::Precondition(format!(
                    "'{}' has no grid-valued result; use --format json",
                    report.command
                )))
            }
        },
    };
    match &out.output {
        Some(path) => {
            if let Err(e) = report::write_atomic(path, &text) {
                return fail("io", &format!("{}: {e}", path.display()), EXIT_PRECONDITION);
            }
        }
        None => print!("{text}"),
    }
    if outcome.truncation_breach {
        return ExitCode::from(EXIT_TRUNCATION);
    }
    if outcome.checks_failed {
        return ExitCode::from(EXIT_CHECKS_FAILED);
    }
    ExitCode::SUCCESS
}
