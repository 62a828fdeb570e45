//! `truthboost` command-line driver.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure (unbounded
//! weight, empty leaf, non-convergence, perfect weak learner). Failures print
//! a single JSON object `{"error": kind, "message": ...}` on stderr.

mod commands;
mod report;

use std::process::ExitCode;

use clap::Parser;

use commands::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": e.kind, "message": e.message })
            );
            ExitCode::from(e.code)
        }
    }
}
