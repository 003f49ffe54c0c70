//! Command-line front end for `ptpu-core`.
//!
//! Every invocation writes exactly one run report, `run_<command>.json`, to
//! the output directory, next to any CSV/JSON data files it produced.
//! Exit codes: 0 success, 1 verification failure, 2 invalid input,
//! 3 numerical failure.

pub mod commands;
pub mod config;
pub mod output;

use std::time::Instant;

use ptpu_core::Error as CoreError;

use crate::config::{Command, RunConfig};
use crate::output::{json_text, report_file_name, to_json, write_file, RunReport, VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Core(e) => match e {
                CoreError::InvalidParams(_)
                | CoreError::WrongCase { .. }
                | CoreError::DimensionCap { .. }
                | CoreError::DimensionMismatch { .. }
                | CoreError::ParamsMismatch
                | CoreError::InvalidGrid(_)
                | CoreError::Parse { .. } => EXIT_INPUT,
                CoreError::SingularMap { .. }
                | CoreError::SingularMetric
                | CoreError::Eigensolver { .. }
                | CoreError::NotPseudoHermitian { .. }
                | CoreError::InitialNotSelfAdjoint { .. } => EXIT_NUMERICAL,
            },
        }
    }
}

/// A finished run: its report, stdout lines and exit code.
#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub lines: Vec<String>,
    pub exit_code: i32,
}

/// Runs one command and writes its outputs and run report.
pub fn execute(command: &Command, cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let started = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true);
    let clock = Instant::now();
    let out = match command {
        Command::Classify => commands::classify_cmd(cfg)?,
        Command::Spectrum { .. } => commands::spectrum_cmd(cfg)?,
        Command::Dynamics { .. } => commands::dynamics_cmd(cfg)?,
        Command::Verify { .. } => commands::verify_cmd(cfg)?,
        Command::Report { .. } => commands::report_cmd(cfg)?,
    };
    let pass = out.pass();
    let mut results = Vec::with_capacity(out.records.len() + out.extra_results.len());
    for r in &out.records {
        results.push(to_json(r)?);
    }
    for r in &out.extra_results {
        results.push(output::round_numbers(r.clone()));
    }
    for (name, bytes) in &out.files {
        write_file(&cfg.out_dir, name, bytes)?;
    }
    let report = RunReport {
        version: VERSION,
        command: cfg.command.clone(),
        config: output::round_numbers(cfg.echo()),
        seed: cfg.seed,
        started,
        elapsed_s: output::round15(clock.elapsed().as_secs_f64()),
        summary: output::round_numbers(out.summary),
        results,
        files: out.files.iter().map(|(n, _)| n.clone()).collect(),
        pass,
    };
    let value = to_json(&report)?;
    write_file(&cfg.out_dir, &report_file_name(&cfg.command), json_text(&value).as_bytes())?;
    Ok(RunOutcome {
        report,
        lines: out.lines,
        exit_code: if pass { EXIT_OK } else { EXIT_VERIFICATION },
    })
}
