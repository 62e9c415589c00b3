//! The `credaudit` command line: probe, audit, dominate, diff and report.
//!
//! Exit codes: 0 success or coherent, 1 norm violation found, 2 operational
//! error, 3 probing finished with some formulas failed.

mod commands;
mod config;
mod store;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use commands::{
    cmd_audit, cmd_diff, cmd_dominate, cmd_probe, cmd_report, credence_function,
    render_certificate, DominanceArtifact, ProbeSummary, EXIT_ERROR, EXIT_OK, EXIT_PARTIAL,
    EXIT_VIOLATION,
};
pub use config::{Overrides, PropositionFile, Run, RunConfig, TruthValue};
pub use store::{read_rows, write_rows, ErrorRow, ProbeRow};

use crate::accuracy::AccuracyError;
use crate::audit::AuditError;
use crate::backend::BackendError;
use crate::credence::CredenceError;
use crate::logic::LogicError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Credence(#[from] CredenceError),
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error(transparent)]
    Accuracy(#[from] AccuracyError),
    #[error("missing probes for {}; run `credaudit probe` first", .0.join(", "))]
    MissingProbes(Vec<String>),
    #[error("all {failed} probes failed; nothing written (first error: {first})")]
    ProbeFailed { failed: usize, first: String },
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "credaudit",
    version,
    about = "Probe language-model credences and audit their coherence"
)]
pub struct Cli {
    /// Run configuration file.
    #[arg(long, global = true, default_value = "credaudit.json")]
    pub config: PathBuf,
    /// Output directory, overriding the configuration.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Re-probe formulas that already have records.
    #[arg(long, global = true)]
    pub refresh: bool,
    /// Append "Answer yes or no." to every question.
    #[arg(long, global = true)]
    pub force_binary: bool,
    /// Full-belief threshold.
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    /// Residual tolerance for norm checks.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Probe every configured formula and append records to probes.jsonl.
    Probe,
    /// Audit recorded credences and write audit.json.
    Audit,
    /// Project credences onto the coherent polytope and write dominance.json.
    Dominate,
    /// Compare two audit reports.
    Diff { before: PathBuf, after: PathBuf },
    /// Print the stored audit report and dominance certificate.
    Report,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            output: self.output.clone(),
            force_binary: self.force_binary,
            theta: self.theta,
            tolerance: self.tolerance,
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    if let Command::Diff { before, after } = &cli.command {
        let d = cmd_diff(before, after, out)?;
        return Ok(if d.degraded() {
            EXIT_VIOLATION
        } else {
            EXIT_OK
        });
    }
    let run = Run::load(&cli.config, &cli.overrides())?;
    Ok(match cli.command {
        Command::Probe => cmd_probe(&run, cli.refresh, out)?.exit_code(),
        Command::Audit => coherence_code(cmd_audit(&run, out)?.coherent),
        Command::Dominate => {
            let a = cmd_dominate(&run, out)?;
            if a.certificate.strictly_dominates {
                EXIT_VIOLATION
            } else {
                EXIT_OK
            }
        }
        Command::Report => coherence_code(cmd_report(&run, out)?.coherent),
        Command::Diff { .. } => unreachable!("handled above"),
    })
}

fn coherence_code(coherent: bool) -> i32 {
    if coherent {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

/// Runs a parsed command line, writing normal output to `out` and errors to
/// `err`. Returns the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

/// Parses `args` (program name first) and runs against stdout and stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    run(
        &cli,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}
