//! Command-line harness: subcommands, report emission and exit codes.
//!
//! Exit codes: 0 on success, 1 on usage or I/O problems, 2 when a
//! mathematical assertion fails.

mod args;
mod commands;
mod report;

pub use args::{BodyKind, Cli, Command, Format};
pub use commands::{build_sampler, parse_theta, BuiltSampler, MAX_N, ORACLE_TOLERANCE, SNC_TOLERANCE};
pub use report::{csv_document, emit, json_document, theta_hash, Meta, CSV_HEADER};

use std::ffi::OsString;

use clap::Parser;
use serde::Serialize;

use crate::metrics::ConjectureReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ASSERTION: i32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    /// A mathematical check failed.
    Assertion(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Assertion(_) => EXIT_ASSERTION,
            CliError::Usage(_) | CliError::Failure(_) => EXIT_USAGE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Assertion(m) | CliError::Failure(m) => m,
        }
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return EXIT_OK;
        }
        Err(e) => {
            let text = e.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("usage error"));
            return EXIT_USAGE;
        }
    };
    let argv: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli.command, argv) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn execute(command: &Command, argv: Vec<String>) -> Result<(), CliError> {
    match command.common().threads {
        Some(0) => Err(CliError::Usage("--threads must be positive".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Failure(e.to_string()))?
            .install(|| dispatch(command, argv)),
        None => dispatch(command, argv),
    }
}

fn dispatch(command: &Command, argv: Vec<String>) -> Result<(), CliError> {
    let common = command.common();
    let meta = Meta::now(common.seed, argv);
    let format = command.format();
    let write = |text: String| emit(&text, common.out.as_deref()).map_err(CliError::from);
    let reports_or_json = |reports: &[ConjectureReport], json: &dyn Fn() -> Result<String, CliError>| match format {
        Format::Csv => csv_document(reports).map_err(non_finite),
        Format::Json => json(),
    };
    let only_json = || {
        if format == Format::Csv {
            Err(CliError::Usage("csv output is only available for moments and sweep".into()))
        } else {
            Ok(())
        }
    };
    const IDENTITY_FAILED: &str = "σ² ≤ Var/E or the variance decomposition identity failed";

    match command {
        Command::Moments(a) => {
            let r = commands::moments(a)?;
            write(reports_or_json(std::slice::from_ref(&r.report), &|| to_json(&meta, command, &r))?)?;
            assert_that(r.checks.passed(), IDENTITY_FAILED)
        }
        Command::Sweep(a) => {
            let r = commands::sweep(a)?;
            write(reports_or_json(&r.rows, &|| to_json(&meta, command, &r))?)?;
            assert_that(r.checks.iter().all(|c| c.passed()), IDENTITY_FAILED)
        }
        Command::VerifySnc(a) => {
            only_json()?;
            let r = commands::verify_snc(a)?;
            write(to_json(&meta, command, &r)?)?;
            assert_that(r.passed, &format!("max SNC gap {:e} exceeds {:e}", r.max_gap, r.tolerance))
        }
        Command::Rotate(a) => {
            only_json()?;
            let r = commands::rotate(a)?;
            write(to_json(&meta, command, &r)?)?;
            assert_that(
                r.hs_identity_holds && r.op_identity_holds,
                "rotation identities E|TUX|² = ‖T‖_HS², λ² = ‖T‖_op² not met",
            )
        }
        Command::OracleCompare(a) => {
            only_json()?;
            let r = commands::oracle_compare(a)?;
            write(to_json(&meta, command, &r)?)?;
            assert_that(r.passed, &format!("closed form and oracle differ by {:e}", r.max_delta))
        }
        Command::Volume(a) => {
            only_json()?;
            let r = commands::volume(a)?;
            write(to_json(&meta, command, &r)?)?;
            assert_that(r.passed, "closed-form volume disagrees with the oracle")
        }
    }
}

fn to_json<T: Serialize>(meta: &Meta, command: &Command, results: &T) -> Result<String, CliError> {
    json_document(meta, command, results).map_err(non_finite)
}

fn non_finite(e: crate::error::Error) -> CliError {
    match e {
        crate::error::Error::NotFinite(path) => CliError::Failure(format!("refusing non-finite value in {path}")),
        other => CliError::from(other),
    }
}

fn assert_that(ok: bool, msg: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Assertion(msg.into()))
    }
}

impl From<crate::error::Error> for CliError {
    fn from(e: crate::error::Error) -> Self {
        match e {
            crate::error::Error::NotIsotropic(_) => CliError::Assertion(e.to_string()),
            other => CliError::Failure(other.to_string()),
        }
    }
}
