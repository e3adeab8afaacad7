//! Command-line front end for `cavity-ghz`: protocol files, run reports and
//! the verification suite.

pub mod parse;
pub mod report;
pub mod verify;

use std::path::PathBuf;

use cavity_ghz::{builtin_steps, AtomFamily, Interpreter64, ProtocolStep64, Sign};
use thiserror::Error;

use crate::parse::{parse_protocol, ParseError, ProtocolFile};
use crate::report::{RunConfig, RunReport};

pub const DEFAULT_CUTOFF: usize = 4;
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] cavity_ghz::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Builtin(AtomFamily, Sign),
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub source: Source,
    pub shots: usize,
    pub seed: u64,
    /// Overrides the protocol header; falls back to [`DEFAULT_CUTOFF`].
    pub cutoff: Option<usize>,
    /// Overrides the protocol header; falls back to [`DEFAULT_TOL`].
    pub tol: Option<f64>,
}

/// `cascade+`, `cascade-`, `lambda+` or `lambda-`.
pub fn parse_builtin(name: &str) -> Result<(AtomFamily, Sign), CliError> {
    let (family, sign) = match name.len().checked_sub(1).map(|i| name.split_at(i)) {
        Some((f, "+")) => (f, Sign::Plus),
        Some((f, "-")) => (f, Sign::Minus),
        _ => return Err(CliError::Usage(format!("unknown builtin protocol `{name}`"))),
    };
    let family = family.parse().map_err(|_| CliError::Usage(format!("unknown builtin protocol `{name}`")))?;
    Ok((family, sign))
}

struct Resolved {
    family: AtomFamily,
    sign: Sign,
    cutoff: usize,
    tol: f64,
    steps: Vec<ProtocolStep64>,
    file: Option<(String, ProtocolFile)>,
}

fn resolve(opts: &RunOptions) -> Result<Resolved, CliError> {
    match &opts.source {
        Source::Builtin(family, sign) => Ok(Resolved {
            family: *family,
            sign: *sign,
            cutoff: opts.cutoff.unwrap_or(DEFAULT_CUTOFF),
            tol: opts.tol.unwrap_or(DEFAULT_TOL),
            steps: builtin_steps(*family, *sign),
            file: None,
        }),
        Source::File(path) => {
            let name = path.display().to_string();
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: name.clone(), source })?;
            let file = parse_protocol(&text).map_err(|source| CliError::Parse { path: name.clone(), source })?;
            Ok(Resolved {
                family: file.family,
                sign: file.sign,
                cutoff: opts.cutoff.or(file.cutoff).unwrap_or(DEFAULT_CUTOFF),
                tol: opts.tol.or(file.tolerance).unwrap_or(DEFAULT_TOL),
                steps: file.step_list(),
                file: Some((name, file)),
            })
        }
    }
}

/// Runs the requested protocol and builds its report.
///
/// Validation failures inside a protocol file are reported against the line
/// of the offending step.
pub fn run(opts: &RunOptions) -> Result<RunReport, CliError> {
    if opts.shots == 0 {
        return Err(CliError::Usage("--shots must be at least 1".into()));
    }
    let r = resolve(opts)?;
    let locate = |e: cavity_ghz::Error| match (&e, &r.file) {
        (cavity_ghz::Error::Validation { step, reason }, Some((path, file))) => CliError::Parse {
            path: path.clone(),
            source: ParseError { line: file.line_of(*step), message: reason.clone() },
        },
        _ => CliError::Core(e),
    };
    let interpreter = Interpreter64::new(r.family, r.cutoff, r.tol, r.steps.clone()).map_err(locate)?;
    let result = interpreter.sample(opts.shots, opts.seed).map_err(locate)?;
    let config = RunConfig::new(r.family, r.sign, opts.shots, opts.seed, r.cutoff, r.tol);
    Ok(RunReport::new(config, &result))
}

pub fn render(report: &RunReport, format: Format) -> String {
    match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    }
}
