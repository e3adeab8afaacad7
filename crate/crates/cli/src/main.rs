use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use cavity_ghz_cli::verify::{run_checks, Faults};
use cavity_ghz_cli::{parse_builtin, render, run, CliError, Format, RunOptions, Source};
use clap::{Parser, Subcommand, ValueEnum};

/// Simulates GHZ-state preparation and the GHZ test with atoms and a
/// microwave cavity.
#[derive(Parser)]
#[command(name = "cavity-ghz", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a GHZ test and write the per-shot report.
    Run(RunArgs),
    /// Run the invariant suite and print one line per check.
    Verify {
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Protocol file to execute.
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    protocol: Option<PathBuf>,
    /// Builtin protocol.
    #[arg(long, value_parser = ["cascade+", "cascade-", "lambda+", "lambda-"])]
    builtin: Option<String>,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Photon-number cutoff [default: 4, or the protocol header].
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    cutoff: Option<u64>,
    /// Numeric tolerance [default: 1e-10, or the protocol header].
    #[arg(long, value_parser = positive_float)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
    /// Output path [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

fn positive_float(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

fn cmd_run(args: RunArgs) -> Result<bool, CliError> {
    let source = match (&args.protocol, &args.builtin) {
        (Some(path), _) => Source::File(path.clone()),
        (None, Some(name)) => {
            let (family, sign) = parse_builtin(name)?;
            Source::Builtin(family, sign)
        }
        (None, None) => return Err(CliError::Usage("one of --protocol or --builtin is required".into())),
    };
    let opts = RunOptions {
        source,
        shots: args.shots as usize,
        seed: args.seed,
        cutoff: args.cutoff.map(|c| c as usize),
        tol: args.tol,
    };
    let report = run(&opts)?;
    let format = match args.format {
        OutputFormat::Json => Format::Json,
        OutputFormat::Csv => Format::Csv,
    };
    let text = render(&report, format);
    match &args.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|source| CliError::Io { path: path.display().to_string(), source })?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source })?,
    }
    if !report.pass {
        eprintln!("invariant failure: per-shot products do not all match ⟨D⟩ = {}", report.expected_d);
    }
    Ok(report.pass)
}

fn cmd_verify(inject_fault: bool) -> bool {
    let checks = run_checks(Faults { perturb_mermin: inject_fault });
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    println!("{} checks, {failed} failed", checks.len());
    failed == 0
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ok = match cli.command {
        Command::Run(args) => match cmd_run(args) {
            Ok(pass) => pass,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(e.exit_code() as u8);
            }
        },
        Command::Verify { inject_fault } => cmd_verify(inject_fault),
    };
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
