//! `qgen`: reproducible experiment runner. The JSON report goes to stdout
//! and diagnostics go to stderr. Configuration or input errors exit with 2;
//! failed assertions and runtime failures exit with 1.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use commands::InputError;
use config::{resolve, CommandKind, ConfigError, ExperimentConfig};
use report::{config_hash, emit_series, RunReport};

/// Environment variable naming the directory for series files.
const REPORT_DIR_ENV: &str = "ADIABATIC_REPORT_DIR";

#[derive(Parser, Debug)]
#[command(name = "qgen", version, about = "Adiabatic state generation experiments", allow_negative_numbers = true)]
struct Cli {
    /// Experiment to run; may instead come from the config file.
    #[arg(value_enum)]
    command: Option<CommandKind>,
    /// TOML config; its keys override the matching flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for series files (defaults to the environment variable).
    #[arg(long, env = REPORT_DIR_ENV)]
    report_dir: Option<PathBuf>,
    #[command(flatten)]
    flags: ExperimentConfig,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let (command, mut cfg) = match resolve(cli.command, cli.flags, cli.config.as_deref()) {
        Ok(r) => r,
        Err(e @ (ConfigError::Read { .. } | ConfigError::Schema(_))) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    let start = Instant::now();
    let outputs = match commands::run(command, &mut cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if e.downcast_ref::<InputError>().is_some() { 2 } else { 1 };
            return ExitCode::from(code);
        }
    };
    let report = RunReport {
        command,
        config_hash: config_hash(command, &cfg),
        config: cfg,
        scalars: outputs.scalars,
        series: outputs.series,
        assertions: outputs.assertions,
        warnings: outputs.warnings,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    match serde_json::to_string_pretty(&report) {
        Ok(text) => println!("{text}"),
        Err(e) => {
            eprintln!("error: cannot serialize report: {e}");
            return ExitCode::from(1);
        }
    }
    if let Some(dir) = &cli.report_dir {
        match emit_series(&report, dir) {
            Ok(paths) => paths.iter().for_each(|p| eprintln!("wrote {}", p.display())),
            Err(e) => {
                eprintln!("error: cannot write series to {}: {e}", dir.display());
                return ExitCode::from(1);
            }
        }
    }
    let failed = report.failed();
    for a in &failed {
        eprintln!("assertion failed: {} ({})", a.name, a.detail);
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
