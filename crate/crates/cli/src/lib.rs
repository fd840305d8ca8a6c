//! The `weylab` experiment runner: subcommands producing line-delimited JSON
//! run records, plus the acceptance suite.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod record;
pub mod verify;

use std::fs::OpenOptions;
use std::io::Write;

use clap::Parser;

use args::{Cli, Command, GlobalArgs};
use config::{parse_count, ExperimentConfig};
use error::{CliError, EXIT_USAGE};
use record::{write_records, RunRecord};

/// Builds the effective configuration: defaults, config file, environment, then flags.
pub fn resolve_config(global: &GlobalArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &global.config {
        cfg.load_file(path)?;
    }
    cfg.apply_env()?;
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    if let Some(b) = &global.budget {
        let v = parse_count(b).ok_or_else(|| CliError::Usage(format!("invalid budget {b:?}")))?;
        cfg.budget = v;
        cfg.box_budget = v;
    }
    if let Some(e) = global.epsilon {
        cfg.epsilon = e;
    }
    if let Some(out) = &global.out {
        cfg.out = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Records to write, and whether verification (if any) passed.
fn execute(
    cli: &Cli,
    cfg: &ExperimentConfig,
    err: &mut dyn Write,
) -> Result<(Vec<RunRecord>, bool), CliError> {
    let one = |r: RunRecord| (vec![r], true);
    match &cli.command {
        Command::Sigma { profile } => commands::sigma(profile, cfg).map(one),
        Command::Sum(a) => commands::sum(a, cfg).map(one),
        Command::Arcs(a) => commands::arcs(a, cfg).map(one),
        Command::Meanvalue(a) => commands::meanvalue(a, cfg).map(|r| (r, true)),
        Command::Minfrac(a) => commands::minfrac(a, cfg).map(|r| (r, true)),
        Command::Verify { suite } => {
            commands::verify(*suite, cfg, err).map(|(r, ok)| (vec![r], ok))
        }
    }
}

fn emit(
    records: &[RunRecord],
    cfg: &ExperimentConfig,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => {
            let mut f = OpenOptions::new().create(true).append(true).open(path)?;
            write_records(&mut f, records)?;
        }
        None => write_records(out, records)?,
    }
    Ok(())
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let result = resolve_config(&cli.global).and_then(|cfg| {
        let (records, ok) = execute(&cli, &cfg, err)?;
        emit(&records, &cfg, out)?;
        if ok {
            Ok(())
        } else {
            Err(CliError::Verification("one or more criteria failed".into()))
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "weylab: {e}");
            e.exit_code()
        }
    }
}
