mod commands;
mod config;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use config::{parse_config_file, Cli, RunConfig, UsageError};

const EXIT_USAGE: u8 = 1;
const EXIT_DEGENERATE: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;

fn exit_status(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<coupled_bec::Error>() {
            return match e {
                coupled_bec::Error::Degenerate(_) => EXIT_DEGENERATE,
                coupled_bec::Error::Convergence { .. } | coupled_bec::Error::Consistency { .. } => {
                    EXIT_CONVERGENCE
                }
                _ => EXIT_USAGE,
            };
        }
        if cause.downcast_ref::<UsageError>().is_some() {
            return EXIT_USAGE;
        }
    }
    EXIT_USAGE
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    let flags = match &cli.flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
            cli.flags.clone().over(parse_config_file(&text)?)
        }
        None => cli.flags.clone(),
    };
    let cfg = RunConfig::resolve(cli.command, flags)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()?;
    let table = pool.install(|| commands::run(&cfg))?;
    let text = output::render(&table, &cfg)?;
    match &cfg.out {
        Some(path) => output::write_atomic(path, &text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_status(&err))
        }
    }
}
