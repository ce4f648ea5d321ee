//! `symrestore` experiment runner.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 the target sector has no
//! weight in the state, 1 anything else (I/O).

mod config;
mod experiments;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use symrestore::Error;

use config::{CommonArgs, ExperimentConfig, Format};
use experiments::{report_records, Output, Record, RunError};

#[derive(Parser)]
#[command(name = "symrestore", version, about = "Symmetry-restoration experiments on a statevector simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Grover success probability p_n versus step count.
    Fig5,
    /// Sector weights of the uniform state along the IQPE-like ladder.
    Fig6,
    /// Deviation of every exact projector form from the amplitude filter.
    Equivalence,
    /// Ancilla, gate and retained-probability accounting for every method.
    Compare,
    /// Restore the particle number of a seeded BCS state.
    Bcs,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Fig5 => "fig5",
            Command::Fig6 => "fig6",
            Command::Equivalence => "equivalence",
            Command::Compare => "compare",
            Command::Bcs => "bcs",
        }
    }
}

fn csv_bytes(records: &[Record]) -> Result<Vec<u8>, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| RunError::Io(e.to_string());
    w.write_record(["step", "sector", "value"]).map_err(io)?;
    for r in records {
        w.write_record([r.step.to_string(), r.sector.clone(), format!("{:.16e}", r.value)]).map_err(io)?;
    }
    w.into_inner().map_err(|e| RunError::Io(e.to_string()))
}

fn render(output: &Output, format: Format) -> Result<Vec<u8>, RunError> {
    let json = |v: serde_json::Result<String>| v.map(|s| (s + "\n").into_bytes()).map_err(|e| RunError::Io(e.to_string()));
    match (output, format) {
        (Output::Records(r), Format::Csv) => csv_bytes(r),
        (Output::Records(r), Format::Json) => json(serde_json::to_string_pretty(r)),
        (Output::Reports(r), Format::Csv) => csv_bytes(&report_records(r)),
        (Output::Reports(r), Format::Json) => json(serde_json::to_string_pretty(r)),
    }
}

fn run(cli: &Cli) -> Result<(), RunError> {
    let cfg = ExperimentConfig::resolve(cli.command.name(), &cli.common)?;
    log::debug!("resolved config: {cfg:?}");
    let output = match cli.command {
        Command::Fig5 => experiments::fig5(&cfg)?,
        Command::Fig6 => experiments::fig6(&cfg)?,
        Command::Equivalence => experiments::equivalence(&cfg)?,
        Command::Compare => experiments::compare(&cfg)?,
        Command::Bcs => experiments::bcs(&cfg)?,
    };
    let default_format = if matches!(cli.command, Command::Compare) { Format::Json } else { Format::Csv };
    let bytes = render(&output, cfg.format.unwrap_or(default_format))?;
    match &cfg.out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| RunError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(&bytes).map_err(|e| RunError::Io(e.to_string())),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SYMRESTORE_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, msg) = match e {
                RunError::Config(m) => (2, format!("configuration error: {m}")),
                RunError::Library(Error::EmptySector(m)) => (3, format!("empty sector: {m}")),
                RunError::Library(e @ (Error::Domain(_) | Error::Unsupported(_) | Error::Resource(_))) => {
                    (2, format!("configuration error: {e}"))
                }
                RunError::Io(m) => (1, format!("i/o error: {m}")),
            };
            eprintln!("symrestore: {msg}");
            ExitCode::from(code)
        }
    }
}
