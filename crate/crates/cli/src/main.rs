//! `bbtherm` command-line interface.

mod config;
mod error;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Format, RunConfig};
use error::Result;
use report::ReportMeta;

#[derive(Parser)]
#[command(
    name = "bbtherm",
    version,
    about = "Thermalization times of qubit ensembles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every configured method for each system count.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Output file; overrides the config. Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Reference table for modulated spins at beta = 1.
    Table1 {
        /// Largest N evaluated with the Liouvillian solver.
        #[arg(long, default_value_t = 6)]
        max_qome_n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Absolute tolerance for energy and gap degeneracy.
        #[arg(long)]
        energy_tol: Option<f64>,
        /// Largest Liouvillian dimension.
        #[arg(long, default_value_t = bbtherm::qome::DEFAULT_LIOUVILLIAN_CAP)]
        qome_cap: usize,
        /// Leave the timing columns empty.
        #[arg(long)]
        no_timing: bool,
    },
    /// Evaluate the configured methods over a beta or field grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Analyze {
            config,
            out,
            format,
        } => {
            let cfg = RunConfig::from_path(&config)?;
            let records = run::analyze(&cfg)?;
            let meta = ReportMeta {
                command: "analyze",
                family: cfg.family.as_str(),
                seed: cfg.seed,
                grid_key: None,
            };
            let out = out.or_else(|| cfg.output.clone());
            report::write_records(
                &records,
                format.unwrap_or(cfg.format),
                &meta,
                out.as_deref(),
            )
        }
        Command::Sweep {
            config,
            out,
            format,
        } => {
            let cfg = RunConfig::from_path(&config)?;
            let (key, records) = run::sweep(&cfg)?;
            let meta = ReportMeta {
                command: "sweep",
                family: cfg.family.as_str(),
                seed: cfg.seed,
                grid_key: Some(key),
            };
            let out = out.or_else(|| cfg.output.clone());
            report::write_records(
                &records,
                format.unwrap_or(cfg.format),
                &meta,
                out.as_deref(),
            )
        }
        Command::Table1 {
            max_qome_n,
            out,
            energy_tol,
            qome_cap,
            no_timing,
        } => {
            let rows = run::table1(&run::Table1Options {
                max_qome_n,
                energy_tol,
                qome_cap,
                record_timing: !no_timing,
            })?;
            report::write_table1(&rows, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("bbtherm: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
