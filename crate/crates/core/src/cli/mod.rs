//! Command-line entry point: `simulate`, `analyze`, `regress`, `rollpoint`.
//!
//! Every command takes `--config <path>` and writes into an explicit output
//! directory. Nothing is read from the environment, and outputs contain no
//! timestamps, so identical inputs give byte-identical outputs.

mod analyze;
mod regress;
mod rollpoint;
mod simulate;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use analyze::{analyze, write_analysis, Analysis};
pub use regress::{regress, regress_results};
pub use rollpoint::{rollpoints, RollPoint, NO_ROLL_SIGNAL};
pub use simulate::simulate;

use crate::config::{parse_pairs, RunConfig};
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "pdshare", version, about = "Price discovery shares between nearby and deferred futures contracts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a tick sample from a scenario (a scenario file or a run config with [scenario]).
    Simulate(CommonArgs),
    /// Estimate daily shares from tick data and summarise them.
    Analyze(CommonArgs),
    /// Regress daily shares on their determinants.
    Regress(CommonArgs),
    /// Report when volume and price discovery move to the deferred contract.
    Rollpoint(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Run config (TOML). `--scenario` is accepted as an alias.
    #[arg(long, visible_alias = "scenario", value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Simulation seed; overrides the scenario.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated deferred positions, e.g. `1,2`.
    #[arg(long, value_name = "LIST")]
    pub pairs: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl CommonArgs {
    fn run_config(&self) -> Result<(RunConfig, Vec<u8>, PathBuf)> {
        let cfg = RunConfig::load(&self.config)?;
        let pairs = match &self.pairs {
            Some(list) => parse_pairs(list)?,
            None => cfg.pipeline.pairs.clone(),
        };
        let out = self.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
        Ok((cfg, pairs, out))
    }
}

pub(crate) fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))
}

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Runs a parsed command.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let manifest_dir = simulate(&args)?;
            println!("wrote {}", manifest_dir.display());
        }
        Command::Analyze(args) => {
            let (cfg, pairs, out) = args.run_config()?;
            let analysis = analyze(&cfg, &pairs)?;
            write_analysis(&analysis, &out)?;
            for w in &analysis.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "{} day-pairs estimated, {} excluded; outputs in {}",
                analysis.shares.len(),
                analysis.exclusions.len(),
                out.display()
            );
            analysis.ensure_estimable()?;
        }
        Command::Regress(args) => {
            let (cfg, pairs, out) = args.run_config()?;
            let text = regress(&cfg, &pairs, &out, args.format)?;
            print!("{text}");
        }
        Command::Rollpoint(args) => {
            let (cfg, pairs, out) = args.run_config()?;
            let points = rollpoint::run(&cfg, &pairs, &out, args.format)?;
            println!("{} nearby periods; outputs in {}", points.len(), out.display());
        }
    }
    Ok(())
}

/// Parses `args` and runs; returns the process exit code.
///
/// Failures print one line on stderr: `error[<kind>]: <message>`.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {message}", e.kind());
            e.exit_code()
        }
    }
}
