use std::path::{Path, PathBuf};

use super::{write_file, CommonArgs};
use crate::config::{is_run_config, load_scenario, CalendarSection, CommodityConfig, PathsSection, RunConfig};
use crate::error::{Error, Result};
use crate::regression::Template;
use crate::synthetic::{simulate_sample, DateWindow};

fn default_template(symbol: &str) -> Template {
    match symbol {
        "LE" => Template::Cattle,
        _ => Template::Corn,
    }
}

/// Writes the simulated sample plus a `run.toml` that `analyze` can consume
/// directly. Returns the sample directory.
pub fn simulate(args: &CommonArgs) -> Result<PathBuf> {
    let base = args.config.parent().unwrap_or(Path::new("")).to_path_buf();
    let (mut scenario, run) = if is_run_config(&args.config)? {
        let run = RunConfig::load(&args.config)?;
        let scenario = run
            .scenario
            .clone()
            .ok_or_else(|| Error::Config(format!("{}: no [scenario] section", args.config.display())))?;
        (scenario, Some(run))
    } else {
        (load_scenario(&args.config)?, None)
    };
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    let out = args.out.clone().unwrap_or_else(|| base.join("simulated"));
    let manifest = simulate_sample(&scenario, &out)?;

    let symbol = manifest.commodity.symbol.clone();
    let template = run
        .as_ref()
        .and_then(|r| r.commodity(&symbol))
        .map(|c| c.template.clone())
        .unwrap_or_else(|| default_template(&symbol));
    let crash_windows = manifest.crash_windows.iter().map(|c| DateWindow { start: c.start, end: c.end }).collect();
    let max_pair = (manifest.contracts - 1).min(5) as u8;
    let mut pipeline = run.as_ref().map(|r| r.pipeline.clone()).unwrap_or_default();
    pipeline.pairs = match &args.pairs {
        Some(list) => crate::config::parse_pairs(list)?,
        None => (1..=max_pair).collect(),
    };
    let generated = RunConfig {
        output_dir: PathBuf::from("results"),
        pipeline,
        calendar: CalendarSection { holidays: manifest.holidays.clone() },
        paths: PathsSection {
            ticks: Some(PathBuf::from("ticks")),
            settlements: Some(PathBuf::from(&manifest.settlements)),
            reports: Some(PathBuf::from(&manifest.reports)),
            shares: None,
        },
        commodities: vec![CommodityConfig::new(manifest.commodity.clone(), template, crash_windows)],
        scenario: None,
    };
    let text = toml::to_string(&generated).map_err(|e| Error::Runtime(format!("serialising run.toml: {e}")))?;
    write_file(&out.join("run.toml"), text)?;
    Ok(out)
}
