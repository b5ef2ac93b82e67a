use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::{create_dir, write_file, Format};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::metrics::{read_daily_csv, DiscoveryShares};
use crate::regression::{build_design, estimate, report_table, RegressionResult};

pub(crate) fn load_shares(cfg: &RunConfig) -> Result<Vec<DiscoveryShares>> {
    let path = cfg.shares_path();
    let file = fs::File::open(&path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => {
            Error::Config(format!("daily shares not found: {} (run `analyze` first)", path.display()))
        }
        _ => Error::io(format!("reading {}", path.display()), e),
    })?;
    read_daily_csv(std::io::BufReader::new(file))
}

/// Fits one regression per configured commodity pair.
pub fn regress_results(cfg: &RunConfig, pairs: &[u8]) -> Result<(Vec<RegressionResult>, Vec<String>)> {
    let shares = load_shares(cfg)?;
    let mut groups: BTreeMap<(String, u8), Vec<DiscoveryShares>> = BTreeMap::new();
    for s in shares.into_iter().filter(|s| pairs.contains(&s.pair_index)) {
        groups.entry((s.commodity.clone(), s.pair_index)).or_default().push(s);
    }
    let mut results = Vec::new();
    let mut warnings = Vec::new();
    for ((symbol, k), rows) in groups {
        let Some(commodity) = cfg.commodity(&symbol) else {
            warnings.push(format!("{symbol} pair {k}: commodity not declared; skipped"));
            continue;
        };
        let calendar = cfg.event_calendar(commodity)?;
        let outcome = build_design(&rows, &calendar, &commodity.template.regressors()).and_then(|d| estimate(&d));
        match outcome {
            Ok(r) => {
                warnings.extend(r.warnings.iter().cloned());
                results.push(r);
            }
            Err(e) => warnings.push(format!("{symbol} pair {k}: {e}")),
        }
    }
    Ok((results, warnings))
}

/// Writes `regression.txt` plus `regression.csv` or `regression.json`, and
/// returns the text table.
pub fn regress(cfg: &RunConfig, pairs: &[u8], out: &Path, format: Format) -> Result<String> {
    let (results, warnings) = regress_results(cfg, pairs)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    if results.is_empty() {
        return Err(Error::Runtime(format!(
            "no regression could be estimated{}",
            warnings.first().map(|w| format!(": {w}")).unwrap_or_default()
        )));
    }
    let table = report_table(&results);
    create_dir(out)?;
    let text = table.to_text();
    write_file(&out.join("regression.txt"), &text)?;
    match format {
        Format::Csv => write_file(&out.join("regression.csv"), table.to_csv())?,
        Format::Json => write_file(&out.join("regression.json"), table.to_json())?,
    }
    let mut log = String::new();
    for w in &warnings {
        log.push_str(&format!("warning: {w}\n"));
    }
    write_file(&out.join("regression_log.txt"), log)?;
    Ok(text)
}
