//! Run configuration (TOML).
//!
//! ```toml
//! output_dir = "results"
//!
//! [pipeline]
//! min_updates = 100
//! lag_min = 1
//! lag_max = 10
//! significance = 0.05
//! pairs = [1, 2, 3, 4]
//!
//! [calendar]
//! holidays = ["2015-01-19"]
//!
//! [paths]
//! ticks = "ticks"
//! settlements = "settlements.csv"
//! reports = "reports.csv"
//!
//! [[commodities]]
//! symbol = "ZC"
//! delivery_months = [3, 5, 7, 9, 12]
//! expiration_rule = "business_day_before15th"
//! session = { start = "09:30:00", end = "13:15:00" }
//! template = "corn"
//! crash_windows = [{ start = "2008-07-03", end = "2008-12-08" }]
//! ```
//!
//! Relative paths resolve against the directory of the config file.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::{BusinessCalendar, Commodity, ExpirationRule, SessionWindow};
use crate::metrics::PipelineConfig;
use crate::regression::{EventCalendar, Template};
use crate::synthetic::{DateWindow, ScenarioConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    pub min_updates: usize,
    pub lag_min: usize,
    pub lag_max: usize,
    pub significance: f64,
    /// Deferred positions paired with the nearby.
    pub pairs: Vec<u8>,
}

impl Default for PipelineSection {
    fn default() -> Self {
        let p = PipelineConfig::default();
        PipelineSection {
            min_updates: p.min_updates,
            lag_min: p.lag_min,
            lag_max: p.lag_max,
            significance: p.significance,
            pairs: vec![1],
        }
    }
}

impl PipelineSection {
    pub fn estimation(&self) -> PipelineConfig {
        PipelineConfig {
            min_updates: self.min_updates,
            lag_min: self.lag_min,
            lag_max: self.lag_max,
            significance: self.significance,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalendarSection {
    pub holidays: Vec<NaiveDate>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    /// Tick CSV file, or a directory of them (`<date>/<contract>.csv`).
    pub ticks: Option<PathBuf>,
    /// `date,contract,settle`.
    pub settlements: Option<PathBuf>,
    /// `date,report_type`.
    pub reports: Option<PathBuf>,
    /// Daily shares read by `regress` and `rollpoint`; defaults to the
    /// `daily_shares.csv` written by `analyze`.
    pub shares: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommodityConfig {
    pub symbol: String,
    #[serde(default)]
    pub name: String,
    pub delivery_months: Vec<u32>,
    pub expiration_rule: ExpirationRule,
    pub session: SessionWindow,
    pub template: Template,
    #[serde(default)]
    pub crash_windows: Vec<DateWindow>,
}

impl CommodityConfig {
    pub fn new(commodity: Commodity, template: Template, crash_windows: Vec<DateWindow>) -> Self {
        CommodityConfig {
            symbol: commodity.symbol,
            name: commodity.name,
            delivery_months: commodity.delivery_months,
            expiration_rule: commodity.expiration_rule,
            session: commodity.session,
            template,
            crash_windows,
        }
    }

    pub fn commodity(&self) -> Commodity {
        Commodity {
            symbol: self.symbol.clone(),
            name: self.name.clone(),
            delivery_months: self.delivery_months.clone(),
            expiration_rule: self.expiration_rule,
            session: self.session,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub pipeline: PipelineSection,
    #[serde(default)]
    pub calendar: CalendarSection,
    #[serde(default)]
    pub paths: PathsSection,
    #[serde(default)]
    pub commodities: Vec<CommodityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioConfig>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

fn read_text(path: &Path) -> Result<String> {
    match fs::read_to_string(path) {
        Ok(text) => Ok(text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::ConfigNotFound(path.to_path_buf())),
        Err(e) => Err(Error::io(format!("reading {}", path.display()), e)),
    }
}

fn toml_error(path: &Path, e: toml::de::Error) -> Error {
    let message = e.message().trim().replace('\n', " ");
    Error::Config(format!("{}: {message}", path.display()))
}

/// Reads a standalone scenario file.
pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let text = read_text(path)?;
    let scenario: ScenarioConfig = toml::from_str(&text).map_err(|e| toml_error(path, e))?;
    scenario.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(scenario)
}

/// Whether a TOML file is a run config (as opposed to a bare scenario).
pub fn is_run_config(path: &Path) -> Result<bool> {
    let text = read_text(path)?;
    let value: toml::Table = toml::from_str(&text).map_err(|e| toml_error(path, e))?;
    Ok(!value.contains_key("seed"))
}

impl RunConfig {
    /// Loads, resolves relative paths and validates.
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| toml_error(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut self.output_dir);
        for p in [&mut self.paths.ticks, &mut self.paths.settlements, &mut self.paths.reports, &mut self.paths.shares]
            .into_iter()
            .flatten()
        {
            resolve(p);
        }
    }

    /// Parameter checks made before any work starts.
    pub fn validate(&self) -> Result<()> {
        self.pipeline.estimation().validate().map_err(Error::Config)?;
        validate_pairs(&self.pipeline.pairs)?;
        let mut symbols = std::collections::BTreeSet::new();
        for c in &self.commodities {
            c.commodity().validate().map_err(|e| Error::Config(e.to_string()))?;
            if !symbols.insert(c.symbol.as_str()) {
                return Err(Error::Config(format!("commodity {} declared twice", c.symbol)));
            }
            if let Some(w) = c.crash_windows.iter().find(|w| w.end < w.start) {
                return Err(Error::Config(format!("{}: crash window {} > {}", c.symbol, w.start, w.end)));
            }
        }
        if let Some(s) = &self.scenario {
            s.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn business_calendar(&self) -> BusinessCalendar {
        BusinessCalendar::new(self.calendar.holidays.iter().copied())
    }

    pub fn commodity(&self, symbol: &str) -> Option<&CommodityConfig> {
        self.commodities.iter().find(|c| c.symbol == symbol)
    }

    /// Report dates (when a report file is configured), holidays and the
    /// commodity's crash windows.
    pub fn event_calendar(&self, commodity: &CommodityConfig) -> Result<EventCalendar> {
        let mut cal = EventCalendar::new(self.business_calendar());
        if let Some(path) = &self.paths.reports {
            let file = fs::File::open(path).map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => Error::ConfigNotFound(path.clone()),
                _ => Error::io(format!("reading {}", path.display()), e),
            })?;
            cal.read_reports(std::io::BufReader::new(file))?;
        }
        for w in &commodity.crash_windows {
            cal.add_crash_window(w.start, w.end);
        }
        Ok(cal)
    }

    /// Where `analyze` writes daily shares and where `regress` reads them.
    pub fn shares_path(&self) -> PathBuf {
        self.paths.shares.clone().unwrap_or_else(|| self.output_dir.join("daily_shares.csv"))
    }
}

pub fn validate_pairs(pairs: &[u8]) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::Config("at least one pair is required".into()));
    }
    if let Some(k) = pairs.iter().find(|k| !(1..=5).contains(*k)) {
        return Err(Error::Config(format!("pair index {k} outside 1..=5")));
    }
    Ok(())
}

/// Parses `--pairs 1,2,4`.
pub fn parse_pairs(text: &str) -> Result<Vec<u8>> {
    let mut pairs = text
        .split(',')
        .map(|s| s.trim().parse::<u8>().map_err(|_| Error::Config(format!("invalid pair list `{text}`"))))
        .collect::<Result<Vec<_>>>()?;
    pairs.sort_unstable();
    pairs.dedup();
    validate_pairs(&pairs)?;
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
        output_dir = "out"
        [pipeline]
        pairs = [1, 2]
        [paths]
        ticks = "ticks"
        [[commodities]]
        symbol = "LE"
        delivery_months = [2, 4, 6, 8, 10, 12]
        expiration_rule = "last_business_day"
        session = { start = "09:05:00", end = "13:00:00" }
        template = "cattle"
        crash_windows = [{ start = "2015-01-01", end = "2015-12-31" }]
    "#;

    #[test]
    fn loads_and_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, SAMPLE).unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.output_dir, dir.path().join("out"));
        assert_eq!(cfg.paths.ticks, Some(dir.path().join("ticks")));
        assert_eq!(cfg.commodity("LE").unwrap().commodity(), Commodity { name: String::new(), ..Commodity::live_cattle() });
        assert!(cfg.event_calendar(cfg.commodity("LE").unwrap()).unwrap().in_crash(
            NaiveDate::from_ymd_opt(2015, 6, 1).unwrap()
        ));
        assert!(is_run_config(&path).unwrap());
    }

    #[test]
    fn missing_and_invalid_configs() {
        let dir = tempfile::tempdir().unwrap();
        let missing = RunConfig::load(&dir.path().join("nope.toml")).unwrap_err();
        assert_eq!(missing.exit_code(), 2);
        assert!(missing.to_string().starts_with("config not found"));
        let path = dir.path().join("bad.toml");
        fs::write(&path, "[pipeline]\nlag_min = 0\n").unwrap();
        assert_eq!(RunConfig::load(&path).unwrap_err().exit_code(), 2);
        fs::write(&path, "bogus = 1\n").unwrap();
        assert!(matches!(RunConfig::load(&path), Err(Error::Config(_))));
    }

    #[test]
    fn custom_template() {
        use crate::regression::Regressor;
        let c: CommodityConfig = toml::from_str(
            r#"
            symbol = "ZC"
            delivery_months = [3, 5, 7, 9, 12]
            expiration_rule = "business_day_before15th"
            session = { start = "09:30:00", end = "13:15:00" }
            template = { custom = ["Volumeshare", "Expiration^2", "WASDE&CP"] }
            "#,
        )
        .unwrap();
        assert_eq!(
            c.template.regressors(),
            vec![Regressor::Volumeshare, Regressor::ExpirationSquared, Regressor::WasdeCp]
        );
    }

    #[test]
    fn pair_lists() {
        assert_eq!(parse_pairs("2, 1,2").unwrap(), vec![1, 2]);
        assert!(parse_pairs("0").is_err());
        assert!(parse_pairs("a").is_err());
    }
}
