use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;

use super::{create_dir, write_file};
use crate::config::{CommodityConfig, RunConfig};
use crate::error::{Error, Result};
use crate::market_data::{
    build_second_grid, pair_contracts, parse_ticks, CalendarFlags, ContractId, PairContext, Price, RollCalendar,
    SecondGrid, Settlements, TickRecord,
};
use crate::metrics::{
    aggregate_shares, daily_pipeline, write_daily_csv, DiscoveryShares, Exclusion, PipelineConfig, SummaryTables,
};
use crate::regression::EventCalendar;

/// In-memory result of `analyze`.
#[derive(Clone, Debug, PartialEq)]
pub struct Analysis {
    pub shares: Vec<DiscoveryShares>,
    pub exclusions: Vec<Exclusion>,
    pub warnings: Vec<String>,
    pub summary: SummaryTables,
}

impl Analysis {
    /// Fails when nothing could be estimated, naming the most common reason.
    pub fn ensure_estimable(&self) -> Result<()> {
        if !self.shares.is_empty() {
            return Ok(());
        }
        let mut reasons: BTreeMap<&str, usize> = BTreeMap::new();
        for e in &self.exclusions {
            *reasons.entry(e.reason.as_str()).or_default() += 1;
        }
        let top = reasons.iter().max_by_key(|(_, n)| **n).map(|(r, n)| format!("; most common reason ({n}x): {r}"));
        Err(Error::Runtime(format!(
            "no estimable days: {} day-pairs excluded{}",
            self.exclusions.len(),
            top.unwrap_or_default()
        )))
    }
}

struct Context<'a> {
    cfg: &'a RunConfig,
    pairs: &'a [u8],
    estimation: PipelineConfig,
    settlements: Option<Settlements>,
    events: BTreeMap<String, EventCalendar>,
}

#[derive(Default)]
struct BatchResult {
    shares: Vec<DiscoveryShares>,
    exclusions: Vec<Exclusion>,
    warnings: BTreeSet<String>,
}

fn read_settlements(path: &Path) -> Result<Settlements> {
    let file = fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Config(format!("settlements file not found: {}", path.display())),
        _ => Error::io(format!("reading {}", path.display()), e),
    })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(std::io::BufReader::new(file));
    if reader.headers()?.iter().ne(["date", "contract", "settle"]) {
        return Err(Error::Runtime(format!("{}: expected header `date,contract,settle`", path.display())));
    }
    let mut out = Settlements::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| Error::Runtime(format!("{} line {}: invalid {what}", path.display(), i + 2));
        let date: NaiveDate = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| bad("date"))?;
        let contract: ContractId = rec.get(1).and_then(|s| s.parse().ok()).ok_or_else(|| bad("contract"))?;
        let settle: Price = rec.get(2).and_then(|s| s.parse().ok()).ok_or_else(|| bad("settle"))?;
        out.insert((date, contract), settle);
    }
    Ok(out)
}

/// Groups tick files into batches processed together: each subdirectory is
/// one batch, each top-level file its own batch. Order is lexicographic.
fn tick_batches(root: &Path) -> Result<Vec<Vec<PathBuf>>> {
    if root.is_file() {
        return Ok(vec![vec![root.to_path_buf()]]);
    }
    if !root.is_dir() {
        return Err(Error::Config(format!("ticks path not found: {}", root.display())));
    }
    let list = |dir: &Path| -> Result<Vec<PathBuf>> {
        let mut entries: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| Error::io(format!("listing {}", dir.display()), e))?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()
            .map_err(|e| Error::io(format!("listing {}", dir.display()), e))?;
        entries.sort();
        Ok(entries)
    };
    let is_csv = |p: &Path| p.is_file() && p.extension().is_some_and(|e| e == "csv");
    let mut batches = Vec::new();
    for entry in list(root)? {
        if entry.is_dir() {
            let files: Vec<PathBuf> = list(&entry)?.into_iter().filter(|p| is_csv(p)).collect();
            if !files.is_empty() {
                batches.push(files);
            }
        } else if is_csv(&entry) {
            batches.push(vec![entry]);
        }
    }
    Ok(batches)
}

type DayTicks = BTreeMap<ContractId, Vec<TickRecord>>;

fn process_batch(files: &[PathBuf], ctx: &Context<'_>) -> Result<BatchResult> {
    let mut days: BTreeMap<(NaiveDate, String), DayTicks> = BTreeMap::new();
    for path in files {
        let file = fs::File::open(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let ticks = parse_ticks(std::io::BufReader::new(file))
            .map_err(|e| Error::Runtime(format!("{}: {e}", path.display())))?;
        for t in ticks {
            days.entry((t.timestamp.date(), t.contract.symbol.clone()))
                .or_default()
                .entry(t.contract.clone())
                .or_default()
                .push(t);
        }
    }
    let mut out = BatchResult::default();
    for ((date, symbol), contracts) in days {
        let Some(commodity) = ctx.cfg.commodity(&symbol) else {
            out.warnings.insert(format!("ticks for undeclared commodity {symbol} skipped"));
            continue;
        };
        process_day(date, commodity, &contracts, ctx, &mut out);
    }
    Ok(out)
}

fn process_day(
    date: NaiveDate,
    commodity: &CommodityConfig,
    contracts: &DayTicks,
    ctx: &Context<'_>,
    out: &mut BatchResult,
) {
    let def = commodity.commodity();
    let roll = RollCalendar::new(&def, &ctx.cfg.business_calendar(), date, date);
    let grids: BTreeMap<ContractId, SecondGrid> = contracts
        .iter()
        .filter_map(|(id, ticks)| {
            let mut ticks = ticks.clone();
            ticks.sort_by_key(|t| (t.timestamp, t.sequence));
            build_second_grid(&ticks, date, &def.session).ok().map(|g| (id.clone(), g))
        })
        .collect();
    let events = &ctx.events[&commodity.symbol];
    let pair_ctx = PairContext {
        calendar: &roll,
        settlements: ctx.settlements.as_ref(),
        flags: CalendarFlags { report_day: events.is_report_day(date), crash: events.in_crash(date) },
    };
    for &k in ctx.pairs {
        let result = pair_contracts(&grids, &pair_ctx, date, k)
            .map_err(|e| Exclusion {
                session_date: date,
                commodity: commodity.symbol.clone(),
                pair_index: k,
                reason: e.to_string(),
            })
            .and_then(|pair| daily_pipeline(&pair, &ctx.estimation));
        match result {
            Ok(s) => out.shares.push(s),
            Err(e) => out.exclusions.push(e),
        }
    }
}

/// Runs ingestion and the daily pipeline over every configured tick file.
///
/// Batches run in parallel; results are merged and sorted by date, commodity
/// and pair so the output does not depend on scheduling.
pub fn analyze(cfg: &RunConfig, pairs: &[u8]) -> Result<Analysis> {
    let ticks = cfg.paths.ticks.as_ref().ok_or_else(|| Error::Config("paths.ticks is not set".into()))?;
    if cfg.commodities.is_empty() {
        return Err(Error::Config("no [[commodities]] declared".into()));
    }
    let settlements = cfg.paths.settlements.as_deref().map(read_settlements).transpose()?;
    let events = cfg
        .commodities
        .iter()
        .map(|c| Ok((c.symbol.clone(), cfg.event_calendar(c)?)))
        .collect::<Result<_>>()?;
    let ctx = Context { cfg, pairs, estimation: cfg.pipeline.estimation(), settlements, events };
    let batches = tick_batches(ticks)?;
    let results: Vec<BatchResult> =
        batches.par_iter().map(|files| process_batch(files, &ctx)).collect::<Result<_>>()?;

    let mut shares = Vec::new();
    let mut exclusions = Vec::new();
    let mut warnings = BTreeSet::new();
    for r in results {
        shares.extend(r.shares);
        exclusions.extend(r.exclusions);
        warnings.extend(r.warnings);
    }
    shares.sort_by(|a, b| {
        (a.session_date, &a.commodity, a.pair_index).cmp(&(b.session_date, &b.commodity, b.pair_index))
    });
    exclusions.sort_by(|a, b| {
        (a.session_date, &a.commodity, a.pair_index).cmp(&(b.session_date, &b.commodity, b.pair_index))
    });

    let rolls: BTreeMap<&str, RollCalendar> = match (shares.first(), shares.last()) {
        (Some(first), Some(last)) => cfg
            .commodities
            .iter()
            .map(|c| {
                let roll = RollCalendar::new(&c.commodity(), &cfg.business_calendar(), first.session_date, last.session_date);
                (c.symbol.as_str(), roll)
            })
            .collect(),
        _ => BTreeMap::new(),
    };
    let summary = aggregate_shares(&shares, |row| {
        rolls.get(row.commodity.as_str()).and_then(|r| r.nearby(row.session_date)).map(|c| c.month)
    });
    Ok(Analysis { shares, exclusions, warnings: warnings.into_iter().collect(), summary })
}

fn csv_rows<T: Serialize>(rows: &[T], header: &[&str]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(!rows.is_empty()).from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(header)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Runtime(format!("csv buffer: {e}")))
}

/// Writes `daily_shares.csv`, `excluded_days.csv`, `summary_pairs.csv`,
/// `category_distribution.csv`, `nearby_profile.csv`, `summary.json` and
/// `run_log.txt` into `out`.
pub fn write_analysis(analysis: &Analysis, out: &Path) -> Result<()> {
    create_dir(out)?;
    let mut daily = Vec::new();
    write_daily_csv(&mut daily, &analysis.shares)?;
    write_file(&out.join("daily_shares.csv"), daily)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["date", "commodity", "pair_index", "reason"])?;
    for e in &analysis.exclusions {
        w.write_record([e.session_date.to_string(), e.commodity.clone(), e.pair_index.to_string(), e.reason.clone()])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Runtime(format!("csv buffer: {e}")))?;
    write_file(&out.join("excluded_days.csv"), bytes)?;

    let s = &analysis.summary;
    write_file(
        &out.join("summary_pairs.csv"),
        csv_rows(
            &s.pairs,
            &[
                "commodity", "pair_index", "days", "ils_mean", "ils_days", "gs_mean", "gs_days", "combined_ps_mean",
                "combined_ps_days", "volume_share_mean",
            ],
        )?,
    )?;
    write_file(
        &out.join("category_distribution.csv"),
        csv_rows(
            &s.categories,
            &["commodity", "pair_index", "days", "stationarity_pct", "cointegration_pct", "noncointegration_pct"],
        )?,
    )?;
    write_file(
        &out.join("nearby_profile.csv"),
        csv_rows(
            &s.nearby_profile,
            &[
                "commodity", "pair_index", "nearby_month", "days_to_expiration", "days", "volume_share_mean",
                "combined_ps_mean", "combined_ps_days",
            ],
        )?,
    )?;
    let mut json = serde_json::to_string_pretty(s)?;
    json.push('\n');
    write_file(&out.join("summary.json"), json)?;

    write_file(&out.join("run_log.txt"), run_log(analysis))?;
    Ok(())
}

fn run_log(a: &Analysis) -> String {
    let total = a.shares.len() + a.exclusions.len();
    let pct = if total == 0 { 0.0 } else { 100.0 * a.exclusions.len() as f64 / total as f64 };
    let mut log = format!(
        "day-pairs: {total}\nestimated: {}\nexcluded: {} ({pct:.1}%)\n",
        a.shares.len(),
        a.exclusions.len()
    );
    let mut per_pair: BTreeMap<(&str, u8), (usize, usize)> = BTreeMap::new();
    for s in &a.shares {
        per_pair.entry((&s.commodity, s.pair_index)).or_default().0 += 1;
    }
    for e in &a.exclusions {
        per_pair.entry((&e.commodity, e.pair_index)).or_default().1 += 1;
    }
    for ((commodity, k), (est, exc)) in per_pair {
        let share = 100.0 * exc as f64 / (est + exc) as f64;
        log.push_str(&format!("{commodity} pair {k}: estimated {est}, excluded {exc} ({share:.1}%)\n"));
    }
    for w in &a.warnings {
        log.push_str(&format!("warning: {w}\n"));
    }
    for e in &a.exclusions {
        log.push_str(&format!("excluded {} {} pair {}: {}\n", e.session_date, e.commodity, e.pair_index, e.reason));
    }
    for s in a.shares.iter().filter(|s| !s.reasons.is_empty()) {
        let reasons: Vec<&str> = s.reasons.iter().map(|r| r.as_str()).collect();
        log.push_str(&format!(
            "note {} {} pair {}: {}\n",
            s.session_date,
            s.commodity,
            s.pair_index,
            reasons.join(",")
        ));
    }
    log
}
