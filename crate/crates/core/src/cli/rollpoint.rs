use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;

use super::regress::load_shares;
use super::{create_dir, write_file, Format};
use crate::config::RunConfig;
use crate::error::Result;
use crate::market_data::{ContractId, RollCalendar};
use crate::metrics::DiscoveryShares;

pub const NO_ROLL_SIGNAL: &str = "no roll signal";

/// First dates in one nearby period where the nearby loses the majority of
/// volume and of price discovery.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RollPoint {
    pub commodity: String,
    pub pair_index: u8,
    pub nearby_contract: String,
    pub expiration: NaiveDate,
    pub volume_roll_date: Option<NaiveDate>,
    pub volume_roll_dte: Option<u32>,
    pub ps_roll_date: Option<NaiveDate>,
    pub ps_roll_dte: Option<u32>,
}

/// Groups daily rows by nearby contract (rows are scanned in date order).
pub fn rollpoints(cfg: &RunConfig, shares: &[DiscoveryShares], pairs: &[u8]) -> Vec<RollPoint> {
    let mut rows: Vec<&DiscoveryShares> = shares.iter().filter(|s| pairs.contains(&s.pair_index)).collect();
    rows.sort_by(|a, b| (&a.commodity, a.pair_index, a.session_date).cmp(&(&b.commodity, b.pair_index, b.session_date)));
    let (Some(first), Some(last)) =
        (rows.iter().map(|r| r.session_date).min(), rows.iter().map(|r| r.session_date).max())
    else {
        return Vec::new();
    };
    let rolls: BTreeMap<&str, RollCalendar> = cfg
        .commodities
        .iter()
        .map(|c| (c.symbol.as_str(), RollCalendar::new(&c.commodity(), &cfg.business_calendar(), first, last)))
        .collect();
    let mut periods: BTreeMap<(String, u8, ContractId), RollPoint> = BTreeMap::new();
    for row in rows {
        let Some(roll) = rolls.get(row.commodity.as_str()) else { continue };
        let Some(nearby) = roll.nearby(row.session_date) else { continue };
        let point = periods.entry((row.commodity.clone(), row.pair_index, nearby.clone())).or_insert_with(|| RollPoint {
            commodity: row.commodity.clone(),
            pair_index: row.pair_index,
            nearby_contract: nearby.to_string(),
            expiration: roll.expiration(nearby).expect("listed contract"),
            volume_roll_date: None,
            volume_roll_dte: None,
            ps_roll_date: None,
            ps_roll_dte: None,
        });
        if point.volume_roll_date.is_none() && row.volume_share < 0.5 {
            point.volume_roll_date = Some(row.session_date);
            point.volume_roll_dte = Some(row.days_to_expiration);
        }
        if point.ps_roll_date.is_none() && row.combined_ps.is_some_and(|p| p < 0.5) {
            point.ps_roll_date = Some(row.session_date);
            point.ps_roll_dte = Some(row.days_to_expiration);
        }
    }
    let mut out: Vec<RollPoint> = periods.into_values().collect();
    out.sort_by(|a, b| (&a.commodity, a.pair_index, a.expiration).cmp(&(&b.commodity, b.pair_index, b.expiration)));
    out
}

fn date_or_marker(d: Option<NaiveDate>) -> String {
    d.map(|d| d.to_string()).unwrap_or_else(|| NO_ROLL_SIGNAL.to_string())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes `rollpoints.csv` or `rollpoints.json`. Periods without a crossing
/// carry `no roll signal` in place of the date.
pub(super) fn run(cfg: &RunConfig, pairs: &[u8], out: &Path, format: Format) -> Result<Vec<RollPoint>> {
    let shares = load_shares(cfg)?;
    let points = rollpoints(cfg, &shares, pairs);
    create_dir(out)?;
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "commodity",
                "pair_index",
                "nearby_contract",
                "expiration",
                "volume_roll_date",
                "volume_roll_dte",
                "ps_roll_date",
                "ps_roll_dte",
            ])?;
            for p in &points {
                w.write_record([
                    p.commodity.clone(),
                    p.pair_index.to_string(),
                    p.nearby_contract.clone(),
                    p.expiration.to_string(),
                    date_or_marker(p.volume_roll_date),
                    opt(p.volume_roll_dte),
                    date_or_marker(p.ps_roll_date),
                    opt(p.ps_roll_dte),
                ])?;
            }
            let bytes = w.into_inner().map_err(|e| crate::Error::Runtime(format!("csv buffer: {e}")))?;
            write_file(&out.join("rollpoints.csv"), bytes)?;
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = points
                .iter()
                .map(|p| {
                    serde_json::json!({
                        "commodity": p.commodity,
                        "pair_index": p.pair_index,
                        "nearby_contract": p.nearby_contract,
                        "expiration": p.expiration.to_string(),
                        "volume_roll_date": date_or_marker(p.volume_roll_date),
                        "volume_roll_dte": p.volume_roll_dte,
                        "ps_roll_date": date_or_marker(p.ps_roll_date),
                        "ps_roll_dte": p.ps_roll_dte,
                    })
                })
                .collect();
            let mut json = serde_json::to_string_pretty(&serde_json::json!({ "rollpoints": rows }))?;
            json.push('\n');
            write_file(&out.join("rollpoints.json"), json)?;
        }
    }
    Ok(points)
}
