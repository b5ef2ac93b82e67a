use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{ContractId, MarketDataError, Price, RollCalendar, SecondGrid};

/// Minimum observed price changes per leg for a day to be estimated.
pub const DEFAULT_MIN_UPDATES: usize = 100;

/// Daily settlement prices keyed by `(date, contract)`.
pub type Settlements = BTreeMap<(NaiveDate, ContractId), Price>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalendarFlags {
    pub report_day: bool,
    pub crash: bool,
}

/// Everything besides the grids that `pair_contracts` needs.
#[derive(Clone, Copy, Debug)]
pub struct PairContext<'a> {
    pub calendar: &'a RollCalendar,
    pub settlements: Option<&'a Settlements>,
    pub flags: CalendarFlags,
}

/// Aligned nearby and deferred-k grids for one session.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractPairDay {
    pub session_date: NaiveDate,
    pub commodity: String,
    pub nearby_id: ContractId,
    pub deferred_id: ContractId,
    /// k in deferred-k.
    pub pair_index: u8,
    pub nearby_grid: SecondGrid,
    pub deferred_grid: SecondGrid,
    pub volume_share: f64,
    pub days_to_expiration: u32,
    pub backwardation: bool,
    pub flags: CalendarFlags,
}

impl ContractPairDay {
    /// Both legs as floats over the common range.
    pub fn series(&self) -> (Vec<f64>, Vec<f64>) {
        let values = |g: &SecondGrid| {
            g.prices.iter().map(|p| p.expect("paired grids are fully valid").to_f64()).collect()
        };
        (values(&self.nearby_grid), values(&self.deferred_grid))
    }

    pub fn len(&self) -> usize {
        self.nearby_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nearby_grid.is_empty()
    }
}

/// `own / (own + other)`, computed so that `volume_share(a, b) + volume_share(b, a) == 1`.
/// Two zero volumes split evenly.
pub fn volume_share(own: u64, other: u64) -> f64 {
    let total = own as f64 + other as f64;
    if total == 0.0 {
        0.5
    } else if own <= other {
        own as f64 / total
    } else {
        1.0 - other as f64 / total
    }
}

/// Builds the nearby vs deferred-`k` pair for `date`.
///
/// The legs are trimmed to the seconds where both have a price. Backwardation
/// compares settlement prices when available and falls back to each leg's
/// last trade of the session.
pub fn pair_contracts(
    grids: &BTreeMap<ContractId, SecondGrid>,
    ctx: &PairContext<'_>,
    date: NaiveDate,
    k: u8,
) -> Result<ContractPairDay, MarketDataError> {
    let calendar = ctx.calendar;
    let missing = |which: &'static str, reason: String| MarketDataError::MissingContract { which, date, reason };
    let nearby_id = calendar
        .nearby(date)
        .ok_or_else(|| missing("nearby", "outside the roll calendar".to_string()))?;
    let deferred_id = calendar
        .contract_at(date, usize::from(k))
        .ok_or_else(|| missing("deferred", format!("deferred-{k} not listed")))?;
    let nearby = grids
        .get(nearby_id)
        .ok_or_else(|| missing("nearby", format!("no trades for {nearby_id}")))?;
    let deferred = grids
        .get(deferred_id)
        .ok_or_else(|| missing("deferred", format!("no trades for {deferred_id}")))?;
    if nearby.start != deferred.start || nearby.end != deferred.end {
        return Err(MarketDataError::MixedInput(format!(
            "session windows of {nearby_id} and {deferred_id}"
        )));
    }
    let from = match (nearby.first_valid(), deferred.first_valid()) {
        (Some(a), Some(b)) => a.max(b),
        _ => return Err(MarketDataError::NoOverlap(date)),
    };
    let to = nearby.len() - 1;
    let settle = |id: &ContractId, grid: &SecondGrid| {
        ctx.settlements
            .and_then(|s| s.get(&(date, id.clone())).copied())
            .unwrap_or(grid.last_trade)
    };
    let backwardation = settle(deferred_id, deferred) < settle(nearby_id, nearby);
    Ok(ContractPairDay {
        session_date: date,
        commodity: calendar.commodity().symbol.clone(),
        nearby_id: nearby_id.clone(),
        deferred_id: deferred_id.clone(),
        pair_index: k,
        nearby_grid: nearby.slice(from, to),
        deferred_grid: deferred.slice(from, to),
        volume_share: volume_share(nearby.total_volume, deferred.total_volume),
        days_to_expiration: calendar.days_to_expiration(date).unwrap_or(0),
        backwardation,
        flags: ctx.flags,
    })
}

/// Whether both legs move often enough to support estimation.
pub fn is_estimable(pair: &ContractPairDay, min_updates: usize) -> bool {
    [&pair.nearby_grid, &pair.deferred_grid]
        .iter()
        .all(|g| !g.is_constant() && g.price_updates() >= min_updates)
}
