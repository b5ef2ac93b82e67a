use std::collections::BTreeMap;

use serde::Serialize;

use super::DiscoveryShares;
use crate::econ::RankCategory;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairSummary {
    pub commodity: String,
    pub pair_index: u8,
    pub days: usize,
    /// Mean ILS over cointegrated days.
    pub ils_mean: Option<f64>,
    pub ils_days: usize,
    /// Mean GS over stationary days.
    pub gs_mean: Option<f64>,
    pub gs_days: usize,
    pub combined_ps_mean: Option<f64>,
    pub combined_ps_days: usize,
    pub volume_share_mean: f64,
}

/// Percentage of estimated days in each rank category.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CategoryRow {
    pub commodity: String,
    pub pair_index: u8,
    pub days: usize,
    pub stationarity_pct: f64,
    pub cointegration_pct: f64,
    pub noncointegration_pct: f64,
}

/// Averages by nearby delivery month and days to expiration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NearbyProfileRow {
    pub commodity: String,
    pub pair_index: u8,
    pub nearby_month: u32,
    pub days_to_expiration: u32,
    pub days: usize,
    pub volume_share_mean: f64,
    pub combined_ps_mean: Option<f64>,
    pub combined_ps_days: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SummaryTables {
    pub pairs: Vec<PairSummary>,
    pub categories: Vec<CategoryRow>,
    pub nearby_profile: Vec<NearbyProfileRow>,
}

#[derive(Default)]
struct Mean {
    sum: f64,
    n: usize,
}

impl Mean {
    fn push(&mut self, v: Option<f64>) {
        if let Some(v) = v {
            self.sum += v;
            self.n += 1;
        }
    }

    fn get(&self) -> Option<f64> {
        (self.n > 0).then(|| self.sum / self.n as f64)
    }
}

#[derive(Default)]
struct PairAcc {
    days: usize,
    ils: Mean,
    gs: Mean,
    ps: Mean,
    volume: Mean,
    counts: [usize; 3],
}

/// Summarises daily shares per commodity pair. `nearby_month` maps a row to
/// the delivery month of its nearby contract; rows mapped to `None` are left
/// out of the nearby profile only.
///
/// Rows are visited in the order given, so output is deterministic for a
/// deterministic input.
pub fn aggregate_shares<F>(days: &[DiscoveryShares], nearby_month: F) -> SummaryTables
where
    F: Fn(&DiscoveryShares) -> Option<u32>,
{
    let mut pairs: BTreeMap<(String, u8), PairAcc> = BTreeMap::new();
    let mut profile: BTreeMap<(String, u8, u32, u32), (usize, Mean, Mean)> = BTreeMap::new();

    for row in days {
        let acc = pairs.entry((row.commodity.clone(), row.pair_index)).or_default();
        acc.days += 1;
        acc.volume.push(Some(row.volume_share));
        acc.ps.push(row.combined_ps);
        match row.category {
            RankCategory::Stationarity => {
                acc.counts[0] += 1;
                acc.gs.push(row.gs1);
            }
            RankCategory::Cointegration => {
                acc.counts[1] += 1;
                acc.ils.push(row.ils1);
            }
            RankCategory::NonCointegration => acc.counts[2] += 1,
        }
        if let Some(month) = nearby_month(row) {
            let key = (row.commodity.clone(), row.pair_index, month, row.days_to_expiration);
            let entry = profile.entry(key).or_default();
            entry.0 += 1;
            entry.1.push(Some(row.volume_share));
            entry.2.push(row.combined_ps);
        }
    }

    let mut out = SummaryTables::default();
    for ((commodity, pair_index), acc) in pairs {
        let pct = |c: usize| 100.0 * c as f64 / acc.days as f64;
        out.categories.push(CategoryRow {
            commodity: commodity.clone(),
            pair_index,
            days: acc.days,
            stationarity_pct: pct(acc.counts[0]),
            cointegration_pct: pct(acc.counts[1]),
            noncointegration_pct: pct(acc.counts[2]),
        });
        out.pairs.push(PairSummary {
            commodity,
            pair_index,
            days: acc.days,
            ils_mean: acc.ils.get(),
            ils_days: acc.ils.n,
            gs_mean: acc.gs.get(),
            gs_days: acc.gs.n,
            combined_ps_mean: acc.ps.get(),
            combined_ps_days: acc.ps.n,
            volume_share_mean: acc.volume.get().unwrap_or(f64::NAN),
        });
    }
    // Profiles read naturally from far to near expiration.
    let mut rows: Vec<_> = profile.into_iter().collect();
    rows.sort_by(|a, b| {
        let (ka, kb) = (&a.0, &b.0);
        (&ka.0, ka.1, ka.2, std::cmp::Reverse(ka.3)).cmp(&(&kb.0, kb.1, kb.2, std::cmp::Reverse(kb.3)))
    });
    for ((commodity, pair_index, nearby_month, days_to_expiration), (n, vol, ps)) in rows {
        out.nearby_profile.push(NearbyProfileRow {
            commodity,
            pair_index,
            nearby_month,
            days_to_expiration,
            days: n,
            volume_share_mean: vol.get().unwrap_or(f64::NAN),
            combined_ps_mean: ps.get(),
            combined_ps_days: ps.n,
        });
    }
    out
}
