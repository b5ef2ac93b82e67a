use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::str::FromStr;

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::RegressionError;
use crate::econ::RankCategory;
use crate::market_data::BusinessCalendar;
use crate::metrics::DiscoveryShares;

/// Published reports that enter the regressions as dummies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportType {
    Wasde,
    CropProgress,
    GrainStocks,
    CattleOnFeed,
}

impl FromStr for ReportType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace([' ', '-'], "_").as_str() {
            "wasde" => Ok(ReportType::Wasde),
            "cp" | "crop_progress" => Ok(ReportType::CropProgress),
            "gs" | "grain_stocks" => Ok(ReportType::GrainStocks),
            "cf" | "cattle_on_feed" => Ok(ReportType::CattleOnFeed),
            other => Err(format!("unknown report type `{other}`")),
        }
    }
}

impl ReportType {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReportType::Wasde => "wasde",
            ReportType::CropProgress => "crop_progress",
            ReportType::GrainStocks => "grain_stocks",
            ReportType::CattleOnFeed => "cattle_on_feed",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Regressor {
    Volumeshare,
    Expiration,
    #[serde(rename = "Expiration^2")]
    ExpirationSquared,
    Backwardation,
    /// WASDE or Crop Progress release day.
    #[serde(rename = "WASDE&CP")]
    WasdeCp,
    Grainstocks,
    /// Trading day after a Cattle on Feed release.
    #[serde(rename = "CF")]
    CattleOnFeed,
    Crash,
    Stationarity,
}

impl Regressor {
    pub const ALL: [Regressor; 9] = [
        Regressor::Volumeshare,
        Regressor::Expiration,
        Regressor::ExpirationSquared,
        Regressor::Backwardation,
        Regressor::WasdeCp,
        Regressor::Grainstocks,
        Regressor::CattleOnFeed,
        Regressor::Crash,
        Regressor::Stationarity,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Regressor::Volumeshare => "Volumeshare",
            Regressor::Expiration => "Expiration",
            Regressor::ExpirationSquared => "Expiration^2",
            Regressor::Backwardation => "Backwardation",
            Regressor::WasdeCp => "WASDE&CP",
            Regressor::Grainstocks => "Grainstocks",
            Regressor::CattleOnFeed => "CF",
            Regressor::Crash => "Crash",
            Regressor::Stationarity => "Stationarity",
        }
    }
}

impl FromStr for Regressor {
    type Err = RegressionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Regressor::ALL
            .into_iter()
            .find(|r| r.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| RegressionError::UnknownRegressor(s.to_string()))
    }
}

/// Regressor sets for grain-style and cattle-style markets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Template {
    Corn,
    Cattle,
    Custom(Vec<Regressor>),
}

impl Template {
    pub fn regressors(&self) -> Vec<Regressor> {
        use Regressor::*;
        match self {
            Template::Corn => vec![
                Volumeshare,
                Expiration,
                ExpirationSquared,
                Backwardation,
                WasdeCp,
                Grainstocks,
                Crash,
                Stationarity,
            ],
            Template::Cattle => vec![
                Volumeshare,
                Expiration,
                ExpirationSquared,
                Backwardation,
                CattleOnFeed,
                Crash,
                Stationarity,
            ],
            Template::Custom(list) => list.clone(),
        }
    }
}

/// Report release dates and crash windows.
///
/// Grain report dummies fire on the release date; the Cattle on Feed dummy
/// fires on the next business day after release.
#[derive(Clone, Debug, Default)]
pub struct EventCalendar {
    business: BusinessCalendar,
    reports: BTreeMap<ReportType, BTreeSet<NaiveDate>>,
    crash_windows: Vec<(NaiveDate, NaiveDate)>,
}

impl EventCalendar {
    pub fn new(business: BusinessCalendar) -> Self {
        EventCalendar { business, ..Default::default() }
    }

    pub fn add_report(&mut self, report: ReportType, date: NaiveDate) {
        self.reports.entry(report).or_default().insert(date);
    }

    /// Inclusive crash window.
    pub fn add_crash_window(&mut self, start: NaiveDate, end: NaiveDate) {
        self.crash_windows.push((start, end));
    }

    /// Reads a `date,report_type` CSV into the calendar.
    pub fn read_reports<R: Read>(&mut self, source: R) -> Result<(), RegressionError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
        let err = |line: usize, message: String| RegressionError::ReportCalendar { line, message };
        let headers = reader.headers().map_err(|e| err(1, e.to_string()))?.clone();
        if headers.iter().ne(["date", "report_type"]) {
            return Err(err(1, "expected header `date,report_type`".into()));
        }
        for (i, rec) in reader.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| err(line, e.to_string()))?;
            if rec.len() != 2 {
                return Err(err(line, format!("expected 2 fields, found {}", rec.len())));
            }
            let date = rec[0].parse().map_err(|_| err(line, format!("invalid date `{}`", &rec[0])))?;
            let report = rec[1].parse().map_err(|m| err(line, m))?;
            self.add_report(report, date);
        }
        Ok(())
    }

    pub fn has_report(&self, report: ReportType) -> bool {
        self.reports.get(&report).is_some_and(|d| !d.is_empty())
    }

    fn released(&self, report: ReportType, date: NaiveDate) -> bool {
        self.reports.get(&report).is_some_and(|d| d.contains(&date))
    }

    /// Whether any report is released on `date`.
    pub fn is_report_day(&self, date: NaiveDate) -> bool {
        self.reports.values().any(|d| d.contains(&date))
    }

    pub fn in_crash(&self, date: NaiveDate) -> bool {
        self.crash_windows.iter().any(|&(a, b)| a <= date && date <= b)
    }

    /// Value of a calendar dummy on `date`; `None` for non-calendar regressors.
    pub fn dummy(&self, regressor: Regressor, date: NaiveDate) -> Option<bool> {
        Some(match regressor {
            Regressor::WasdeCp => {
                self.released(ReportType::Wasde, date) || self.released(ReportType::CropProgress, date)
            }
            Regressor::Grainstocks => self.released(ReportType::GrainStocks, date),
            Regressor::CattleOnFeed => self.reports.get(&ReportType::CattleOnFeed).is_some_and(|days| {
                days.iter().any(|&release| self.business.next_business_day(release) == date)
            }),
            Regressor::Crash => self.in_crash(date),
            _ => return None,
        })
    }
}

/// Materialised regression for one commodity pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Design {
    pub commodity: String,
    pub pair_index: u8,
    pub dates: Vec<NaiveDate>,
    pub y: DVector<f64>,
    /// Intercept in column 0, then `regressors` in order.
    pub x: DMatrix<f64>,
    pub regressors: Vec<Regressor>,
    /// Requested regressors left out because they were constant.
    pub dropped: Vec<Regressor>,
    pub warnings: Vec<String>,
}

impl Design {
    pub fn column_names(&self) -> Vec<String> {
        std::iter::once("Constant".to_string())
            .chain(self.regressors.iter().map(|r| r.label().to_string()))
            .collect()
    }
}

fn value(row: &DiscoveryShares, regressor: Regressor, calendar: &EventCalendar) -> f64 {
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    let dte = f64::from(row.days_to_expiration);
    match regressor {
        Regressor::Volumeshare => row.volume_share,
        Regressor::Expiration => dte,
        Regressor::ExpirationSquared => dte * dte,
        Regressor::Backwardation => flag(row.backwardation),
        Regressor::Stationarity => flag(row.category == RankCategory::Stationarity),
        calendar_dummy => flag(calendar.dummy(calendar_dummy, row.session_date).unwrap_or(false)),
    }
}

/// Builds `y` (combined share) and `X` for one pair's days.
///
/// Days without a combined share are dropped and the rest are sorted by date.
/// A regressor that is constant over the remaining days is removed with a
/// warning, since it would be collinear with the intercept.
pub fn build_design(
    shares: &[DiscoveryShares],
    calendar: &EventCalendar,
    regressors: &[Regressor],
) -> Result<Design, RegressionError> {
    let mut rows: Vec<&DiscoveryShares> = shares.iter().filter(|r| r.combined_ps.is_some()).collect();
    let first = *rows.first().ok_or(RegressionError::EmptySample)?;
    if let Some(other) =
        rows.iter().find(|r| r.commodity != first.commodity || r.pair_index != first.pair_index)
    {
        return Err(RegressionError::MixedPairs(format!(
            "{} pair {} and {} pair {}",
            first.commodity, first.pair_index, other.commodity, other.pair_index
        )));
    }
    rows.sort_by_key(|r| r.session_date);

    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut warnings = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for &reg in regressors {
        if kept.contains(&reg) {
            continue;
        }
        let col: Vec<f64> = rows.iter().map(|r| value(r, reg, calendar)).collect();
        if col.iter().all(|&v| v == col[0]) {
            warnings.push(format!(
                "{} pair {}: {} is constant over the sample and was dropped",
                first.commodity,
                first.pair_index,
                reg.label()
            ));
            dropped.push(reg);
            continue;
        }
        kept.push(reg);
        columns.push(col);
    }
    let n = rows.len();
    let x = DMatrix::from_fn(n, kept.len() + 1, |i, j| if j == 0 { 1.0 } else { columns[j - 1][i] });
    let y = DVector::from_iterator(n, rows.iter().map(|r| r.combined_ps.unwrap()));
    Ok(Design {
        commodity: first.commodity.clone(),
        pair_index: first.pair_index,
        dates: rows.iter().map(|r| r.session_date).collect(),
        y,
        x,
        regressors: kept,
        dropped,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn row(date: NaiveDate, ps: Option<f64>, dte: u32) -> DiscoveryShares {
        DiscoveryShares {
            session_date: date,
            commodity: "LE".into(),
            pair_index: 1,
            category: if ps.is_some() { RankCategory::Cointegration } else { RankCategory::NonCointegration },
            gs1: None,
            cs1: None,
            is1: None,
            ils1: ps,
            combined_ps: ps,
            volume_share: 0.5 + f64::from(dte) / 100.0,
            days_to_expiration: dte,
            backwardation: dte % 2 == 0,
            reasons: vec![],
        }
    }

    #[test]
    fn cattle_on_feed_fires_next_business_day() {
        let mut cal = EventCalendar::new(BusinessCalendar::default());
        // Friday release.
        cal.add_report(ReportType::CattleOnFeed, d(2015, 1, 23));
        assert_eq!(cal.dummy(Regressor::CattleOnFeed, d(2015, 1, 23)), Some(false));
        assert_eq!(cal.dummy(Regressor::CattleOnFeed, d(2015, 1, 26)), Some(true));
        cal.add_report(ReportType::Wasde, d(2015, 1, 12));
        assert_eq!(cal.dummy(Regressor::WasdeCp, d(2015, 1, 12)), Some(true));
        assert_eq!(cal.dummy(Regressor::Volumeshare, d(2015, 1, 12)), None);
    }

    #[test]
    fn reports_csv_round() {
        let mut cal = EventCalendar::default();
        cal.read_reports("date,report_type\n2015-01-12,WASDE\n2015-01-12,crop_progress\n".as_bytes())
            .unwrap();
        assert!(cal.has_report(ReportType::Wasde) && cal.has_report(ReportType::CropProgress));
        let e = cal.read_reports("date,report_type\n2015-01-12,rain\n".as_bytes()).unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn absent_shares_are_excluded_and_constants_dropped() {
        let mut cal = EventCalendar::new(BusinessCalendar::default());
        cal.add_report(ReportType::CattleOnFeed, d(2015, 1, 2));
        let shares = vec![
            row(d(2015, 1, 7), Some(0.6), 3),
            row(d(2015, 1, 5), Some(0.4), 5),
            row(d(2015, 1, 6), None, 4),
            row(d(2015, 1, 8), Some(0.7), 2),
        ];
        let design = build_design(&shares, &cal, &Template::Cattle.regressors()).unwrap();
        assert_eq!(design.dates, vec![d(2015, 1, 5), d(2015, 1, 7), d(2015, 1, 8)]);
        assert_eq!(design.y.as_slice(), &[0.4, 0.6, 0.7]);
        // CF fires on Jan 5 only; Crash and Stationarity never vary.
        assert_eq!(design.dropped, vec![Regressor::Crash, Regressor::Stationarity]);
        assert_eq!(design.warnings.len(), 2);
        let names = design.column_names();
        let col = |name: &str| names.iter().position(|n| n == name).unwrap();
        assert_eq!(design.x[(0, col("CF"))], 1.0);
        for i in 0..3 {
            let e = design.x[(i, col("Expiration"))];
            assert_eq!(design.x[(i, col("Expiration^2"))], e * e);
        }
    }

    #[test]
    fn regressor_names_parse() {
        assert_eq!("wasde&cp".parse::<Regressor>().unwrap(), Regressor::WasdeCp);
        assert!("rain".parse::<Regressor>().is_err());
    }
}
