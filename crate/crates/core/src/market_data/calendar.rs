use std::collections::BTreeSet;

use chrono::{Datelike, NaiveDate, NaiveTime, Timelike, Weekday};
use serde::{Deserialize, Serialize};

use super::{ContractId, MarketDataError};

/// Day-session trading hours, inclusive at both ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SessionSpec", into = "SessionSpec")]
pub struct SessionWindow {
    start: NaiveTime,
    end: NaiveTime,
}

#[derive(Serialize, Deserialize)]
struct SessionSpec {
    start: String,
    end: String,
}

impl TryFrom<SessionSpec> for SessionWindow {
    type Error = String;

    fn try_from(spec: SessionSpec) -> Result<Self, Self::Error> {
        let parse = |s: &str| {
            NaiveTime::parse_from_str(s, "%H:%M:%S")
                .or_else(|_| NaiveTime::parse_from_str(s, "%H:%M"))
                .map_err(|_| format!("invalid session time `{s}`"))
        };
        SessionWindow::new(parse(&spec.start)?, parse(&spec.end)?).map_err(|e| e.to_string())
    }
}

impl From<SessionWindow> for SessionSpec {
    fn from(w: SessionWindow) -> Self {
        SessionSpec {
            start: w.start.format("%H:%M:%S").to_string(),
            end: w.end.format("%H:%M:%S").to_string(),
        }
    }
}

impl SessionWindow {
    pub fn new(start: NaiveTime, end: NaiveTime) -> Result<Self, MarketDataError> {
        if end <= start {
            return Err(MarketDataError::Calendar(format!("session end {end} not after start {start}")));
        }
        Ok(SessionWindow { start: start.with_nanosecond(0).unwrap(), end: end.with_nanosecond(0).unwrap() })
    }

    /// Session of `seconds` length starting at `start`.
    pub fn with_length(start: NaiveTime, seconds: u32) -> Result<Self, MarketDataError> {
        let end_second = start.num_seconds_from_midnight() + seconds.saturating_sub(1);
        let end = NaiveTime::from_num_seconds_from_midnight_opt(end_second, 0)
            .ok_or_else(|| MarketDataError::Calendar(format!("session of {seconds}s overflows the day")))?;
        SessionWindow::new(start, end)
    }

    pub fn start(&self) -> NaiveTime {
        self.start
    }

    pub fn end(&self) -> NaiveTime {
        self.end
    }

    pub fn start_second(&self) -> u32 {
        self.start.num_seconds_from_midnight()
    }

    pub fn end_second(&self) -> u32 {
        self.end.num_seconds_from_midnight()
    }

    pub fn seconds(&self) -> u32 {
        self.end_second() - self.start_second() + 1
    }
}

/// Weekdays minus exchange holidays.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusinessCalendar {
    #[serde(default)]
    pub holidays: BTreeSet<NaiveDate>,
}

impl BusinessCalendar {
    pub fn new(holidays: impl IntoIterator<Item = NaiveDate>) -> Self {
        BusinessCalendar { holidays: holidays.into_iter().collect() }
    }

    pub fn is_business_day(&self, date: NaiveDate) -> bool {
        !matches!(date.weekday(), Weekday::Sat | Weekday::Sun) && !self.holidays.contains(&date)
    }

    pub fn next_business_day(&self, date: NaiveDate) -> NaiveDate {
        let mut d = date.succ_opt().expect("date in range");
        while !self.is_business_day(d) {
            d = d.succ_opt().expect("date in range");
        }
        d
    }

    pub fn previous_business_day(&self, date: NaiveDate) -> NaiveDate {
        let mut d = date.pred_opt().expect("date in range");
        while !self.is_business_day(d) {
            d = d.pred_opt().expect("date in range");
        }
        d
    }

    /// Business days in `(from, to]`; zero when `to <= from`.
    pub fn business_days_between(&self, from: NaiveDate, to: NaiveDate) -> u32 {
        let mut count = 0;
        let mut d = from;
        while d < to {
            d = d.succ_opt().expect("date in range");
            if self.is_business_day(d) {
                count += 1;
            }
        }
        count
    }

    /// `count` consecutive business days starting at the first one on or after `from`.
    pub fn business_days_from(&self, from: NaiveDate, count: usize) -> Vec<NaiveDate> {
        let mut out = Vec::with_capacity(count);
        let mut d = from;
        if !self.is_business_day(d) {
            d = self.next_business_day(d);
        }
        while out.len() < count {
            out.push(d);
            d = self.next_business_day(d);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpirationRule {
    /// Last business day strictly before the 15th of the delivery month (corn).
    BusinessDayBefore15th,
    /// Last business day of the delivery month (live cattle).
    LastBusinessDay,
}

impl ExpirationRule {
    pub fn expiration(&self, year: i32, month: u32, calendar: &BusinessCalendar) -> NaiveDate {
        let anchor = match self {
            ExpirationRule::BusinessDayBefore15th => NaiveDate::from_ymd_opt(year, month, 15),
            ExpirationRule::LastBusinessDay => {
                let (y, m) = if month == 12 { (year + 1, 1) } else { (year, month + 1) };
                NaiveDate::from_ymd_opt(y, m, 1)
            }
        }
        .expect("valid delivery month");
        calendar.previous_business_day(anchor)
    }
}

/// Static description of one futures market.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Commodity {
    pub symbol: String,
    #[serde(default)]
    pub name: String,
    pub delivery_months: Vec<u32>,
    pub expiration_rule: ExpirationRule,
    pub session: SessionWindow,
}

impl Commodity {
    pub fn corn() -> Self {
        Commodity {
            symbol: "ZC".to_string(),
            name: "corn".to_string(),
            delivery_months: vec![3, 5, 7, 9, 12],
            expiration_rule: ExpirationRule::BusinessDayBefore15th,
            session: SessionWindow::new(
                NaiveTime::from_hms_opt(9, 30, 0).unwrap(),
                NaiveTime::from_hms_opt(13, 15, 0).unwrap(),
            )
            .unwrap(),
        }
    }

    pub fn live_cattle() -> Self {
        Commodity {
            symbol: "LE".to_string(),
            name: "live cattle".to_string(),
            delivery_months: vec![2, 4, 6, 8, 10, 12],
            expiration_rule: ExpirationRule::LastBusinessDay,
            session: SessionWindow::new(
                NaiveTime::from_hms_opt(9, 5, 0).unwrap(),
                NaiveTime::from_hms_opt(13, 0, 0).unwrap(),
            )
            .unwrap(),
        }
    }

    pub fn validate(&self) -> Result<(), MarketDataError> {
        if self.symbol.is_empty() || self.symbol.contains('_') {
            return Err(MarketDataError::Calendar(format!("invalid symbol `{}`", self.symbol)));
        }
        let mut months = self.delivery_months.clone();
        months.sort_unstable();
        months.dedup();
        if months.is_empty() || months.len() != self.delivery_months.len() || months.iter().any(|m| !(1..=12).contains(m)) {
            return Err(MarketDataError::Calendar(format!(
                "{}: delivery months must be distinct values in 1..=12",
                self.symbol
            )));
        }
        Ok(())
    }
}

/// Contract expirations for one commodity, in delivery order.
///
/// A contract is the nearby from the business day after the previous
/// contract's expiration through its own expiration day, so the nearby
/// intervals partition the calendar.
#[derive(Clone, Debug)]
pub struct RollCalendar {
    commodity: Commodity,
    business: BusinessCalendar,
    contracts: Vec<(ContractId, NaiveDate)>,
}

impl RollCalendar {
    /// Lists contracts expiring between `from` and well past `to`.
    pub fn new(commodity: &Commodity, business: &BusinessCalendar, from: NaiveDate, to: NaiveDate) -> Self {
        let mut months = commodity.delivery_months.clone();
        months.sort_unstable();
        let mut contracts = Vec::new();
        for year in (from.year() - 1)..=(to.year() + 3) {
            for &month in &months {
                let id = ContractId::new(commodity.symbol.clone(), year, month);
                let exp = commodity.expiration_rule.expiration(year, month, business);
                contracts.push((id, exp));
            }
        }
        RollCalendar { commodity: commodity.clone(), business: business.clone(), contracts }
    }

    pub fn commodity(&self) -> &Commodity {
        &self.commodity
    }

    pub fn business(&self) -> &BusinessCalendar {
        &self.business
    }

    pub fn expiration(&self, contract: &ContractId) -> Option<NaiveDate> {
        self.contracts.iter().find(|(id, _)| id == contract).map(|(_, d)| *d)
    }

    fn nearby_index(&self, date: NaiveDate) -> Option<usize> {
        let idx = self.contracts.partition_point(|(_, exp)| *exp < date);
        (idx < self.contracts.len() && idx > 0).then_some(idx)
    }

    /// Contract at curve position `position` on `date` (0 = nearby, k = deferred-k).
    pub fn contract_at(&self, date: NaiveDate, position: usize) -> Option<&ContractId> {
        let idx = self.nearby_index(date)? + position;
        self.contracts.get(idx).map(|(id, _)| id)
    }

    pub fn nearby(&self, date: NaiveDate) -> Option<&ContractId> {
        self.contract_at(date, 0)
    }

    /// Position of `contract` on the curve at `date`, if it is listed within range.
    pub fn position_of(&self, date: NaiveDate, contract: &ContractId) -> Option<usize> {
        let nearby = self.nearby_index(date)?;
        let idx = self.contracts.iter().position(|(id, _)| id == contract)?;
        idx.checked_sub(nearby)
    }

    /// Business days from `date` to the nearby's expiration (0 on expiration day).
    pub fn days_to_expiration(&self, date: NaiveDate) -> Option<u32> {
        let idx = self.nearby_index(date)?;
        Some(self.business.business_days_between(date, self.contracts[idx].1))
    }

    /// Nearby interval `(previous expiration, expiration]` of `contract`.
    pub fn nearby_interval(&self, contract: &ContractId) -> Option<(NaiveDate, NaiveDate)> {
        let idx = self.contracts.iter().position(|(id, _)| id == contract)?;
        let previous = self.contracts.get(idx.checked_sub(1)?)?.1;
        Some((previous, self.contracts[idx].1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn corn_expires_business_day_before_15th() {
        let cal = BusinessCalendar::default();
        // 2015-03-15 is a Sunday; the 13th is a Friday.
        assert_eq!(ExpirationRule::BusinessDayBefore15th.expiration(2015, 3, &cal), d(2015, 3, 13));
        // 2015-09-15 is a Tuesday.
        assert_eq!(ExpirationRule::BusinessDayBefore15th.expiration(2015, 9, &cal), d(2015, 9, 14));
        let with_holiday = BusinessCalendar::new([d(2015, 9, 14)]);
        assert_eq!(
            ExpirationRule::BusinessDayBefore15th.expiration(2015, 9, &with_holiday),
            d(2015, 9, 11)
        );
    }

    #[test]
    fn cattle_expires_last_business_day() {
        let cal = BusinessCalendar::default();
        // 2015-02-28 is a Saturday.
        assert_eq!(ExpirationRule::LastBusinessDay.expiration(2015, 2, &cal), d(2015, 2, 27));
        assert_eq!(ExpirationRule::LastBusinessDay.expiration(2015, 12, &cal), d(2015, 12, 31));
    }

    #[test]
    fn corn_pairs_follow_delivery_cycle() {
        let cal = BusinessCalendar::default();
        let roll = RollCalendar::new(&Commodity::corn(), &cal, d(2015, 1, 1), d(2015, 12, 31));
        let date = d(2015, 1, 20);
        assert_eq!(roll.nearby(date).unwrap().to_string(), "ZC_2015H");
        assert_eq!(roll.contract_at(date, 1).unwrap().to_string(), "ZC_2015K");
        assert_eq!(roll.contract_at(date, 4).unwrap().to_string(), "ZC_2015Z");
        // Still nearby on its expiration day, rolled the next business day.
        assert_eq!(roll.nearby(d(2015, 3, 13)).unwrap().to_string(), "ZC_2015H");
        assert_eq!(roll.nearby(d(2015, 3, 16)).unwrap().to_string(), "ZC_2015K");
        assert_eq!(roll.days_to_expiration(d(2015, 3, 13)), Some(0));
        assert_eq!(roll.days_to_expiration(d(2015, 3, 12)), Some(1));
        assert_eq!(roll.days_to_expiration(d(2015, 3, 6)), Some(5));
    }

    #[test]
    fn nearby_intervals_partition_the_sample() {
        let cal = BusinessCalendar::new([d(2015, 7, 3)]);
        let roll = RollCalendar::new(&Commodity::live_cattle(), &cal, d(2015, 1, 1), d(2016, 12, 31));
        let mut date = d(2015, 1, 1);
        while date <= d(2016, 12, 31) {
            let nearby = roll.nearby(date).unwrap();
            let (lo, hi) = roll.nearby_interval(nearby).unwrap();
            assert!(lo < date && date <= hi, "{date} outside ({lo}, {hi}] of {nearby}");
            let containing = roll
                .contracts
                .iter()
                .filter(|(id, _)| {
                    roll.nearby_interval(id).is_some_and(|(lo, hi)| lo < date && date <= hi)
                })
                .count();
            assert_eq!(containing, 1);
            date = date.succ_opt().unwrap();
        }
    }

    #[test]
    fn business_day_counting() {
        let cal = BusinessCalendar::new([d(2015, 12, 25)]);
        assert_eq!(cal.business_days_between(d(2015, 12, 21), d(2015, 12, 28)), 4);
        assert_eq!(cal.business_days_between(d(2015, 12, 28), d(2015, 12, 21)), 0);
        assert_eq!(cal.next_business_day(d(2015, 12, 24)), d(2015, 12, 28));
        assert_eq!(cal.business_days_from(d(2015, 12, 26), 2), vec![d(2015, 12, 28), d(2015, 12, 29)]);
    }
}
