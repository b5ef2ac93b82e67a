//! Tick ingestion, one-second aggregation, roll calendars and contract pairing.

mod calendar;
mod grid;
mod pair;
mod price;
mod ticks;

pub use calendar::{BusinessCalendar, Commodity, ExpirationRule, RollCalendar, SessionWindow};
pub use grid::{build_second_grid, SecondGrid};
pub use pair::{
    is_estimable, pair_contracts, volume_share, CalendarFlags, ContractPairDay, PairContext,
    Settlements, DEFAULT_MIN_UPDATES,
};
pub use price::{ContractId, Price};
pub use ticks::{parse_ticks, write_ticks, TickRecord, TICK_HEADER};

use chrono::NaiveDate;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum MarketDataError {
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("bad header: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("invalid price `{0}`")]
    Price(String),
    #[error("invalid contract id `{0}`")]
    Contract(String),
    #[error("no trades for {contract} in the {date} session")]
    EmptySession { contract: String, date: NaiveDate },
    #[error("ticks mix {0}")]
    MixedInput(String),
    #[error("no {which} contract for {date}: {reason}")]
    MissingContract {
        which: &'static str,
        date: NaiveDate,
        reason: String,
    },
    #[error("grids for {0} do not overlap")]
    NoOverlap(NaiveDate),
    #[error("calendar: {0}")]
    Calendar(String),
}
