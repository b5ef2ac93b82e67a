//! Structural price simulator.
//!
//! Every contract tracks one random-walk fundamental value with its own delay
//! (in seconds) plus independent Gaussian noise. [`simulate_day`] produces one
//! pair of grids with known ground truth; [`simulate_sample`] composes days
//! into a multi-contract sample with rolls, volume migration, backwardation
//! spells, report-day jumps and crash windows, written in the tick CSV format.

mod scenario;
mod structural;

pub use scenario::{
    simulate_sample, CommoditySpec, CrashWindow, DateWindow, DayPlan, ExpiryRamp, FundamentalSpec, LegSchedule,
    Manifest, ReportEvent, ScenarioConfig, VolumeSchedule,
};
pub use structural::{simulate_day, GroundTruth, SimulatedDay, StructuralConfig};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum SyntheticError {
    #[error("invalid simulation config: {0}")]
    Invalid(String),
    #[error("writing {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    MarketData(#[from] crate::market_data::MarketDataError),
    #[error("manifest: {0}")]
    Json(#[from] serde_json::Error),
}
