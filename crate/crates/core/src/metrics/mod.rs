//! Daily price discovery shares and their aggregation.

mod aggregate;
mod daily;
mod gs;
mod pipeline;
mod shares;

pub use aggregate::{
    aggregate_shares, CategoryRow, NearbyProfileRow, PairSummary, SummaryTables,
};
pub use daily::{read_daily_csv, write_daily_csv, DiscoveryShares, Exclusion, DAILY_HEADER};
pub use gs::{gs_share, GsFit};
pub use pipeline::{daily_pipeline, estimate_day, DayEstimate, PipelineConfig};
pub use shares::{
    cholesky_2x2, component_share, information_leadership_share, information_share,
    information_share_ordered, InformationShare,
};

use serde::{Deserialize, Serialize};

/// Why a share is missing or was adjusted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasonCode {
    /// Both Garbade-Silber adjustment coefficients are zero after truncation.
    GsNoAdjustment,
    /// A negative Garbade-Silber coefficient was set to zero.
    GsBetaTruncated,
    GsNotEstimable,
    /// Equal error-correction coefficients.
    CsDegenerate,
    /// Component share fell outside `[0, 1]` and was clamped.
    CsClamped,
    /// Residual covariance is not positive definite.
    IsSingularCovariance,
    /// Both information leadership terms are zero.
    IlsUndefined,
    VecmNotEstimable,
}

impl ReasonCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReasonCode::GsNoAdjustment => "gs_no_adjustment",
            ReasonCode::GsBetaTruncated => "gs_beta_truncated",
            ReasonCode::GsNotEstimable => "gs_not_estimable",
            ReasonCode::CsDegenerate => "cs_degenerate",
            ReasonCode::CsClamped => "cs_clamped",
            ReasonCode::IsSingularCovariance => "is_singular_covariance",
            ReasonCode::IlsUndefined => "ils_undefined",
            ReasonCode::VecmNotEstimable => "vecm_not_estimable",
        }
    }
}

impl std::fmt::Display for ReasonCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
