use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::{
    component_share, gs_share, information_leadership_share, information_share, DiscoveryShares,
    Exclusion, GsFit, InformationShare, ReasonCode,
};
use crate::econ::{
    estimate_vecm, johansen_trace_with, select_lag, trace_critical_values, EconError, LagSelection,
    RankCategory, RankDecision, VecmFit, TRACE_CRITICAL_5PCT,
};
use crate::market_data::{is_estimable, ContractPairDay, DEFAULT_MIN_UPDATES};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Observed price changes required on each leg.
    pub min_updates: usize,
    pub lag_min: usize,
    pub lag_max: usize,
    /// Level of the trace tests: 0.10, 0.05 or 0.01.
    pub significance: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { min_updates: DEFAULT_MIN_UPDATES, lag_min: 1, lag_max: 10, significance: 0.05 }
    }
}

impl PipelineConfig {
    pub fn lag_range(&self) -> RangeInclusive<usize> {
        self.lag_min..=self.lag_max
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.lag_min == 0 || self.lag_min > self.lag_max || self.lag_max > 50 {
            return Err(format!(
                "lag range {}..={} must satisfy 1 <= lag_min <= lag_max <= 50",
                self.lag_min, self.lag_max
            ));
        }
        if trace_critical_values(self.significance).is_none() {
            return Err(format!("significance {} must be one of 0.10, 0.05, 0.01", self.significance));
        }
        Ok(())
    }

    fn critical_values(&self) -> [f64; 2] {
        trace_critical_values(self.significance).unwrap_or(TRACE_CRITICAL_5PCT)
    }
}

/// Full estimation record for one pair of price series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DayEstimate {
    pub lag_selection: LagSelection,
    pub decision: RankDecision,
    pub gs: Option<GsFit>,
    pub vecm: Option<VecmFit>,
    pub gs1: Option<f64>,
    /// `(cs1, cs2)` after clamping to `[0, 1]`.
    pub cs: Option<[f64; 2]>,
    pub is: Option<InformationShare>,
    pub ils: Option<[f64; 2]>,
    pub combined_ps: Option<f64>,
    pub reasons: Vec<ReasonCode>,
}

impl DayEstimate {
    pub fn category(&self) -> RankCategory {
        self.decision.category
    }
}

fn cointegration_shares(fit: &VecmFit, est: &mut DayEstimate) {
    let cs = match component_share(fit.alpha) {
        Ok(cs) => cs,
        Err(reason) => {
            est.reasons.push(reason);
            return;
        }
    };
    let cs = if (0.0..=1.0).contains(&cs[0]) {
        cs
    } else {
        est.reasons.push(ReasonCode::CsClamped);
        let c1 = cs[0].clamp(0.0, 1.0);
        [c1, 1.0 - c1]
    };
    est.cs = Some(cs);
    let is = match information_share(fit.sigma, cs) {
        Ok(is) => is,
        Err(reason) => {
            est.reasons.push(reason);
            return;
        }
    };
    est.is = Some(is);
    match information_leadership_share([is.is1, is.is2], cs) {
        Ok(ils) => {
            est.ils = Some(ils);
            est.combined_ps = Some(ils[0]);
        }
        Err(reason) => est.reasons.push(reason),
    }
}

/// Classifies a price pair and computes the shares its category calls for:
/// Garbade-Silber on stationary days; component, information and information
/// leadership shares on cointegrated days; nothing otherwise.
///
/// The VECM lag is chosen by BIC and the trace test uses the same lag.
pub fn estimate_day(p1: &[f64], p2: &[f64], cfg: &PipelineConfig) -> Result<DayEstimate, EconError> {
    let lag_selection = select_lag(p1, p2, cfg.lag_range())?;
    let decision = johansen_trace_with(p1, p2, lag_selection.lag, cfg.critical_values())?;
    let mut est = DayEstimate {
        lag_selection,
        decision,
        gs: None,
        vecm: None,
        gs1: None,
        cs: None,
        is: None,
        ils: None,
        combined_ps: None,
        reasons: Vec::new(),
    };
    match est.decision.category {
        RankCategory::Stationarity => match gs_share(p1, p2) {
            Ok(fit) => {
                if fit.truncated.iter().any(|&t| t) {
                    est.reasons.push(ReasonCode::GsBetaTruncated);
                }
                match fit.gs1() {
                    Ok(g) => {
                        est.gs1 = Some(g);
                        est.combined_ps = Some(g);
                    }
                    Err(reason) => est.reasons.push(reason),
                }
                est.gs = Some(fit);
            }
            Err(_) => est.reasons.push(ReasonCode::GsNotEstimable),
        },
        RankCategory::Cointegration => match estimate_vecm(p1, p2, est.decision.lags) {
            Ok(fit) => {
                cointegration_shares(&fit, &mut est);
                est.vecm = Some(fit);
            }
            Err(_) => est.reasons.push(ReasonCode::VecmNotEstimable),
        },
        RankCategory::NonCointegration => {}
    }
    Ok(est)
}

/// Runs one estimable day-pair through classification and share computation.
/// Days that cannot be estimated come back as an [`Exclusion`] with a reason.
pub fn daily_pipeline(pair: &ContractPairDay, cfg: &PipelineConfig) -> Result<DiscoveryShares, Exclusion> {
    let exclude = |reason: String| Exclusion {
        session_date: pair.session_date,
        commodity: pair.commodity.clone(),
        pair_index: pair.pair_index,
        reason,
    };
    if !is_estimable(pair, cfg.min_updates) {
        let updates = pair.nearby_grid.price_updates().min(pair.deferred_grid.price_updates());
        return Err(exclude(format!(
            "too few price updates ({updates} < {} on at least one leg)",
            cfg.min_updates
        )));
    }
    let (p1, p2) = pair.series();
    let est = estimate_day(&p1, &p2, cfg).map_err(|e| exclude(e.to_string()))?;
    Ok(DiscoveryShares {
        session_date: pair.session_date,
        commodity: pair.commodity.clone(),
        pair_index: pair.pair_index,
        category: est.category(),
        gs1: est.gs1,
        cs1: est.cs.map(|c| c[0]),
        is1: est.is.map(|i| i.is1),
        ils1: est.ils.map(|i| i[0]),
        combined_ps: est.combined_ps,
        volume_share: pair.volume_share,
        days_to_expiration: pair.days_to_expiration,
        backwardation: pair.backwardation,
        reasons: est.reasons,
    })
}
