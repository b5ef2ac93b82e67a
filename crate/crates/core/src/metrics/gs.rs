use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::ReasonCode;
use crate::econ::{ols, EconError};

/// Garbade-Silber lead-lag fit.
///
/// `dp1_t = alpha1 - beta1 (p1 - p2)_{t-1}` and
/// `dp2_t = alpha2 + beta2 (p1 - p2)_{t-1}`, so both coefficients are positive
/// when each price adjusts toward the other.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GsFit {
    pub alpha1: f64,
    pub alpha2: f64,
    /// After truncation at zero.
    pub beta1: f64,
    pub beta2: f64,
    pub raw_beta1: f64,
    pub raw_beta2: f64,
    pub truncated: [bool; 2],
}

impl GsFit {
    /// `gs1 = beta2 / (beta1 + beta2)`.
    pub fn gs1(&self) -> Result<f64, ReasonCode> {
        let total = self.beta1 + self.beta2;
        if total > 0.0 {
            Ok(self.beta2 / total)
        } else {
            Err(ReasonCode::GsNoAdjustment)
        }
    }
}

/// Estimates the lead-lag regressions on two price series and truncates
/// negative adjustment coefficients to zero.
pub fn gs_share(p1: &[f64], p2: &[f64]) -> Result<GsFit, EconError> {
    if p1.len() != p2.len() {
        return Err(EconError::Dimension(format!("series lengths {} and {}", p1.len(), p2.len())));
    }
    let n = p1.len().saturating_sub(1);
    let x = DMatrix::from_fn(n, 2, |t, j| if j == 0 { 1.0 } else { p1[t] - p2[t] });
    let d1 = DVector::from_fn(n, |t, _| p1[t + 1] - p1[t]);
    let d2 = DVector::from_fn(n, |t, _| p2[t + 1] - p2[t]);
    let f1 = ols(&d1, &x)?;
    let f2 = ols(&d2, &x)?;
    let raw_beta1 = -f1.coefficients[1];
    let raw_beta2 = f2.coefficients[1];
    Ok(GsFit {
        alpha1: f1.coefficients[0],
        alpha2: f2.coefficients[0],
        beta1: raw_beta1.max(0.0),
        beta2: raw_beta2.max(0.0),
        raw_beta1,
        raw_beta2,
        truncated: [raw_beta1 < 0.0, raw_beta2 < 0.0],
    })
}
