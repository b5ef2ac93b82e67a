use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::OlsFit;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bandwidth {
    /// Newey-West (1994) plug-in rule for the Bartlett kernel.
    Auto,
    Fixed(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HacMethod {
    #[serde(rename = "newey-west-1994-automatic")]
    NeweyWest1994Automatic,
    #[serde(rename = "newey-west-fixed")]
    Fixed,
}

#[derive(Clone, Debug)]
pub struct HacCovariance {
    pub covariance: DMatrix<f64>,
    pub bandwidth: usize,
    pub method: HacMethod,
}

impl HacCovariance {
    pub fn std_errors(&self) -> DVector<f64> {
        self.covariance.diagonal().map(|v| v.max(0.0).sqrt())
    }
}

fn scores(x: &DMatrix<f64>, residuals: &DVector<f64>) -> DMatrix<f64> {
    let mut h = x.clone();
    for (mut row, e) in h.row_iter_mut().zip(residuals.iter()) {
        row *= *e;
    }
    h
}

fn is_intercept(column: nalgebra::DVectorView<'_, f64>) -> bool {
    let first = column[0];
    first != 0.0 && column.iter().all(|&v| v == first)
}

/// Automatic lag length for the Bartlett kernel.
///
/// The scores are collapsed to `f_t = sum_j h_tj` over non-constant columns
/// (all columns when the design is intercept-only), a pilot of
/// `floor(4 (T/100)^{2/9})` autocovariances gives `s0` and `s1`, and the lag is
/// `floor(1.1447 (s1/s0)^{2/3} T^{1/3})`, capped at `T - 1`.
pub fn newey_west_bandwidth(x: &DMatrix<f64>, residuals: &DVector<f64>) -> usize {
    let t = x.nrows();
    if t < 2 {
        return 0;
    }
    let h = scores(x, residuals);
    let mut weights: Vec<f64> =
        x.column_iter().map(|c| if is_intercept(c) { 0.0 } else { 1.0 }).collect();
    if weights.iter().all(|&w| w == 0.0) {
        weights.iter_mut().for_each(|w| *w = 1.0);
    }
    let f: Vec<f64> = h
        .row_iter()
        .map(|row| row.iter().zip(&weights).map(|(v, w)| v * w).sum())
        .collect();
    let pilot = ((4.0 * (t as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize).min(t - 1);
    let autocov = |j: usize| f[j..].iter().zip(&f[..t - j]).map(|(a, b)| a * b).sum::<f64>() / t as f64;
    let mut s0 = autocov(0);
    let mut s1 = 0.0;
    for j in 1..=pilot {
        let sigma = autocov(j);
        s0 += 2.0 * sigma;
        s1 += 2.0 * j as f64 * sigma;
    }
    if s0 <= 0.0 || !s0.is_finite() {
        return 0;
    }
    let gamma = 1.1447 * ((s1 / s0).powi(2)).powf(1.0 / 3.0);
    let lag = (gamma * (t as f64).powf(1.0 / 3.0)).floor();
    if lag.is_finite() {
        (lag as usize).min(t - 1)
    } else {
        0
    }
}

/// Bartlett-kernel HAC covariance of OLS coefficients,
/// `(X'X)^{-1} S (X'X)^{-1}` with `S = sum_{|j| <= L} (1 - |j|/(L+1)) Gamma_j`.
///
/// Rows must be in time order. No degrees-of-freedom scaling is applied, so a
/// zero bandwidth gives White's HC0 covariance.
pub fn newey_west(x: &DMatrix<f64>, fit: &OlsFit, bandwidth: Bandwidth) -> HacCovariance {
    let (lag, method) = match bandwidth {
        Bandwidth::Auto => (newey_west_bandwidth(x, &fit.residuals), HacMethod::NeweyWest1994Automatic),
        Bandwidth::Fixed(l) => (l.min(x.nrows().saturating_sub(1)), HacMethod::Fixed),
    };
    let h = scores(x, &fit.residuals);
    let t = h.nrows();
    let mut s = h.transpose() * &h;
    for j in 1..=lag {
        let weight = 1.0 - j as f64 / (lag as f64 + 1.0);
        let lead = h.rows(j, t - j);
        let lagged = h.rows(0, t - j);
        let gamma = lead.transpose() * lagged;
        s += (&gamma + gamma.transpose()) * weight;
    }
    let mut covariance = &fit.xtx_inv * s * &fit.xtx_inv;
    covariance = (&covariance + covariance.transpose()) * 0.5;
    HacCovariance { covariance, bandwidth: lag, method }
}
