use nalgebra::DVector;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{Design, RegressionError};
use crate::econ::{newey_west, ols, Bandwidth, EconError};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    /// Newey-West standard error.
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub stars: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegressionResult {
    pub commodity: String,
    pub pair_index: u8,
    pub coefficients: Vec<Coefficient>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub n_obs: usize,
    /// Bartlett lag chosen by the automatic rule.
    pub bandwidth: usize,
    pub dropped: Vec<String>,
    pub warnings: Vec<String>,
}

impl RegressionResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

/// `***` below 1%, `**` below 5%, `*` below 10%.
pub fn stars(p_value: f64) -> &'static str {
    if p_value < 0.01 {
        "***"
    } else if p_value < 0.05 {
        "**"
    } else if p_value < 0.1 {
        "*"
    } else {
        ""
    }
}

fn two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

/// OLS with Newey-West (automatic bandwidth) standard errors.
///
/// Rows of a [`Design`] are in date order, which the bandwidth rule relies on.
pub fn estimate(design: &Design) -> Result<RegressionResult, RegressionError> {
    let names = design.column_names();
    let (n, k) = design.x.shape();
    if n <= k {
        return Err(RegressionError::TooFewObservations { rows: n, cols: k });
    }
    let fit = ols(&design.y, &design.x).map_err(|e| match e {
        EconError::SingularDesign { columns } => {
            RegressionError::Singular(columns.iter().map(|&c| names[c].clone()).collect())
        }
        EconError::TooFewObservations { rows, cols } => RegressionError::TooFewObservations { rows, cols },
        other => RegressionError::Singular(vec![other.to_string()]),
    })?;
    let hac = newey_west(&design.x, &fit, Bandwidth::Auto);
    let se: DVector<f64> = hac.std_errors();
    let df = (n - k) as f64;
    let coefficients = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let (b, s) = (fit.coefficients[j], se[j]);
            let t_stat = if s > 0.0 { b / s } else if b == 0.0 { 0.0 } else { f64::INFINITY.copysign(b) };
            let p_value = two_sided_p(t_stat, df);
            Coefficient { name: name.clone(), estimate: b, std_error: s, t_stat, p_value, stars: stars(p_value) }
        })
        .collect();
    let mean = design.y.mean();
    let tss: f64 = design.y.iter().map(|v| (v - mean).powi(2)).sum();
    let r_squared = if tss > 0.0 { 1.0 - fit.rss / tss } else { 0.0 };
    let adj_r_squared = 1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / df;
    Ok(RegressionResult {
        commodity: design.commodity.clone(),
        pair_index: design.pair_index,
        coefficients,
        r_squared,
        adj_r_squared,
        n_obs: n,
        bandwidth: hac.bandwidth,
        dropped: design.dropped.iter().map(|r| r.label().to_string()).collect(),
        warnings: design.warnings.clone(),
    })
}
