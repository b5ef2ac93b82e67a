//! Econometric kernels: OLS, Newey-West HAC covariance, Johansen trace test
//! with a restricted constant, and bivariate VECM estimation.

mod hac;
mod johansen;
mod ols;
mod vecm;

pub use hac::{newey_west, newey_west_bandwidth, Bandwidth, HacCovariance, HacMethod};
pub use johansen::{
    classify_rank, johansen_trace, johansen_trace_with, trace_critical_values, RankCategory, RankDecision, TRACE_CRITICAL_5PCT,
};
pub use ols::{ols, OlsFit};
pub use vecm::{estimate_vecm, fit_vecm, select_lag, LagSelection, VecmFit, DEFAULT_LAG_RANGE};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum EconError {
    /// Zero-based indices of columns that are linear combinations of earlier ones.
    #[error("singular design: collinear columns {columns:?}")]
    SingularDesign { columns: Vec<usize> },
    #[error("need more observations than regressors ({rows} rows, {cols} columns)")]
    TooFewObservations { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("not estimable: {0}")]
    NonEstimable(String),
}
