//! Determinant regressions of the daily price discovery share.
//!
//! [`build_design`] turns one pair's daily shares into `y` and `X` for a
//! regressor [`Template`]; [`estimate`] fits OLS with Newey-West standard
//! errors; [`report_table`] lays results out one column per pair.

mod design;
mod estimate;
mod report;

pub use design::{build_design, Design, EventCalendar, ReportType, Regressor, Template};
pub use estimate::{estimate, stars, Coefficient, RegressionResult};
pub use report::{format_cell, report_table, ReportTable};

#[derive(Debug, thiserror::Error)]
pub enum RegressionError {
    #[error("no days with a defined price discovery share")]
    EmptySample,
    #[error("design mixes pairs: {0}")]
    MixedPairs(String),
    #[error("singular design: collinear columns {}", .0.join(", "))]
    Singular(Vec<String>),
    #[error("{rows} observations are too few for {cols} coefficients")]
    TooFewObservations { rows: usize, cols: usize },
    #[error("report calendar line {line}: {message}")]
    ReportCalendar { line: usize, message: String },
    #[error("unknown regressor `{0}`")]
    UnknownRegressor(String),
}
