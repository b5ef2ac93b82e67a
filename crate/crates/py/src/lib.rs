//! Python bindings for the `pdshare` estimators and the structural simulator.
//!
//! Structured results are returned as plain dicts; failures raise
//! `ValueError` with the estimator's message.

use pdshare::econ;
use pdshare::metrics::{self, PipelineConfig};
use pdshare::synthetic::{simulate_day as simulate, StructuralConfig};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Converts any serialisable value to the equivalent Python object.
fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(value_error)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// `(cs1, cs2)` from the error-correction coefficients.
#[pyfunction]
fn component_share(alpha: [f64; 2]) -> PyResult<[f64; 2]> {
    metrics::component_share(alpha).map_err(value_error)
}

/// Lower-triangular factor `M` with `M M' = sigma`.
#[pyfunction]
fn cholesky_2x2(sigma: [[f64; 2]; 2]) -> PyResult<[[f64; 2]; 2]> {
    metrics::cholesky_2x2(sigma).map_err(value_error)
}

/// Ordering-averaged information shares as a dict.
#[pyfunction]
fn information_share(py: Python<'_>, sigma: [[f64; 2]; 2], gamma: [f64; 2]) -> PyResult<Py<PyAny>> {
    to_py(py, &metrics::information_share(sigma, gamma).map_err(value_error)?)
}

/// `(ils1, ils2)` from information and component shares.
#[pyfunction]
fn information_leadership_share(is: [f64; 2], cs: [f64; 2]) -> PyResult<[f64; 2]> {
    metrics::information_leadership_share(is, cs).map_err(value_error)
}

/// Johansen trace tests with a restricted constant.
#[pyfunction]
#[pyo3(signature = (p1, p2, lags, significance = 0.05))]
fn johansen_trace(py: Python<'_>, p1: Vec<f64>, p2: Vec<f64>, lags: usize, significance: f64) -> PyResult<Py<PyAny>> {
    let cv = econ::trace_critical_values(significance)
        .ok_or_else(|| value_error(format!("significance {significance} must be one of 0.10, 0.05, 0.01")))?;
    to_py(py, &econ::johansen_trace_with(&p1, &p2, lags, cv).map_err(value_error)?)
}

/// Rank-one VECM with the lag order chosen by BIC over `lag_min..=lag_max`.
#[pyfunction]
#[pyo3(signature = (p1, p2, lag_min = 1, lag_max = 10))]
fn fit_vecm(py: Python<'_>, p1: Vec<f64>, p2: Vec<f64>, lag_min: usize, lag_max: usize) -> PyResult<Py<PyAny>> {
    to_py(py, &econ::fit_vecm(&p1, &p2, lag_min..=lag_max).map_err(value_error)?)
}

/// Lead-lag adjustment fit; the dict carries `gs1` (None when undefined).
#[pyfunction]
fn gs_share(py: Python<'_>, p1: Vec<f64>, p2: Vec<f64>) -> PyResult<Py<PyAny>> {
    let fit = metrics::gs_share(&p1, &p2).map_err(value_error)?;
    let out = to_py(py, &fit)?;
    out.bind(py).cast::<PyDict>()?.set_item("gs1", fit.gs1().ok())?;
    Ok(out)
}

/// Full daily estimate: lag choice, rank test and the applicable shares.
#[pyfunction]
#[pyo3(signature = (p1, p2, lag_min = 1, lag_max = 10, significance = 0.05))]
fn estimate_day(
    py: Python<'_>,
    p1: Vec<f64>,
    p2: Vec<f64>,
    lag_min: usize,
    lag_max: usize,
    significance: f64,
) -> PyResult<Py<PyAny>> {
    let cfg = PipelineConfig { lag_min, lag_max, significance, ..Default::default() };
    cfg.validate().map_err(value_error)?;
    to_py(py, &metrics::estimate_day(&p1, &p2, &cfg).map_err(value_error)?)
}

/// Simulates one session of two delayed, noisy contracts. Returns a dict with
/// the aligned per-second prices `p1`, `p2`, the tick counts and the truth.
#[pyfunction]
#[pyo3(signature = (seed = 0, delays = [0, 0], sigma_s = [0.05, 0.05], sigma_mu = 0.02, session_seconds = 23_400))]
fn simulate_day(
    py: Python<'_>,
    seed: u64,
    delays: [u32; 2],
    sigma_s: [f64; 2],
    sigma_mu: f64,
    session_seconds: u32,
) -> PyResult<Py<PyAny>> {
    let cfg = StructuralConfig { seed, delays, sigma_s, sigma_mu, session_seconds, ..Default::default() };
    let day = simulate(&cfg).map_err(value_error)?;
    let (p1, p2) = day.pair().series();
    let out = PyDict::new(py);
    out.set_item("p1", p1)?;
    out.set_item("p2", p2)?;
    out.set_item("ticks", [day.ticks[0].len(), day.ticks[1].len()])?;
    out.set_item("truth", to_py(py, &day.truth)?)?;
    Ok(out.into_any().unbind())
}

#[pymodule]
fn pdshare_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(component_share, m)?)?;
    m.add_function(wrap_pyfunction!(cholesky_2x2, m)?)?;
    m.add_function(wrap_pyfunction!(information_share, m)?)?;
    m.add_function(wrap_pyfunction!(information_leadership_share, m)?)?;
    m.add_function(wrap_pyfunction!(johansen_trace, m)?)?;
    m.add_function(wrap_pyfunction!(fit_vecm, m)?)?;
    m.add_function(wrap_pyfunction!(gs_share, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_day, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_day, m)?)?;
    Ok(())
}
