use nalgebra::{DMatrix, DVector};

use super::EconError;

/// Relative pivot size below which a column counts as collinear.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct OlsFit {
    pub coefficients: DVector<f64>,
    pub residuals: DVector<f64>,
    /// `(X'X)^{-1}`.
    pub xtx_inv: DMatrix<f64>,
    /// `s^2 (X'X)^{-1}` with `s^2 = RSS / (n - k)`.
    pub covariance: DMatrix<f64>,
    pub rss: f64,
    pub n_obs: usize,
}

impl OlsFit {
    pub fn sigma2(&self) -> f64 {
        let dof = self.n_obs - self.coefficients.len();
        self.rss / dof as f64
    }

    pub fn std_errors(&self) -> DVector<f64> {
        self.covariance.diagonal().map(f64::sqrt)
    }
}

/// Least squares via Householder QR.
///
/// Rank deficiency is reported with the indices of the offending columns
/// (columns whose QR pivot is negligible relative to their own norm).
pub fn ols(y: &DVector<f64>, x: &DMatrix<f64>) -> Result<OlsFit, EconError> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(EconError::Dimension(format!("y has {} rows, X has {n}", y.len())));
    }
    if n <= k {
        return Err(EconError::TooFewObservations { rows: n, cols: k });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let collinear: Vec<usize> = (0..k)
        .filter(|&j| {
            let norm = x.column(j).norm();
            norm == 0.0 || r[(j, j)].abs() <= RANK_TOLERANCE * norm
        })
        .collect();
    if !collinear.is_empty() {
        return Err(EconError::SingularDesign { columns: collinear });
    }
    let qty = qr.q().transpose() * y;
    let coefficients = r
        .solve_upper_triangular(&qty)
        .ok_or(EconError::SingularDesign { columns: vec![] })?;
    let residuals = y - x * &coefficients;
    let rss = residuals.norm_squared();
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(EconError::SingularDesign { columns: vec![] })?;
    let xtx_inv = &r_inv * r_inv.transpose();
    let covariance = &xtx_inv * (rss / (n - k) as f64);
    Ok(OlsFit { coefficients, residuals, xtx_inv, covariance, rss, n_obs: n })
}
