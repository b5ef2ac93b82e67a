use nalgebra::{DMatrix, Matrix2, Matrix2x3, Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use super::EconError;

/// 5% asymptotic trace critical values for a bivariate system with the
/// constant restricted to the cointegrating relation, indexed by the null
/// `[r = 0, r <= 1]` (p - r = 2 and 1).
pub const TRACE_CRITICAL_5PCT: [f64; 2] = [19.96, 9.24];

/// Asymptotic trace critical values `[r = 0, r <= 1]` for a bivariate system
/// with the constant restricted to the cointegrating relation. Only the 10%,
/// 5% and 1% levels are tabulated.
pub fn trace_critical_values(level: f64) -> Option<[f64; 2]> {
    const TABLE: [(f64, [f64; 2]); 3] =
        [(0.10, [17.85, 7.52]), (0.05, TRACE_CRITICAL_5PCT), (0.01, [24.60, 12.97])];
    TABLE.iter().find(|(l, _)| (l - level).abs() < 1e-9).map(|&(_, cv)| cv)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RankCategory {
    /// Rank 2: both series stationary.
    Stationarity,
    /// Rank 1: one common stochastic trend.
    Cointegration,
    /// Rank 0: integrated without a common trend.
    NonCointegration,
}

impl RankCategory {
    pub const ALL: [RankCategory; 3] =
        [RankCategory::Stationarity, RankCategory::Cointegration, RankCategory::NonCointegration];

    pub fn as_str(&self) -> &'static str {
        match self {
            RankCategory::Stationarity => "Stationarity",
            RankCategory::Cointegration => "Cointegration",
            RankCategory::NonCointegration => "NonCointegration",
        }
    }
}

impl std::str::FromStr for RankCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RankCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

impl std::fmt::Display for RankCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankDecision {
    /// Trace statistics for `r = 0` and `r <= 1`.
    pub trace_statistics: [f64; 2],
    pub critical_values: [f64; 2],
    /// Two largest squared canonical correlations.
    pub eigenvalues: [f64; 2],
    pub lags: usize,
    pub n_obs: usize,
    pub category: RankCategory,
}

/// Sequential trace-test decision: stop at the first null that is not rejected.
pub fn classify_rank(trace_statistics: [f64; 2], critical_values: [f64; 2]) -> RankCategory {
    if trace_statistics[0] <= critical_values[0] {
        RankCategory::NonCointegration
    } else if trace_statistics[1] <= critical_values[1] {
        RankCategory::Cointegration
    } else {
        RankCategory::Stationarity
    }
}

/// Cross-product moments of the VECM regressors for one sample.
///
/// Column layout: `[dp_t (2) | p_{t-1} - shift, 1 (3) | dp_{t-1} .. dp_{t-L} (2L)]`,
/// averaged over `t = first..n-1`.
pub(crate) struct Moments {
    m: DMatrix<f64>,
    pub(crate) t: usize,
    max_lag: usize,
    pub(crate) shift: f64,
}

impl Moments {
    pub(crate) fn new(p1: &[f64], p2: &[f64], max_lag: usize, first: usize) -> Self {
        debug_assert!(first > max_lag && p1.len() == p2.len());
        let n = p1.len();
        let shift = p1[0];
        let dim = 5 + 2 * max_lag;
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        let mut z = vec![0.0; dim];
        for t in first..n {
            z[0] = p1[t] - p1[t - 1];
            z[1] = p2[t] - p2[t - 1];
            z[2] = p1[t - 1] - shift;
            z[3] = p2[t - 1] - shift;
            z[4] = 1.0;
            for j in 1..=max_lag {
                z[3 + 2 * j] = p1[t - j] - p1[t - j - 1];
                z[4 + 2 * j] = p2[t - j] - p2[t - j - 1];
            }
            for a in 0..dim {
                let za = z[a];
                if za == 0.0 {
                    continue;
                }
                for b in a..dim {
                    m[(a, b)] += za * z[b];
                }
            }
        }
        let t = n - first;
        for a in 0..dim {
            for b in a..dim {
                let v = m[(a, b)] / t as f64;
                m[(a, b)] = v;
                m[(b, a)] = v;
            }
        }
        Moments { m, t, max_lag, shift }
    }

    pub(crate) fn lagged_block(&self, lags: usize) -> DMatrix<f64> {
        self.m.view((5, 5), (2 * lags, 2 * lags)).into_owned()
    }

    pub(crate) fn cross_lagged(&self, rows: std::ops::Range<usize>, lags: usize) -> DMatrix<f64> {
        self.m.view((rows.start, 5), (rows.len(), 2 * lags)).into_owned()
    }
}

/// Solution of the reduced-rank eigenproblem for one lag length.
pub(crate) struct ReducedRank {
    /// Descending squared canonical correlations.
    pub(crate) eigenvalues: [f64; 3],
    /// Leading cointegrating vector scaled so that `b' S11 b = 1`.
    pub(crate) beta_raw: Vector3<f64>,
    pub(crate) s00: Matrix2<f64>,
    pub(crate) s01: Matrix2x3<f64>,
    pub(crate) t: usize,
}

fn sym_inverse_sqrt(s: &Matrix3<f64>, what: &str) -> Result<Matrix3<f64>, EconError> {
    let eig = SymmetricEigen::new(*s);
    let max = eig.eigenvalues.amax();
    if !(max > 0.0) || eig.eigenvalues.iter().any(|&e| e <= 1e-13 * max) {
        return Err(EconError::NonEstimable(format!("singular {what} moment matrix")));
    }
    let d = Matrix3::from_diagonal(&eig.eigenvalues.map(|e| 1.0 / e.sqrt()));
    Ok(eig.eigenvectors * d * eig.eigenvectors.transpose())
}

impl ReducedRank {
    pub(crate) fn solve(moments: &Moments, lags: usize) -> Result<ReducedRank, EconError> {
        assert!(lags <= moments.max_lag);
        let head = moments.m.view((0, 0), (5, 5)).into_owned();
        let s = if lags == 0 {
            head
        } else {
            let m22 = moments.lagged_block(lags);
            let chol = m22
                .cholesky()
                .ok_or_else(|| EconError::NonEstimable("singular lagged-difference moments".into()))?;
            let b = moments.cross_lagged(0..5, lags);
            let proj = chol.solve(&b.transpose());
            head - &b * proj
        };
        let s00 = Matrix2::new(s[(0, 0)], s[(0, 1)], s[(1, 0)], s[(1, 1)]);
        let s01 = Matrix2x3::from_fn(|i, j| s[(i, j + 2)]);
        let s11 = Matrix3::from_fn(|i, j| s[(i + 2, j + 2)]);
        let s11_isqrt = sym_inverse_sqrt(&s11, "level")?;
        let s00_inv = s00
            .cholesky()
            .map(|c| c.inverse())
            .ok_or_else(|| EconError::NonEstimable("singular difference moment matrix".into()))?;
        let mut c = s11_isqrt * s01.transpose() * s00_inv * s01 * s11_isqrt;
        c = (c + c.transpose()) * 0.5;
        let eig = SymmetricEigen::new(c);
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let eigenvalues = order.map(|i| eig.eigenvalues[i].clamp(0.0, 1.0 - 1e-15));
        let beta_raw = s11_isqrt * eig.eigenvectors.column(order[0]);
        Ok(ReducedRank { eigenvalues, beta_raw, s00, s01, t: moments.t })
    }

    pub(crate) fn trace_statistics(&self) -> [f64; 2] {
        let t = self.t as f64;
        let l1 = (1.0 - self.eigenvalues[0]).ln();
        let l2 = (1.0 - self.eigenvalues[1]).ln();
        [-t * (l1 + l2), -t * l2]
    }
}

pub(crate) fn check_pair(p1: &[f64], p2: &[f64], lags: usize) -> Result<(), EconError> {
    if p1.len() != p2.len() {
        return Err(EconError::Dimension(format!("series lengths {} and {}", p1.len(), p2.len())));
    }
    let need = (20 * lags).max(lags + 10);
    if p1.len() <= need {
        return Err(EconError::NonEstimable(format!(
            "{} observations, need more than {need} for {lags} lags",
            p1.len()
        )));
    }
    let constant = |p: &[f64]| p.iter().all(|&v| v == p[0]);
    if constant(p1) || constant(p2) {
        return Err(EconError::NonEstimable("constant price series".into()));
    }
    if p1.iter().chain(p2).any(|v| !v.is_finite()) {
        return Err(EconError::NonEstimable("non-finite price".into()));
    }
    Ok(())
}

/// Johansen trace test for a price pair with `lags` lagged differences and the
/// constant restricted to the cointegrating relation.
pub fn johansen_trace(p1: &[f64], p2: &[f64], lags: usize) -> Result<RankDecision, EconError> {
    johansen_trace_with(p1, p2, lags, TRACE_CRITICAL_5PCT)
}

/// [`johansen_trace`] against caller-supplied critical values for `r = 0` and `r <= 1`.
pub fn johansen_trace_with(
    p1: &[f64],
    p2: &[f64],
    lags: usize,
    critical_values: [f64; 2],
) -> Result<RankDecision, EconError> {
    check_pair(p1, p2, lags)?;
    let moments = Moments::new(p1, p2, lags, lags + 1);
    let rr = ReducedRank::solve(&moments, lags)?;
    let trace_statistics = rr.trace_statistics();
    Ok(RankDecision {
        trace_statistics,
        critical_values,
        eigenvalues: [rr.eigenvalues[0], rr.eigenvalues[1]],
        lags,
        n_obs: rr.t,
        category: classify_rank(trace_statistics, critical_values),
    })
}
