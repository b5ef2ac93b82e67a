use std::ops::RangeInclusive;

use nalgebra::{DMatrix, Matrix2, Vector3};
use serde::Serialize;

use super::johansen::{check_pair, Moments, ReducedRank};
use super::EconError;

pub const DEFAULT_LAG_RANGE: RangeInclusive<usize> = 1..=10;

/// Rank-one VECM
/// `dp_t = alpha (beta' p_{t-1} - mu) + sum_j Gamma_j dp_{t-j} + e_t`
/// with `beta = (1, beta_2)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VecmFit {
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub mu: f64,
    /// `gammas[j - 1][row][col]` multiplies `dp_{t-j}`.
    pub gammas: Vec<[[f64; 2]; 2]>,
    pub lag_count: usize,
    pub sigma: [[f64; 2]; 2],
    pub n_obs: usize,
    /// Largest squared canonical correlation.
    pub eigenvalue: f64,
}

impl VecmFit {
    pub fn rho(&self) -> f64 {
        self.sigma[0][1] / (self.sigma[0][0] * self.sigma[1][1]).sqrt()
    }

    /// One-step residuals over `t = lag_count + 1 .. n - 1`.
    pub fn residuals(&self, p1: &[f64], p2: &[f64]) -> Vec<[f64; 2]> {
        let j = self.lag_count;
        (j + 1..p1.len())
            .map(|t| {
                let ect = p1[t - 1] + self.beta[1] * p2[t - 1] - self.mu;
                let mut e = [p1[t] - p1[t - 1] - self.alpha[0] * ect, p2[t] - p2[t - 1] - self.alpha[1] * ect];
                for (lag, g) in self.gammas.iter().enumerate() {
                    let l = lag + 1;
                    let d = [p1[t - l] - p1[t - l - 1], p2[t - l] - p2[t - l - 1]];
                    for (row, e_row) in e.iter_mut().enumerate() {
                        *e_row -= g[row][0] * d[0] + g[row][1] * d[1];
                    }
                }
                e
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LagSelection {
    pub lag: usize,
    /// `(J, BIC)` per candidate; `None` where the fit was singular.
    pub bic: Vec<(usize, Option<f64>)>,
    pub n_obs: usize,
}

fn log_det_sigma(rr: &ReducedRank) -> Option<f64> {
    let alpha_raw = rr.s01 * rr.beta_raw;
    let sigma = rr.s00 - alpha_raw * alpha_raw.transpose();
    let det = sigma.determinant();
    (det > 0.0 && det.is_finite()).then(|| det.ln())
}

/// BIC lag choice over `range` on the sample shared by all candidates.
/// Ties go to the smaller lag.
pub fn select_lag(p1: &[f64], p2: &[f64], range: RangeInclusive<usize>) -> Result<LagSelection, EconError> {
    let (lo, hi) = (*range.start(), *range.end());
    if lo > hi {
        return Err(EconError::Dimension(format!("empty lag range {lo}..={hi}")));
    }
    check_pair(p1, p2, hi)?;
    let moments = Moments::new(p1, p2, hi, hi + 1);
    let t = moments.t as f64;
    let mut bic = Vec::with_capacity(hi - lo + 1);
    let mut best: Option<(usize, f64)> = None;
    for j in lo..=hi {
        let value = ReducedRank::solve(&moments, j)
            .ok()
            .and_then(|rr| log_det_sigma(&rr))
            .map(|ld| ld + (4 * j + 4) as f64 * t.ln() / t);
        if let Some(v) = value {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((j, v));
            }
        }
        bic.push((j, value));
    }
    let (lag, _) = best.ok_or_else(|| EconError::NonEstimable("every candidate lag is singular".into()))?;
    Ok(LagSelection { lag, bic, n_obs: moments.t })
}

/// Johansen maximum-likelihood VECM with `lags` lagged differences.
pub fn estimate_vecm(p1: &[f64], p2: &[f64], lags: usize) -> Result<VecmFit, EconError> {
    check_pair(p1, p2, lags)?;
    let moments = Moments::new(p1, p2, lags, lags + 1);
    let rr = ReducedRank::solve(&moments, lags)?;
    let scale = rr.beta_raw[0];
    if scale.abs() <= 1e-12 * rr.beta_raw.norm() {
        return Err(EconError::NonEstimable("cointegrating vector excludes the first series".into()));
    }
    let beta_full: Vector3<f64> = rr.beta_raw / scale;
    let alpha = (rr.s01 * rr.beta_raw) * scale;
    let mu = moments.shift * (1.0 + beta_full[1]) - beta_full[2];

    let gammas = if lags == 0 {
        Vec::new()
    } else {
        let m22 = moments.lagged_block(lags);
        let m02 = moments.cross_lagged(0..2, lags);
        let m12 = moments.cross_lagged(2..5, lags);
        let ab = DMatrix::from_fn(2, 3, |i, j| alpha[i] * beta_full[j]);
        let rhs = m02 - ab * m12;
        let chol = m22
            .cholesky()
            .ok_or_else(|| EconError::NonEstimable("singular lagged-difference moments".into()))?;
        let gamma = chol.solve(&rhs.transpose()).transpose();
        (0..lags)
            .map(|l| {
                [
                    [gamma[(0, 2 * l)], gamma[(0, 2 * l + 1)]],
                    [gamma[(1, 2 * l)], gamma[(1, 2 * l + 1)]],
                ]
            })
            .collect()
    };

    let mut fit = VecmFit {
        alpha: [alpha[0], alpha[1]],
        beta: [1.0, beta_full[1]],
        mu,
        gammas,
        lag_count: lags,
        sigma: [[0.0; 2]; 2],
        n_obs: rr.t,
        eigenvalue: rr.eigenvalues[0],
    };
    let residuals = fit.residuals(p1, p2);
    let n = residuals.len() as f64;
    let mut sigma = Matrix2::<f64>::zeros();
    for e in &residuals {
        sigma[(0, 0)] += e[0] * e[0];
        sigma[(0, 1)] += e[0] * e[1];
        sigma[(1, 1)] += e[1] * e[1];
    }
    sigma /= n;
    fit.sigma = [[sigma[(0, 0)], sigma[(0, 1)]], [sigma[(0, 1)], sigma[(1, 1)]]];
    Ok(fit)
}

/// Selects the lag by BIC over `lag_range`, then estimates at that lag.
pub fn fit_vecm(p1: &[f64], p2: &[f64], lag_range: RangeInclusive<usize>) -> Result<VecmFit, EconError> {
    let selection = select_lag(p1, p2, lag_range)?;
    estimate_vecm(p1, p2, selection.lag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// Simulates `dp_t = alpha (p1 - p2 - mu)_{t-1} + gamma dp_{t-1} + e_t`.
    fn simulate(seed: u64, n: usize, alpha: [f64; 2], mu: f64, gamma: f64, rho: f64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = Normal::new(0.0, 1.0).unwrap();
        let (mut p1, mut p2) = (vec![400.0, 400.0], vec![400.0 - mu, 400.0 - mu]);
        for t in 2..n {
            let ect = p1[t - 1] - p2[t - 1] - mu;
            let a = z.sample(&mut rng);
            let b = rho * a + (1.0 - rho * rho).sqrt() * z.sample(&mut rng);
            let d1 = alpha[0] * ect + gamma * (p1[t - 1] - p1[t - 2]) + 0.1 * a;
            let d2 = alpha[1] * ect + gamma * (p2[t - 1] - p2[t - 2]) + 0.1 * b;
            p1.push(p1[t - 1] + d1);
            p2.push(p2[t - 1] + d2);
        }
        (p1, p2)
    }

    #[test]
    fn recovers_known_adjustment() {
        let (p1, p2) = simulate(1, 20_000, [-0.2, 0.1], 2.0, 0.0, 0.3);
        let fit = fit_vecm(&p1, &p2, 1..=10).unwrap();
        assert!((fit.alpha[0] + 0.2).abs() < 0.05, "{:?}", fit.alpha);
        assert!((fit.alpha[1] - 0.1).abs() < 0.05, "{:?}", fit.alpha);
        assert!((fit.beta[1] + 1.0).abs() < 0.01, "{:?}", fit.beta);
        // mu is identified jointly with beta_2; the equilibrium error is centred.
        let ect_mean = p1.iter().zip(&p2).map(|(a, b)| a + fit.beta[1] * b - fit.mu).sum::<f64>()
            / p1.len() as f64;
        assert!(ect_mean.abs() < 0.05, "{ect_mean}");
        assert!((fit.rho() - 0.3).abs() < 0.05);
        assert!((fit.sigma[0][0] - 0.01).abs() < 0.001);
    }

    #[test]
    fn short_run_dynamics_recovered() {
        let (p1, p2) = simulate(2, 20_000, [-0.1, 0.1], 0.0, 0.4, 0.0);
        let fit = estimate_vecm(&p1, &p2, 1).unwrap();
        assert!((fit.gammas[0][0][0] - 0.4).abs() < 0.05, "{:?}", fit.gammas);
        assert!(fit.gammas[0][0][1].abs() < 0.05);
        assert!((fit.gammas[0][1][1] - 0.4).abs() < 0.05);
    }

    #[test]
    fn residual_covariance_matches_moment_identity() {
        let (p1, p2) = simulate(3, 3_000, [-0.2, 0.1], 1.0, 0.2, 0.5);
        let fit = estimate_vecm(&p1, &p2, 3).unwrap();
        let moments = Moments::new(&p1, &p2, 3, 4);
        let rr = ReducedRank::solve(&moments, 3).unwrap();
        let a = rr.s01 * rr.beta_raw;
        let sigma = rr.s00 - a * a.transpose();
        for i in 0..2 {
            for j in 0..2 {
                assert!((fit.sigma[i][j] - sigma[(i, j)]).abs() < 1e-10 * sigma[(0, 0)].abs());
            }
        }
        assert_eq!(fit.sigma[0][1], fit.sigma[1][0]);
        assert!(fit.rho().abs() <= 1.0);
    }

    #[test]
    fn scale_and_shift_equivariance() {
        let (p1, p2) = simulate(4, 5_000, [-0.2, 0.1], 1.0, 0.0, 0.2);
        let base = estimate_vecm(&p1, &p2, 2).unwrap();
        let scale = |v: &[f64], c: f64| v.iter().map(|x| x * c).collect::<Vec<_>>();
        let shift = |v: &[f64], c: f64| v.iter().map(|x| x + c).collect::<Vec<_>>();
        let scaled = estimate_vecm(&scale(&p1, 4.0), &scale(&p2, 4.0), 2).unwrap();
        let shifted = estimate_vecm(&shift(&p1, 30.0), &shift(&p2, 30.0), 2).unwrap();
        for i in 0..2 {
            assert!((scaled.alpha[i] - base.alpha[i]).abs() < 1e-9);
            assert!((shifted.alpha[i] - base.alpha[i]).abs() < 1e-9);
        }
        assert!((scaled.rho() - base.rho()).abs() < 1e-9);
        assert!((scaled.mu - 4.0 * base.mu).abs() < 1e-6);
        // Shifting both legs by c moves mu by c (1 + beta_2) only.
        assert!((shifted.mu - base.mu - 30.0 * (1.0 + base.beta[1])).abs() < 1e-6);
        assert!((shifted.beta[1] - base.beta[1]).abs() < 1e-9);
    }

    #[test]
    fn bic_prefers_short_lags_for_first_order_dynamics() {
        let mut small = 0;
        for seed in 0..10 {
            let (p1, p2) = simulate(100 + seed, 4_000, [-0.1, 0.1], 0.0, 0.3, 0.2);
            let sel = select_lag(&p1, &p2, 1..=10).unwrap();
            assert_eq!(sel.bic.len(), 10);
            assert_eq!(sel.n_obs, 4_000 - 11);
            if sel.lag <= 2 {
                small += 1;
            }
        }
        assert!(small >= 6, "{small}/10 selections at J <= 2");
    }

    #[test]
    fn selection_is_deterministic() {
        let (p1, p2) = simulate(5, 2_000, [-0.1, 0.1], 0.0, 0.0, 0.0);
        assert_eq!(select_lag(&p1, &p2, 1..=5).unwrap(), select_lag(&p1, &p2, 1..=5).unwrap());
        assert!(select_lag(&p1, &p2, 3..=2).is_err());
    }
}
