use serde::Serialize;

use super::ReasonCode;

/// Component shares `(cs1, cs2) = (a2 / (a2 - a1), a1 / (a1 - a2))` from the
/// error-correction coefficients.
pub fn component_share(alpha: [f64; 2]) -> Result<[f64; 2], ReasonCode> {
    let [a1, a2] = alpha;
    let gap = a2 - a1;
    let scale = a1.abs().max(a2.abs());
    if !gap.is_finite() || gap.abs() <= 1e-12 * scale || scale == 0.0 {
        return Err(ReasonCode::CsDegenerate);
    }
    Ok([a2 / gap, -a1 / gap])
}

/// Lower-triangular `M` with `M M' = sigma`:
/// `m11 = s1`, `m21 = rho s2`, `m22 = s2 sqrt(1 - rho^2)`.
pub fn cholesky_2x2(sigma: [[f64; 2]; 2]) -> Result<[[f64; 2]; 2], ReasonCode> {
    let (s11, s12, s22) = (sigma[0][0], sigma[0][1], sigma[1][1]);
    if !(s11 > 0.0 && s22 > 0.0) || !s12.is_finite() {
        return Err(ReasonCode::IsSingularCovariance);
    }
    let m11 = s11.sqrt();
    let m21 = s12 / m11;
    let rest = s22 - m21 * m21;
    if !(rest > 1e-14 * s22) {
        return Err(ReasonCode::IsSingularCovariance);
    }
    Ok([[m11, 0.0], [m21, rest.sqrt()]])
}

/// Information shares for a single ordering (series 1 first).
pub fn information_share_ordered(sigma: [[f64; 2]; 2], gamma: [f64; 2]) -> Result<[f64; 2], ReasonCode> {
    let m = cholesky_2x2(sigma)?;
    let first = (gamma[0] * m[0][0] + gamma[1] * m[1][0]).powi(2);
    let second = (gamma[1] * m[1][1]).powi(2);
    let total = first + second;
    if !(total > 0.0) {
        return Err(ReasonCode::IsSingularCovariance);
    }
    Ok([first / total, second / total])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InformationShare {
    /// Ordering-averaged shares.
    pub is1: f64,
    pub is2: f64,
    /// Share of series 1 with series 1 ordered first.
    pub is1_first: f64,
    /// Share of series 1 with series 2 ordered first.
    pub is1_second: f64,
}

/// Information shares averaged over both orderings of the two series.
pub fn information_share(sigma: [[f64; 2]; 2], gamma: [f64; 2]) -> Result<InformationShare, ReasonCode> {
    let forward = information_share_ordered(sigma, gamma)?;
    let swapped_sigma = [[sigma[1][1], sigma[1][0]], [sigma[0][1], sigma[0][0]]];
    let reverse = information_share_ordered(swapped_sigma, [gamma[1], gamma[0]])?;
    Ok(InformationShare {
        is1: 0.5 * (forward[0] + reverse[1]),
        is2: 0.5 * (forward[1] + reverse[0]),
        is1_first: forward[0],
        is1_second: reverse[1],
    })
}

/// Information leadership shares.
///
/// With `a = |is1 cs2|` and `b = |is2 cs1|`, `IL1 = a/b`, `IL2 = b/a`, and
/// `ils1 = IL1 / (IL1 + IL2) = a^2 / (a^2 + b^2)`. Zero terms take the limit
/// (0 or 1); both terms zero leaves the share undefined.
pub fn information_leadership_share(is: [f64; 2], cs: [f64; 2]) -> Result<[f64; 2], ReasonCode> {
    let a = (is[0] * cs[1]).abs();
    let b = (is[1] * cs[0]).abs();
    if !(a.is_finite() && b.is_finite()) {
        return Err(ReasonCode::IlsUndefined);
    }
    if a == 0.0 && b == 0.0 {
        return Err(ReasonCode::IlsUndefined);
    }
    // Scale before squaring to stay clear of underflow.
    let m = a.max(b);
    let (a, b) = (a / m, b / m);
    let total = a * a + b * b;
    Ok([a * a / total, b * b / total])
}
