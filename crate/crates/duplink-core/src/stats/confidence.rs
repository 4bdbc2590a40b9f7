//! Confidence bounds for empirical CDFs.
//!
//! Two complementary tools: a uniform band of half-width `dkw_epsilon` that
//! holds over the whole CDF, and the Wilson score interval for a single CDF
//! point, which stays informative in the tails where the uniform band is
//! too conservative.

use serde::{Deserialize, Serialize};

use super::StatsError;

/// Uniform confidence band: `F(x)` lies within `F_n(x) ± epsilon` everywhere
/// with probability `1 - alpha`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DkwBound {
    pub epsilon: f64,
    pub alpha: f64,
    pub n: u64,
}

/// Pointwise binomial-proportion bound on `F(x)` at one evaluation point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WilsonBound {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    /// CDF level the bound was evaluated at.
    pub at_p: f64,
    /// Observations at or below the evaluation point.
    pub k: u64,
    pub n: u64,
    pub z: f64,
}

impl WilsonBound {
    pub fn half_width(&self) -> f64 {
        (self.upper - self.lower) / 2.0
    }
}

/// Half-width of the uniform ECDF confidence band at level `1 - alpha`:
/// `sqrt(ln(2 / alpha) / (2 n))`.
///
/// `alpha` may range up to 2, where the band degenerates to zero width.
pub fn dkw_epsilon(n: u64, alpha: f64) -> Result<f64, StatsError> {
    if n < 1 {
        return Err(StatsError::InvalidCount);
    }
    if !(alpha > 0.0 && alpha <= 2.0) || alpha.is_nan() {
        return Err(StatsError::InvalidAlpha { alpha });
    }
    Ok(((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt())
}

/// Two-sided Wilson score interval for a binomial proportion with `k`
/// successes in `n` trials at confidence `1 - alpha`.
///
/// Uses `z` at the `1 - alpha/2` normal quantile. The closed form is
///
/// ```text
/// (p + z^2/2n ± (z/2n) * sqrt(4 n p (1 - p) + z^2)) / (1 + z^2/n)
/// ```
///
/// with `p = k/n`. At the boundaries the interval pins to 0 and 1 exactly.
pub fn wilson_interval(k: u64, n: u64, alpha: f64) -> Result<(f64, f64), StatsError> {
    if n < 1 {
        return Err(StatsError::InvalidCount);
    }
    if k > n {
        return Err(StatsError::KOutOfRange { k, n });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidAlpha { alpha });
    }
    let z = normal_quantile(1.0 - alpha / 2.0);
    let nf = n as f64;
    let p_hat = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = p_hat + z2 / (2.0 * nf);
    let half = (z / (2.0 * nf)) * (4.0 * nf * p_hat * (1.0 - p_hat) + z2).sqrt();
    let mut lower = ((center - half) / denom).clamp(0.0, 1.0);
    let mut upper = ((center + half) / denom).clamp(0.0, 1.0);
    // Algebraically exact at the boundaries; avoid last-ulp drift.
    if k == 0 {
        lower = 0.0;
    }
    if k == n {
        upper = 1.0;
    }
    Ok((lower, upper))
}

/// Wilson bound packaged with its evaluation context.
pub fn wilson_bound_at(k: u64, n: u64, alpha: f64, at_p: f64) -> Result<WilsonBound, StatsError> {
    let (lower, upper) = wilson_interval(k, n, alpha)?;
    Ok(WilsonBound { lower, upper, alpha, at_p, k, n, z: normal_quantile(1.0 - alpha / 2.0) })
}

/// Inverse standard normal CDF via Acklam's rational approximation.
///
/// Absolute error below 1.2e-9 over (0, 1), comfortably within the 1e-6
/// needed for interval half-widths. Returns +/- infinity at the endpoints.
pub fn normal_quantile(p: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p), "probability {p} outside [0, 1]");
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }

    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile_upper_tail(1.0 - p)
    }
}

fn normal_quantile_upper_tail(p: f64) -> f64 {
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let q = (-2.0 * p.ln()).sqrt();
    (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
        / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dkw_alpha_two_gives_zero_width() {
        assert_eq!(dkw_epsilon(100, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn dkw_matches_hand_formula() {
        let eps = dkw_epsilon(72_000, 0.01).unwrap();
        let hand = (f64::ln(2.0 / 0.01) / (2.0 * 72_000.0)).sqrt();
        assert_relative_eq!(eps, hand, max_relative = 1e-15);
        assert_relative_eq!(eps, 6.07e-3, max_relative = 2e-3);
    }

    #[test]
    fn dkw_quadrupling_n_halves_epsilon() {
        let e1 = dkw_epsilon(5_000, 0.05).unwrap();
        let e4 = dkw_epsilon(20_000, 0.05).unwrap();
        assert_relative_eq!(e4, e1 / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn dkw_monotone_in_n_and_alpha() {
        let mut prev = f64::INFINITY;
        for n in [10, 100, 1_000, 10_000] {
            let e = dkw_epsilon(n, 0.01).unwrap();
            assert!(e < prev);
            prev = e;
        }
        assert!(dkw_epsilon(100, 0.001).unwrap() > dkw_epsilon(100, 0.01).unwrap());
    }

    #[test]
    fn dkw_rejects_bad_inputs() {
        assert!(dkw_epsilon(0, 0.01).is_err());
        assert!(dkw_epsilon(10, 0.0).is_err());
        assert!(dkw_epsilon(10, 2.5).is_err());
        assert!(dkw_epsilon(10, -1.0).is_err());
    }

    #[test]
    fn wilson_boundaries_pin_to_unit_interval() {
        let (_, upper) = wilson_interval(100, 100, 0.05).unwrap();
        assert_eq!(upper, 1.0);
        let (lower, _) = wilson_interval(0, 100, 0.05).unwrap();
        assert_eq!(lower, 0.0);
        let (lower, upper) = wilson_interval(50, 100, 0.05).unwrap();
        assert!(0.0 < lower && lower < 0.5 && 0.5 < upper && upper < 1.0);
    }

    #[test]
    fn wilson_half_width_magnitude_at_deep_tail() {
        // p_hat = 0.9, n = 55,000, alpha = 0.01 -> half-width ~3.3e-3.
        let k = (0.9 * 55_000.0) as u64;
        let b = wilson_bound_at(k, 55_000, 0.01, 0.9).unwrap();
        assert_relative_eq!(b.half_width(), 3.3e-3, max_relative = 0.02);
        assert!(b.lower < 0.9 && 0.9 < b.upper);
    }

    #[test]
    fn wilson_rejects_bad_inputs() {
        assert!(wilson_interval(5, 0, 0.05).is_err());
        assert!(wilson_interval(11, 10, 0.05).is_err());
        assert!(wilson_interval(5, 10, 0.0).is_err());
        assert!(wilson_interval(5, 10, 1.0).is_err());
    }

    #[test]
    fn normal_quantile_matches_reference_values() {
        // Reference values from standard normal tables.
        for (p, z) in [
            (0.5, 0.0),
            (0.975, 1.959_963_984_540_054),
            (0.99, 2.326_347_874_040_841),
            (0.995, 2.575_829_303_548_901),
            (0.9995, 3.290_526_731_491_926),
            (0.001, -3.090_232_306_167_813),
        ] {
            assert_relative_eq!(normal_quantile(p), z, epsilon = 1e-6);
        }
    }

    #[test]
    fn normal_quantile_is_antisymmetric() {
        for p in [0.01, 0.1, 0.3, 0.45] {
            assert_relative_eq!(normal_quantile(p), -normal_quantile(1.0 - p), epsilon = 1e-9);
        }
    }
}
