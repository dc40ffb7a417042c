//! Standard normal helpers with tail-safe evaluation.

use statrs::function::erf::erfc;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Below this index the inverse Mills ratio and `ln Phi` switch to the
/// asymptotic expansion.
pub const ASYMPTOTIC_CUTOFF: f64 = -30.0;

#[inline]
pub fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `Phi(x) / phi(x)` for large negative `x` via the Laplace expansion
/// `(1/t)(1 - 1/t^2 + 3/t^4 - 15/t^6 + 105/t^8 - 945/t^10)`, `t = -x`.
fn mills_tail(x: f64) -> f64 {
    let t = -x;
    let t2 = 1.0 / (t * t);
    let series = 1.0 - t2 * (1.0 - 3.0 * t2 * (1.0 - 5.0 * t2 * (1.0 - 7.0 * t2 * (1.0 - 9.0 * t2))));
    series / t
}

/// `ln Phi(x)`, accurate in both tails.
pub fn ln_cdf(x: f64) -> f64 {
    if x < ASYMPTOTIC_CUTOFF {
        -0.5 * x * x - 0.5 * (2.0 * std::f64::consts::PI).ln() + mills_tail(x).ln()
    } else if x > 5.0 {
        (-cdf(-x)).ln_1p()
    } else {
        cdf(x).ln()
    }
}

/// Inverse Mills ratio `phi(x) / Phi(x)`.
pub fn inverse_mills(x: f64) -> f64 {
    if x < ASYMPTOTIC_CUTOFF {
        1.0 / mills_tail(x)
    } else {
        pdf(x) / cdf(x)
    }
}

/// Vectorised inverse Mills ratio.
pub fn inverse_mills_vec(index: &[f64]) -> Vec<f64> {
    index.iter().map(|&v| inverse_mills(v)).collect()
}

/// Two-sided p-value against the standard normal.
pub fn two_sided_p(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

/// Inverse of `cdf` by bisection refined with Newton steps. Only used by
/// tests and diagnostics, not in estimation loops.
pub fn quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0,1)");
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..3 {
        x -= (cdf(x) - p) / pdf(x);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mills_at_zero() {
        assert_relative_eq!(inverse_mills(0.0), (2.0 / std::f64::consts::PI).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(inverse_mills(0.0), 0.797885, epsilon = 1e-6);
    }

    #[test]
    fn mills_upper_tail_vanishes() {
        assert!(inverse_mills(10.0) < 1e-20);
        assert!(inverse_mills(40.0) >= 0.0);
    }

    #[test]
    fn mills_continuous_at_cutoff() {
        let below = inverse_mills(ASYMPTOTIC_CUTOFF - 1e-9);
        let above = inverse_mills(ASYMPTOTIC_CUTOFF + 1e-9);
        assert_relative_eq!(below, above, max_relative = 1e-10);
        // deep tail: lambda(x) ~ -x
        let v = inverse_mills(-1e3);
        assert!(v.is_finite() && (v - 1e3).abs() < 1e-2);
        let v = inverse_mills(-1e200);
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn ln_cdf_matches_direct_in_body() {
        for x in [-20.0, -5.0, -1.0, 0.0, 2.0, 6.0] {
            assert_relative_eq!(ln_cdf(x), cdf(x).ln(), max_relative = 1e-12);
        }
        // high-precision reference values on both sides of the cutoff
        assert_relative_eq!(ln_cdf(-30.0), -454.321_243_956_343_2, max_relative = 1e-12);
        assert_relative_eq!(ln_cdf(-30.5), -469.462_737_322_912_1, max_relative = 1e-12);
        assert_relative_eq!(ln_cdf(-29.9), -451.322_912_458_528_6, max_relative = 1e-11);
        assert!(ln_cdf(-100.0).is_finite());
    }

    #[test]
    fn quantiles() {
        assert!(quantile(0.5).abs() < 1e-14);
        assert_relative_eq!(quantile(0.75), 0.674_489_750_196_081_7, epsilon = 1e-12);
    }

    #[test]
    fn p_values() {
        // the erfc implementation is good to about 1e-11 here
        assert_relative_eq!(two_sided_p(1.959_963_984_540_054), 0.05, epsilon = 1e-11);
        assert_eq!(two_sided_p(0.0), 1.0);
    }
}
