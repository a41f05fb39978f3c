//! Standard normal distribution function and quantile.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Standard normal CDF Φ(z).
///
/// Evaluated from the upper tail `½·erfc(|z|/√2)` so that
/// `normal_cdf(-z) == 1.0 - normal_cdf(z)` holds exactly in floating point.
pub fn normal_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    let tail = 0.5 * libm::erfc(z.abs() * FRAC_1_SQRT_2);
    if z < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Standard normal quantile Φ⁻¹(p) for `p ∈ (0, 1)`.
///
/// Acklam's rational approximation followed by one Halley step against
/// [`normal_cdf`]; accurate to a few ulps over the open unit interval.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("quantile level {p} must lie in (0, 1)")));
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
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

    let lower_tail = |q: f64| {
        let r = (-2.0 * q.ln()).sqrt();
        (((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5])
            / ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0)
    };
    let x = if p < P_LOW {
        lower_tail(p)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -lower_tail(1.0 - p)
    };

    // Halley refinement; the residual is taken on the smaller tail to keep precision.
    let e = if x < 0.0 {
        normal_cdf(x) - p
    } else {
        (1.0 - p) - (1.0 - normal_cdf(x))
    };
    let u = e / normal_pdf(x);
    Ok(x - u / (1.0 + 0.5 * x * u))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // High-precision reference values (40-digit arithmetic).
    const CDF_REFERENCE: &[(f64, f64)] = &[
        (-8.0, 6.220960574271784e-16),
        (-6.0, 9.865876450376981e-10),
        (-3.5, 0.0002326290790355250),
        (-1.96, 0.02499789514822044),
        (-1.0, 0.1586552539314571),
        (-0.5, 0.3085375387259869),
        (0.25, 0.5987063256829237),
        (1.0, 0.8413447460685429),
        (1.96, 0.9750021048517796),
        (2.5, 0.9937903346742239),
        (4.0, 0.9999683287581669),
        (6.0, 0.9999999990134124),
        (8.0, 0.9999999999999994),
    ];

    /// Maclaurin series of erf; independent of the rational approximation.
    fn cdf_by_series(z: f64) -> f64 {
        let x = z * FRAC_1_SQRT_2;
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= -x * x / n;
            let add = term / (2.0 * n + 1.0);
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        0.5 * (1.0 + 2.0 / PI.sqrt() * sum)
    }

    #[test]
    fn cdf_at_zero_is_half() {
        assert_eq!(normal_cdf(0.0), 0.5);
    }

    #[test]
    fn cdf_196_matches_series() {
        let v = normal_cdf(1.96);
        assert!((v - 0.9750021).abs() < 1e-7);
        assert!((v - cdf_by_series(1.96)).abs() < 1e-12);
    }

    #[test]
    fn cdf_reference_accuracy() {
        for &(z, want) in CDF_REFERENCE {
            let got = normal_cdf(z);
            assert!((got - want).abs() <= 1e-10, "z={z}: {got} vs {want}");
        }
        for i in -30..=30 {
            let z = i as f64 * 0.1;
            assert!((normal_cdf(z) - cdf_by_series(z)).abs() < 1e-12, "z={z}");
        }
    }

    #[test]
    fn quantile_reference_values() {
        let refs = [
            (1e-12, -7.034483825301132),
            (1e-6, -4.753424308822899),
            (0.001, -3.090232306167814),
            (0.025, -1.959963984540054),
            (0.3, -0.5244005127080408),
            (0.5, 0.0),
            (0.8, 0.8416212335729144),
            (0.975, 1.959963984540054),
            (0.999999, 4.753424308817088),
        ];
        for (p, want) in refs {
            let got = normal_quantile(p).unwrap();
            assert!((got - want).abs() < 1e-9, "p={p}: {got} vs {want}");
        }
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
        assert!(normal_quantile(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn cdf_symmetry(z in -40.0f64..40.0) {
            prop_assert_eq!(normal_cdf(z) + normal_cdf(-z), 1.0);
        }

        #[test]
        fn cdf_monotone(a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(normal_cdf(lo) <= normal_cdf(hi));
        }

        #[test]
        fn quantile_inverts_cdf(p in 1e-9f64..(1.0 - 1e-9)) {
            let z = normal_quantile(p).unwrap();
            prop_assert!((normal_cdf(z) - p).abs() <= 1e-12 * p.max(1e-3));
        }
    }
}
