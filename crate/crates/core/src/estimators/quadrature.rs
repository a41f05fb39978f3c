use super::{log_likelihood_unchecked, CampaignOutcome};
use crate::error::{Error, Result};

/// Composite Newton–Cotes weights for `m` equally spaced points with unit spacing.
///
/// Simpson's rule when the interval count is even; otherwise Simpson on the
/// leading intervals and the 3/8 rule on the last three. Two points fall
/// back to the trapezoid rule.
fn newton_cotes_weights(m: usize) -> Vec<f64> {
    let intervals = m - 1;
    let mut w = vec![0.0; m];
    if intervals == 1 {
        w[0] = 0.5;
        w[1] = 0.5;
        return w;
    }
    let simpson_end = if intervals.is_multiple_of(2) { intervals } else { intervals - 3 };
    for start in (0..simpson_end).step_by(2) {
        w[start] += 1.0 / 3.0;
        w[start + 1] += 4.0 / 3.0;
        w[start + 2] += 1.0 / 3.0;
    }
    if simpson_end < intervals {
        let s = simpson_end;
        w[s] += 3.0 / 8.0;
        w[s + 1] += 9.0 / 8.0;
        w[s + 2] += 9.0 / 8.0;
        w[s + 3] += 3.0 / 8.0;
    }
    w
}

fn trapezoid_weights(m: usize) -> Vec<f64> {
    let mut w = vec![1.0; m];
    w[0] = 0.5;
    w[m - 1] = 0.5;
    w
}

/// Ratio `∫θ·g / ∫g` for log-integrand samples `log_g` at `thetas`.
///
/// The common spacing cancels in the ratio. Values are shifted by the
/// maximum before exponentiating.
fn ratio(thetas: &[f64], log_g: &[f64], weights: &[f64]) -> Option<f64> {
    let peak = log_g
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return None;
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&theta, &lg), &w) in thetas.iter().zip(log_g).zip(weights) {
        let g = (lg - peak).exp();
        num += w * theta * g;
        den += w * g;
    }
    (den > 0.0).then(|| (num / den).clamp(0.0, 1.0))
}

/// Posterior mean and quadrature error estimate for a tabulated prior.
///
/// The error estimate compares against the same rule on the grid with every
/// other point removed; grids whose interval count is odd cannot be halved,
/// so the trapezoid rule on the full grid serves as the comparison instead.
pub(super) fn posterior_mean_on_grid(outcome: &CampaignOutcome, prior: &[f64]) -> Result<(f64, f64)> {
    let m = prior.len();
    let h = 1.0 / (m - 1) as f64;
    let thetas: Vec<f64> = (0..m).map(|j| (j as f64 * h).min(1.0)).collect();
    let log_g: Vec<f64> = thetas
        .iter()
        .zip(prior)
        .map(|(&theta, &f)| {
            if f > 0.0 {
                log_likelihood_unchecked(outcome, theta) + f.ln()
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();

    let degenerate = || {
        Error::NumericalDegeneracy(format!(
            "likelihood times prior vanishes on the whole grid for k = {}, t = {}",
            outcome.failures, outcome.tests
        ))
    };
    let fine = ratio(&thetas, &log_g, &newton_cotes_weights(m)).ok_or_else(degenerate)?;

    let coarse = if (m - 1).is_multiple_of(2) && m >= 5 {
        let t: Vec<f64> = thetas.iter().copied().step_by(2).collect();
        let g: Vec<f64> = log_g.iter().copied().step_by(2).collect();
        ratio(&t, &g, &newton_cotes_weights(t.len()))
    } else {
        ratio(&thetas, &log_g, &trapezoid_weights(m))
    };
    // A coarse grid that misses all the mass says nothing useful about accuracy.
    let error = coarse.map_or(f64::INFINITY, |c| (fine - c).abs());
    Ok((fine, error))
}
