//! Statistical inference for the probability of failure per scenario.
//!
//! Campaign outcomes are `(t, k)` pairs: `t` tested scenarios, `k` of which
//! failed. The Bernoulli sequence likelihood `θ^k (1−θ)^(t−k)` drives
//! maximum-likelihood and Bayesian posterior-mean estimation; Wald
//! variances and intervals give the normal approximation used for
//! fidelity certification. Importance-sampling and partition pooling
//! estimators cover testing inside logical scenarios.

mod ingest;
mod quadrature;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::normal::normal_quantile;

pub use ingest::{
    aggregate, aggregate_by_subdomain, parse_campaign_csv, parse_prior, CampaignRecord,
};

/// Tolerance on the trapezoid integral of a tabulated prior.
pub const PRIOR_NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// Below this many failures (or successes) the normal approximation is flagged.
pub const SMALL_SAMPLE_THRESHOLD: u64 = 5;

/// Number of tested scenarios and how many of them failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CampaignOutcome {
    pub tests: u64,
    pub failures: u64,
}

impl CampaignOutcome {
    pub fn new(tests: u64, failures: u64) -> Result<Self> {
        if failures > tests {
            return Err(Error::domain(format!(
                "campaign has {failures} failures out of only {tests} tests"
            )));
        }
        Ok(CampaignOutcome { tests, failures })
    }

    pub fn successes(&self) -> u64 {
        self.tests - self.failures
    }

    /// True when the normal approximation to `k/t` is doubtful.
    pub fn small_sample(&self) -> bool {
        self.failures < SMALL_SAMPLE_THRESHOLD || self.successes() < SMALL_SAMPLE_THRESHOLD
    }

    /// Pools two campaigns into one.
    pub fn merge(&self, other: &CampaignOutcome) -> CampaignOutcome {
        CampaignOutcome {
            tests: self.tests + other.tests,
            failures: self.failures + other.failures,
        }
    }

    fn require_tests(&self) -> Result<()> {
        if self.tests == 0 {
            Err(Error::InsufficientData(
                "campaign has no tested scenarios".into(),
            ))
        } else {
            Ok(())
        }
    }
}

/// Prior density over the pfs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PriorSpec {
    Beta { a: f64, b: f64 },
    /// Density tabulated on the uniform grid `θ_j = j/(m−1)`, `j = 0..m`.
    Grid { values: Vec<f64> },
}

impl PriorSpec {
    /// Tabulated prior rescaled so its trapezoid integral is exactly one.
    pub fn grid_normalized(values: Vec<f64>) -> Result<Self> {
        let integral = trapezoid_integral(&values)?;
        if integral <= 0.0 {
            return Err(Error::domain("tabulated prior has no mass"));
        }
        Ok(PriorSpec::Grid {
            values: values.into_iter().map(|v| v / integral).collect(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PriorSpec::Beta { a, b } => {
                if !(a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0) {
                    return Err(Error::domain(format!(
                        "beta prior parameters must be positive, got a = {a}, b = {b}"
                    )));
                }
            }
            PriorSpec::Grid { values } => {
                let integral = trapezoid_integral(values)?;
                if (integral - 1.0).abs() > PRIOR_NORMALIZATION_TOLERANCE {
                    return Err(Error::domain(format!(
                        "tabulated prior integrates to {integral}, not 1"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> Result<f64> {
        self.validate()?;
        Ok(match self {
            PriorSpec::Beta { a, b } => a / (a + b),
            PriorSpec::Grid { values } => {
                let h = 1.0 / (values.len() - 1) as f64;
                let weighted: Vec<f64> = values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| j as f64 * h * v)
                    .collect();
                trapezoid_integral(&weighted)?
            }
        })
    }
}

fn trapezoid_integral(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::domain(
            "tabulated prior needs at least two grid points",
        ));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::domain(format!(
            "tabulated prior density value {v} is not a finite nonnegative number"
        )));
    }
    let h = 1.0 / (values.len() - 1) as f64;
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    Ok(h * (0.5 * (values[0] + values[values.len() - 1]) + inner))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PosteriorMethod {
    ClosedFormConjugate,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub mean: f64,
    pub method: PosteriorMethod,
    /// Estimated absolute quadrature error; zero for the closed form.
    pub quadrature_error: f64,
}

/// One importance-sampled test: `weight = Op(x) / proposal(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSample {
    pub scenario: String,
    pub failed: bool,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    /// Kish effective sample size `(Σw)² / Σw²`.
    pub effective_sample_size: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaldInterval {
    pub estimate: f64,
    pub standard_error: f64,
    pub lower: f64,
    pub upper: f64,
    pub confidence: f64,
    pub small_sample_warning: bool,
}

/// `ln(θ^k (1−θ)^(t−k))` with `0·ln 0 = 0`.
pub fn log_likelihood(outcome: &CampaignOutcome, theta: f64) -> Result<f64> {
    check_probability("theta", theta)?;
    Ok(log_likelihood_unchecked(outcome, theta))
}

pub(crate) fn log_likelihood_unchecked(outcome: &CampaignOutcome, theta: f64) -> f64 {
    let fail = match outcome.failures {
        0 => 0.0,
        k => k as f64 * theta.ln(),
    };
    let pass = match outcome.successes() {
        0 => 0.0,
        s => s as f64 * (-theta).ln_1p(),
    };
    fail + pass
}

/// Bernoulli sequence likelihood `θ^k (1−θ)^(t−k)`, with `0^0 = 1`.
pub fn likelihood(outcome: &CampaignOutcome, theta: f64) -> Result<f64> {
    Ok(log_likelihood(outcome, theta)?.exp())
}

/// Maximum-likelihood estimate `k/t`.
pub fn mle_pfs(outcome: &CampaignOutcome) -> Result<f64> {
    outcome.require_tests()?;
    Ok(outcome.failures as f64 / outcome.tests as f64)
}

/// Posterior mean `E[θ | k, t]` under `prior`.
///
/// Beta priors use the conjugate closed form `(a+k)/(a+b+t)`. Tabulated
/// priors are integrated with a composite Simpson rule on their own grid,
/// with the integrand formed in log space.
pub fn posterior_mean(outcome: &CampaignOutcome, prior: &PriorSpec) -> Result<PosteriorSummary> {
    prior.validate()?;
    match prior {
        PriorSpec::Beta { a, b } => Ok(PosteriorSummary {
            mean: (a + outcome.failures as f64) / (a + b + outcome.tests as f64),
            method: PosteriorMethod::ClosedFormConjugate,
            quadrature_error: 0.0,
        }),
        PriorSpec::Grid { values } => {
            let (mean, err) = quadrature::posterior_mean_on_grid(outcome, values)?;
            Ok(PosteriorSummary {
                mean,
                method: PosteriorMethod::Quadrature,
                quadrature_error: err,
            })
        }
    }
}

/// Wald variance `θ̂(1−θ̂)/t` with `θ̂ = k/t`.
///
/// Zero when `k = 0` or `k = t`; callers should check
/// [`CampaignOutcome::small_sample`] before trusting it.
pub fn wald_variance(outcome: &CampaignOutcome) -> Result<f64> {
    let theta = mle_pfs(outcome)?;
    Ok(theta * (1.0 - theta) / outcome.tests as f64)
}

/// Two-sided Wald interval `θ̂ ± z·σ`, clamped to `[0, 1]`.
pub fn wald_confidence_interval(outcome: &CampaignOutcome, confidence: f64) -> Result<WaldInterval> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::domain(format!(
            "confidence {confidence} must lie in (0, 1)"
        )));
    }
    let estimate = mle_pfs(outcome)?;
    let standard_error = wald_variance(outcome)?.sqrt();
    let z = normal_quantile(0.5 * (1.0 + confidence))?;
    Ok(WaldInterval {
        estimate,
        standard_error,
        lower: (estimate - z * standard_error).max(0.0),
        upper: (estimate + z * standard_error).min(1.0),
        confidence,
        small_sample_warning: outcome.small_sample(),
    })
}

fn check_weights(samples: &[WeightedSample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InsufficientData(
            "importance sampling needs at least one sample".into(),
        ));
    }
    let mut total = 0.0;
    for s in samples {
        if !(s.weight.is_finite() && s.weight >= 0.0) {
            return Err(Error::domain(format!(
                "importance weight {} for `{}` is not finite and nonnegative",
                s.weight, s.scenario
            )));
        }
        total += s.weight;
    }
    if total <= 0.0 {
        return Err(Error::DegenerateWeights);
    }
    Ok(total)
}

/// Self-normalized importance-sampling estimate `Σ w·1{fail} / Σ w`
/// with a delta-method standard error.
pub fn importance_sampling_pfs(samples: &[WeightedSample]) -> Result<ImportanceEstimate> {
    let total = check_weights(samples)?;
    let hits: f64 = samples.iter().filter(|s| s.failed).map(|s| s.weight).sum();
    let estimate = (hits / total).clamp(0.0, 1.0);
    let spread: f64 = samples
        .iter()
        .map(|s| {
            let r = if s.failed { 1.0 } else { 0.0 } - estimate;
            s.weight * s.weight * r * r
        })
        .sum();
    let sum_sq: f64 = samples.iter().map(|s| s.weight * s.weight).sum();
    Ok(ImportanceEstimate {
        estimate,
        standard_error: spread.sqrt() / total,
        effective_sample_size: total * total / sum_sq,
    })
}

/// Plain importance-sampling mean `(1/m) Σ w·1{fail}`.
///
/// Unbiased for the conditional pfs only when the weights are taken against
/// the *conditional* operational profile of the subdomain.
pub fn plain_importance_mean(samples: &[WeightedSample]) -> Result<f64> {
    check_weights(samples)?;
    let hits: f64 = samples.iter().filter(|s| s.failed).map(|s| s.weight).sum();
    Ok(hits / samples.len() as f64)
}

/// Partition pooling `Σ θ̂_i · Op_i`.
pub fn pooled_total_pfs(estimates: &[f64], masses: &[f64]) -> Result<f64> {
    if estimates.len() != masses.len() {
        return Err(Error::domain(format!(
            "{} subdomain estimates but {} subdomain masses",
            estimates.len(),
            masses.len()
        )));
    }
    for &e in estimates {
        check_probability("subdomain estimate", e)?;
    }
    for &m in masses {
        check_probability("subdomain mass", m)?;
    }
    let total: f64 = masses.iter().sum();
    if (total - 1.0).abs() > crate::scenario_space::MASS_TOLERANCE {
        return Err(Error::domain(format!(
            "subdomain masses sum to {total}, not 1"
        )));
    }
    let pooled: f64 = estimates.iter().zip(masses).map(|(e, m)| e * m).sum();
    Ok(pooled.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario_space::{FailureRegion, OperationalSpace};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn outcome(t: u64, k: u64) -> CampaignOutcome {
        CampaignOutcome::new(t, k).unwrap()
    }

    #[test]
    fn outcome_rejects_excess_failures() {
        assert!(CampaignOutcome::new(3, 4).is_err());
    }

    #[test]
    fn likelihood_examples() {
        assert_eq!(likelihood(&outcome(0, 0), 0.37).unwrap(), 1.0);
        assert_eq!(likelihood(&outcome(0, 0), 0.0).unwrap(), 1.0);
        assert!((likelihood(&outcome(2, 1), 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(likelihood(&outcome(3, 0), 0.0).unwrap(), 1.0);
        assert_eq!(likelihood(&outcome(3, 3), 1.0).unwrap(), 1.0);
        assert_eq!(likelihood(&outcome(3, 1), 0.0).unwrap(), 0.0);
        assert!(likelihood(&outcome(3, 1), 1.5).is_err());
        assert!(likelihood(&outcome(3, 1), -0.1).is_err());
    }

    #[test]
    fn likelihood_matches_log_domain_oracle() {
        let o = outcome(500, 17);
        let theta: f64 = 0.034;
        let oracle = (17.0 * theta.ln() + 483.0 * (1.0 - theta).ln()).exp();
        let got = likelihood(&o, theta).unwrap();
        assert!(((got - oracle) / oracle).abs() < 1e-12, "{got} vs {oracle}");
    }

    #[test]
    fn mle_examples() {
        assert_eq!(mle_pfs(&outcome(500, 17)).unwrap(), 0.034);
        assert_eq!(mle_pfs(&outcome(2000, 45)).unwrap(), 0.0225);
        assert_eq!(mle_pfs(&outcome(100, 0)).unwrap(), 0.0);
        assert!(matches!(
            mle_pfs(&outcome(0, 0)),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn wald_variance_examples() {
        assert!((wald_variance(&outcome(500, 17)).unwrap() - 6.57e-5).abs() <= 1e-7);
        assert!((wald_variance(&outcome(2000, 45)).unwrap() - 1.1e-5).abs() <= 1e-7);
        assert_eq!(wald_variance(&outcome(100, 0)).unwrap(), 0.0);
        assert!(wald_variance(&outcome(0, 0)).is_err());
    }

    #[test]
    fn wald_interval_examples() {
        let ci = wald_confidence_interval(&outcome(50_000, 1415), 0.95).unwrap();
        assert!((ci.lower - 0.02685).abs() <= 1e-4);
        assert!((ci.upper - 0.02975).abs() <= 1e-4);
        assert!(!ci.small_sample_warning);

        let zero = wald_confidence_interval(&outcome(100, 0), 0.95).unwrap();
        assert_eq!((zero.lower, zero.upper), (0.0, 0.0));
        assert!(zero.small_sample_warning);

        let ci = wald_confidence_interval(&outcome(500, 17), 0.95).unwrap();
        assert!((ci.lower - 0.01812).abs() <= 2e-4);
        assert!((ci.upper - 0.04988).abs() <= 2e-4);

        assert!(wald_confidence_interval(&outcome(10, 5), 1.0).is_err());
        assert!(wald_confidence_interval(&outcome(10, 5), 0.0).is_err());
    }

    #[test]
    fn interval_is_clamped() {
        let ci = wald_confidence_interval(&outcome(10, 1), 0.99).unwrap();
        assert_eq!(ci.lower, 0.0);
        assert!(ci.small_sample_warning);
    }

    #[test]
    fn posterior_beta_examples() {
        let uniform = PriorSpec::Beta { a: 1.0, b: 1.0 };
        assert_eq!(posterior_mean(&outcome(0, 0), &uniform).unwrap().mean, 0.5);
        let p = posterior_mean(&outcome(500, 17), &uniform).unwrap();
        assert_eq!(p.mean, 18.0 / 502.0);
        assert_eq!(p.method, PosteriorMethod::ClosedFormConjugate);
        assert_eq!(p.quadrature_error, 0.0);
        assert!(posterior_mean(&outcome(1, 0), &PriorSpec::Beta { a: 0.0, b: 1.0 }).is_err());
    }

    #[test]
    fn tabulated_uniform_matches_conjugate() {
        let prior = PriorSpec::Grid {
            values: vec![1.0; 4097],
        };
        let p = posterior_mean(&outcome(500, 17), &prior).unwrap();
        assert_eq!(p.method, PosteriorMethod::Quadrature);
        assert!((p.mean - 18.0 / 502.0).abs() < 1e-6, "{}", p.mean);
        assert!(p.quadrature_error < 1e-6);
    }

    #[test]
    fn tabulated_prior_validation() {
        assert!(PriorSpec::Grid { values: vec![1.0] }.validate().is_err());
        assert!(PriorSpec::Grid { values: vec![2.0; 11] }.validate().is_err());
        assert!(PriorSpec::Grid { values: vec![1.0, -1.0, 3.0] }.validate().is_err());
        let normalized = PriorSpec::grid_normalized(vec![2.0; 11]).unwrap();
        assert!(normalized.validate().is_ok());
        assert!((normalized.mean().unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_tabulated_prior() {
        // all prior mass sits at θ = 0 but failures were observed
        let mut values = vec![0.0; 101];
        values[0] = 200.0;
        let prior = PriorSpec::Grid { values };
        assert!(matches!(
            posterior_mean(&outcome(10, 3), &prior),
            Err(Error::NumericalDegeneracy(_))
        ));
    }

    #[test]
    fn posterior_survives_large_campaigns() {
        let prior = PriorSpec::Grid {
            values: vec![1.0; 8193],
        };
        let p = posterior_mean(&outcome(200_000, 2_000), &prior).unwrap();
        assert!((p.mean - 2001.0 / 200_002.0).abs() < 1e-6);
    }

    #[test]
    fn importance_uniform_weights_is_failure_fraction() {
        let samples: Vec<_> = (0..10)
            .map(|j| WeightedSample {
                scenario: format!("x{j}"),
                failed: j < 3,
                weight: 0.25,
            })
            .collect();
        let est = importance_sampling_pfs(&samples).unwrap();
        assert!((est.estimate - 0.3).abs() < 1e-15);
        assert!((est.effective_sample_size - 10.0).abs() < 1e-9);
    }

    #[test]
    fn importance_degenerate_weights() {
        let samples = vec![WeightedSample {
            scenario: "a".into(),
            failed: true,
            weight: 0.0,
        }];
        assert!(matches!(
            importance_sampling_pfs(&samples),
            Err(Error::DegenerateWeights)
        ));
        assert!(importance_sampling_pfs(&[]).is_err());
    }

    /// Two-scenario subdomain: conditional Op (0.5, 0.5), proposal (0.9, 0.1),
    /// only the second scenario fails.
    fn two_point_sample(second: bool) -> WeightedSample {
        if second {
            WeightedSample { scenario: "b".into(), failed: true, weight: 0.5 / 0.1 }
        } else {
            WeightedSample { scenario: "a".into(), failed: false, weight: 0.5 / 0.9 }
        }
    }

    #[test]
    fn plain_importance_mean_unbiased_by_enumeration() {
        // exact expectation over the m = 1 outcome space
        let expectation = 0.9 * plain_importance_mean(&[two_point_sample(false)]).unwrap()
            + 0.1 * plain_importance_mean(&[two_point_sample(true)]).unwrap();
        assert!((expectation - 0.5).abs() < 1e-15);

        // and over all 2^3 ordered outcomes of m = 3
        let mut expectation = 0.0;
        for mask in 0..8u32 {
            let draws: Vec<_> = (0..3).map(|b| two_point_sample(mask >> b & 1 == 1)).collect();
            let prob: f64 = (0..3).map(|b| if mask >> b & 1 == 1 { 0.1 } else { 0.9 }).product();
            expectation += prob * plain_importance_mean(&draws).unwrap();
        }
        assert!((expectation - 0.5).abs() < 1e-14);
    }

    #[test]
    fn self_normalized_estimate_converges() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let samples: Vec<_> = (0..100_000)
            .map(|_| two_point_sample(rng.random::<f64>() < 0.1))
            .collect();
        let est = importance_sampling_pfs(&samples).unwrap();
        assert!(
            (est.estimate - 0.5).abs() <= 3.0 * est.standard_error,
            "{est:?}"
        );
    }

    #[test]
    fn importance_consistent_with_conditional_truth() {
        let space = OperationalSpace::from_entries(
            2,
            [("a", 1, 0.2), ("b", 1, 0.1), ("c", 1, 0.1), ("d", 2, 0.6)],
        )
        .unwrap();
        let region = FailureRegion::new(["c"]);
        let truth = space.conditional_pfs(&region, 1).unwrap();
        let proposal = crate::scenario_space::ProposalDistribution {
            subdomain: 1,
            mass: [("a".into(), 0.2), ("b".into(), 0.3), ("c".into(), 0.5)].into(),
        };
        let sampler = space.proposal_sampler(&proposal).unwrap();
        let mask = space.region_mask(&region).unwrap();
        let mut outside = 0;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let samples: Vec<_> = (0..20_000)
                .map(|_| {
                    let j = sampler.sample(&mut rng);
                    let id = space.id(j).to_string();
                    WeightedSample {
                        weight: space.mass_of(j) / proposal.mass[&id],
                        scenario: id,
                        failed: mask[j],
                    }
                })
                .collect();
            let est = importance_sampling_pfs(&samples).unwrap();
            if (est.estimate - truth).abs() > 3.0 * est.standard_error {
                outside += 1;
            }
        }
        // 3-sigma misses are ~0.3% each; allow one in twenty trials
        assert!(outside <= 1, "{outside} of 20 trials outside 3 SE");
    }

    #[test]
    fn pooled_examples() {
        assert!((pooled_total_pfs(&[0.3, 0.3, 0.3], &[0.2, 0.5, 0.3]).unwrap() - 0.3).abs() < 1e-15);
        assert!((pooled_total_pfs(&[0.2, 0.0], &[0.1, 0.9]).unwrap() - 0.02).abs() < 1e-15);
        assert!(pooled_total_pfs(&[0.2], &[0.1, 0.9]).is_err());
        assert!(pooled_total_pfs(&[0.2, 0.1], &[0.1, 0.8]).is_err());
    }

    #[test]
    fn pooling_ground_truth_recovers_true_pfs() {
        let space = OperationalSpace::from_entries(
            3,
            [("a", 1, 0.2), ("b", 1, 0.1), ("c", 2, 0.3), ("d", 3, 0.25), ("e", 3, 0.15)],
        )
        .unwrap();
        let region = FailureRegion::new(["b", "d"]);
        let thetas: Vec<f64> = (1..=3).map(|i| space.conditional_pfs(&region, i).unwrap()).collect();
        let masses: Vec<f64> = (1..=3).map(|i| space.subdomain_mass(i).unwrap()).collect();
        let pooled = pooled_total_pfs(&thetas, &masses).unwrap();
        assert!((pooled - space.true_pfs(&region).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn likelihood_maximized_near_mle() {
        for (t, k) in [(500, 17), (10, 3), (40, 39), (7, 0)] {
            let o = outcome(t, k);
            let grid = 10_000;
            let best = (0..grid)
                .map(|j| j as f64 / (grid - 1) as f64)
                .max_by(|a, b| {
                    log_likelihood(&o, *a)
                        .unwrap()
                        .total_cmp(&log_likelihood(&o, *b).unwrap())
                })
                .unwrap();
            let mle = k as f64 / t as f64;
            assert!((best - mle).abs() <= 0.5 / (grid - 1) as f64 + 1e-12, "{t},{k}: {best}");
        }
    }

    proptest! {
        #[test]
        fn posterior_monotone_in_failures(a in 0.1f64..20.0, b in 0.1f64..20.0, t in 1u64..2000, k in 0u64..2000) {
            let k = k % t;
            let prior = PriorSpec::Beta { a, b };
            let lo = posterior_mean(&outcome(t, k), &prior).unwrap().mean;
            let hi = posterior_mean(&outcome(t, k + 1), &prior).unwrap().mean;
            prop_assert!(lo <= hi);
        }

        #[test]
        fn posterior_shrinks_between_prior_and_mle(a in 0.1f64..20.0, b in 0.1f64..20.0, t in 1u64..2000, k in 0u64..2000) {
            let k = k % (t + 1);
            let o = outcome(t, k);
            let prior_mean = a / (a + b);
            let mle = mle_pfs(&o).unwrap();
            prop_assume!((prior_mean - mle).abs() > 1e-9);
            let post = posterior_mean(&o, &PriorSpec::Beta { a, b }).unwrap().mean;
            prop_assert!(post > prior_mean.min(mle) && post < prior_mean.max(mle));
        }

        #[test]
        fn log_likelihood_matches_direct_form(t in 0u64..300, k in 0u64..300, theta in 0.001f64..0.999) {
            let k = k % (t + 1);
            let o = outcome(t, k);
            let direct = k as f64 * theta.ln() + (t - k) as f64 * (1.0 - theta).ln();
            let got = log_likelihood(&o, theta).unwrap();
            prop_assert!((got - direct).abs() <= 1e-9 * direct.abs().max(1.0));
        }
    }
}
