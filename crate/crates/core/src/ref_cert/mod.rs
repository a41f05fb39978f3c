//! (ε, α) risk-estimation-fidelity certification of a simulator.
//!
//! A simulator is certified when the gap `Δ̂ = θ̂s − θ̂r` between its
//! estimated pfs and the real-world estimate satisfies
//! `Pr(|Δ̂| ≤ ε) ≥ 1 − α`. Both estimates are treated as independent
//! Gaussians with Wald variances, so `Δ̂ ~ N(μ, σ²)`.

mod workflow;

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::estimators::{mle_pfs, wald_confidence_interval, wald_variance, CampaignOutcome, WaldInterval};
use crate::mc::{run_replicated, EmpiricalEstimate, SeedPolicy, Workers};
use crate::normal::normal_cdf;

pub use workflow::{
    growth_gain, load_jsonl, workflow_step, Event, HistoryEntry, Phase, WorkflowConfig,
    WorkflowState, DEFAULT_GROWTH_THRESHOLD,
};

/// Warning attached to every Gaussian coverage evaluation whose inputs
/// have few failures or few successes on either side.
pub const RARE_FAILURE_WARNING: &str =
    "few failures or successes: the normal approximation to the sample means is unreliable";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefCriterion {
    pub epsilon: f64,
    pub alpha: f64,
    /// Interpret `epsilon` relative to the real-world estimate.
    #[serde(default)]
    pub relative: bool,
}

impl RefCriterion {
    pub fn new(epsilon: f64, alpha: f64) -> Result<Self> {
        for (name, v) in [("epsilon", epsilon), ("alpha", alpha)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::domain(format!("{name} = {v} must lie strictly inside (0, 1)")));
            }
        }
        Ok(RefCriterion {
            epsilon,
            alpha,
            relative: false,
        })
    }

    /// Tolerance `epsilon · θ̂r`.
    pub fn relative(epsilon: f64, alpha: f64) -> Result<Self> {
        Ok(RefCriterion {
            relative: true,
            ..Self::new(epsilon, alpha)?
        })
    }

    /// Absolute tolerance applied to `pair`.
    pub fn effective_epsilon(&self, pair: &PairedCampaigns) -> f64 {
        if self.relative {
            self.epsilon * pair.real.failures as f64 / pair.real.tests as f64
        } else {
            self.epsilon
        }
    }
}

/// A real-world campaign and a comparable simulated one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairedCampaigns {
    pub real: CampaignOutcome,
    pub synthetic: CampaignOutcome,
}

impl PairedCampaigns {
    pub fn new(real: CampaignOutcome, synthetic: CampaignOutcome) -> Result<Self> {
        for (side, c) in [("real", real), ("synthetic", synthetic)] {
            CampaignOutcome::new(c.tests, c.failures)?;
            if c.tests == 0 {
                return Err(Error::InsufficientData(format!("{side} campaign has no tests")));
            }
        }
        Ok(PairedCampaigns { real, synthetic })
    }

    pub fn swapped(&self) -> Self {
        PairedCampaigns {
            real: self.synthetic,
            synthetic: self.real,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaDistribution {
    pub mu: f64,
    pub sigma: f64,
    pub real_small_sample: bool,
    pub synthetic_small_sample: bool,
    /// `σ = 0` while `μ ≠ 0`: the gap is a point mass away from zero.
    pub degenerate: bool,
}

impl DeltaDistribution {
    /// `Pr(|Δ̂| ≤ ε)`; a point mass when `σ = 0`.
    pub fn coverage(&self, epsilon: f64) -> f64 {
        let m = self.mu.abs();
        if self.sigma == 0.0 {
            return if m <= epsilon { 1.0 } else { 0.0 };
        }
        (normal_cdf((epsilon - m) / self.sigma) - normal_cdf((-epsilon - m) / self.sigma)).max(0.0)
    }

    fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.real_small_sample || self.synthetic_small_sample {
            w.push(RARE_FAILURE_WARNING.to_string());
        }
        if self.degenerate {
            w.push("zero variance on both sides: certification reduces to |mu| <= epsilon".to_string());
        }
        w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefAssessment {
    pub criterion: RefCriterion,
    pub effective_epsilon: f64,
    pub delta: DeltaDistribution,
    pub coverage: f64,
    pub certified: bool,
    pub epsilon_star: Option<f64>,
    pub warnings: Vec<String>,
}

/// Gaussian approximation of `θ̂s − θ̂r`.
pub fn delta_distribution(pair: &PairedCampaigns) -> Result<DeltaDistribution> {
    let PairedCampaigns { real, synthetic } = PairedCampaigns::new(pair.real, pair.synthetic)?;
    let num = i128::from(synthetic.failures) * i128::from(real.tests)
        - i128::from(real.failures) * i128::from(synthetic.tests);
    let den = i128::from(synthetic.tests) * i128::from(real.tests);
    let mu = num as f64 / den as f64;
    let sigma = (wald_variance(&synthetic)? + wald_variance(&real)?).sqrt();
    Ok(DeltaDistribution {
        mu,
        sigma,
        real_small_sample: real.small_sample(),
        synthetic_small_sample: synthetic.small_sample(),
        degenerate: sigma == 0.0 && mu != 0.0,
    })
}

/// Evaluates the criterion on a pair of campaigns. Coverage exactly equal to
/// `1 − α` certifies.
pub fn certify_ref(pair: &PairedCampaigns, criterion: &RefCriterion) -> Result<RefAssessment> {
    let delta = delta_distribution(pair)?;
    let effective_epsilon = criterion.effective_epsilon(pair);
    let coverage = delta.coverage(effective_epsilon);
    let mut warnings = delta.warnings();
    if criterion.relative {
        warnings.push(format!(
            "relative tolerance: epsilon {} scaled by the real-world estimate to {}",
            criterion.epsilon, effective_epsilon
        ));
    }
    Ok(RefAssessment {
        criterion: *criterion,
        effective_epsilon,
        delta,
        coverage,
        certified: coverage >= 1.0 - criterion.alpha,
        epsilon_star: None,
        warnings,
    })
}

/// Smallest absolute ε whose coverage reaches `1 − α`.
///
/// Bisection runs until the bracket stops shrinking and returns its upper
/// end, so the result always certifies.
pub fn smallest_certifiable_epsilon(pair: &PairedCampaigns, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha = {alpha} must lie strictly inside (0, 1)")));
    }
    let delta = delta_distribution(pair)?;
    Ok(epsilon_star_of(&delta, alpha))
}

fn epsilon_star_of(delta: &DeltaDistribution, alpha: f64) -> f64 {
    if delta.sigma == 0.0 {
        return delta.mu.abs();
    }
    let target = 1.0 - alpha;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while delta.coverage(hi) < target {
        lo = hi;
        hi *= 2.0;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return hi;
        }
        if delta.coverage(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// Assessment with `epsilon_star` filled in.
pub fn certify_with_epsilon_star(pair: &PairedCampaigns, criterion: &RefCriterion) -> Result<RefAssessment> {
    let mut a = certify_ref(pair, criterion)?;
    a.epsilon_star = Some(epsilon_star_of(&a.delta, criterion.alpha));
    Ok(a)
}

/// The three sources of the observed gap, for simulation studies with known truths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorDecomposition {
    /// `θ̂s − θs`
    pub synthetic_sampling: f64,
    /// `θs − θr`
    pub simulator_bias: f64,
    /// `θr − θ̂r`
    pub real_sampling: f64,
}

impl ErrorDecomposition {
    pub fn total(&self) -> f64 {
        self.synthetic_sampling + self.simulator_bias + self.real_sampling
    }
}

pub fn decompose_error(theta_r_true: f64, theta_s_true: f64, pair: &PairedCampaigns) -> Result<ErrorDecomposition> {
    check_probability("theta_r_true", theta_r_true)?;
    check_probability("theta_s_true", theta_s_true)?;
    let hat_r = mle_pfs(&pair.real)?;
    let hat_s = mle_pfs(&pair.synthetic)?;
    Ok(ErrorDecomposition {
        synthetic_sampling: hat_s - theta_s_true,
        simulator_bias: theta_s_true - theta_r_true,
        real_sampling: theta_r_true - hat_r,
    })
}

/// Confidence interval for the pfs from a large certified simulation campaign.
pub fn scale_up_interval(outcome: &CampaignOutcome, confidence: f64) -> Result<WaldInterval> {
    wald_confidence_interval(outcome, confidence)
}

/// Fraction of simulated paired campaigns that certify, with its standard error.
///
/// Each replicate draws `k_r ~ Bin(t_r, θr)` and `k_s ~ Bin(t_s, θs)` and
/// runs [`certify_ref`] on the result.
#[allow(clippy::too_many_arguments)]
pub fn ref_operating_characteristics(
    theta_r_true: f64,
    theta_s_true: f64,
    t_r: u64,
    t_s: u64,
    criterion: &RefCriterion,
    replicates: u64,
    policy: &SeedPolicy,
    workers: Workers,
) -> Result<EmpiricalEstimate> {
    check_probability("theta_r_true", theta_r_true)?;
    check_probability("theta_s_true", theta_s_true)?;
    if t_r == 0 || t_s == 0 {
        return Err(Error::InsufficientData("both campaigns need at least one test".into()));
    }
    let bad = |e: rand_distr::BinomialError| Error::domain(e.to_string());
    let real = Binomial::new(t_r, theta_r_true).map_err(bad)?;
    let synthetic = Binomial::new(t_s, theta_s_true).map_err(bad)?;
    run_replicated(
        |rng| {
            let pair = PairedCampaigns {
                real: CampaignOutcome { tests: t_r, failures: real.sample(rng) },
                synthetic: CampaignOutcome { tests: t_s, failures: synthetic.sample(rng) },
            };
            let certified = certify_ref(&pair, criterion).is_ok_and(|a| a.certified);
            f64::from(u8::from(certified))
        },
        replicates,
        policy,
        workers,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal::normal_quantile;
    use proptest::prelude::*;

    fn pair(tr: u64, kr: u64, ts: u64, ks: u64) -> PairedCampaigns {
        PairedCampaigns::new(CampaignOutcome::new(tr, kr).unwrap(), CampaignOutcome::new(ts, ks).unwrap()).unwrap()
    }

    fn crit() -> RefCriterion {
        RefCriterion::new(0.02, 0.05).unwrap()
    }

    #[test]
    fn criterion_bounds() {
        assert!(RefCriterion::new(0.0, 0.05).is_err());
        assert!(RefCriterion::new(0.02, 1.0).is_err());
        assert!(PairedCampaigns::new(CampaignOutcome::default(), CampaignOutcome { tests: 3, failures: 1 }).is_err());
    }

    #[test]
    fn delta_examples() {
        let d = delta_distribution(&pair(500, 17, 2000, 45)).unwrap();
        assert_eq!(d.mu, -0.0115);
        assert!((d.sigma - 0.00876).abs() < 1e-4);
        let d = delta_distribution(&pair(500, 17, 2000, 58)).unwrap();
        assert!((d.sigma - 0.0089).abs() < 1e-4);
        assert_eq!(delta_distribution(&pair(300, 9, 300, 9)).unwrap().mu, 0.0);
    }

    #[test]
    fn degenerate_delta() {
        let d = delta_distribution(&pair(100, 0, 100, 100)).unwrap();
        assert!(d.degenerate && d.sigma == 0.0);
        let a = certify_ref(&pair(100, 0, 100, 1), &crit()).unwrap();
        assert!(!a.delta.degenerate);
        assert!(a.warnings.iter().any(|w| w == RARE_FAILURE_WARNING));
    }

    #[test]
    fn certification_examples() {
        let a = certify_ref(&pair(500, 17, 2000, 45), &crit()).unwrap();
        assert!((a.coverage - 0.83).abs() < 0.01 && !a.certified);
        let a = certify_ref(&pair(500, 17, 4000, 102), &crit()).unwrap();
        assert!((a.coverage - 0.91).abs() < 0.01 && !a.certified);
        let a = certify_ref(&pair(500, 17, 2000, 58), &crit()).unwrap();
        assert!(a.coverage >= 0.95 && a.certified);
    }

    #[test]
    fn boundary_counts_as_certified() {
        let d = DeltaDistribution { mu: 0.0, sigma: 0.0, real_small_sample: false, synthetic_small_sample: false, degenerate: false };
        assert_eq!(d.coverage(0.0), 1.0);
        let p = pair(400, 40, 400, 40);
        let eps = smallest_certifiable_epsilon(&p, 0.05).unwrap();
        let a = certify_ref(&p, &RefCriterion::new(eps, 0.05).unwrap()).unwrap();
        assert!(a.certified);
    }

    #[test]
    fn epsilon_star_examples() {
        let p = pair(500, 17, 2000, 45);
        let e = smallest_certifiable_epsilon(&p, 0.05).unwrap();
        assert!((e - 0.0260).abs() < 5e-4);
        let d = delta_distribution(&p).unwrap();
        assert!((d.coverage(e) - 0.95).abs() < 1e-9);

        let sym = pair(1000, 30, 1000, 30);
        let d = delta_distribution(&sym).unwrap();
        let e = smallest_certifiable_epsilon(&sym, 0.05).unwrap();
        assert!((e - d.sigma * normal_quantile(0.975).unwrap()).abs() < 1e-9);

        let point = pair(100, 0, 100, 1);
        assert!(delta_distribution(&point).unwrap().sigma > 0.0);
        let deg = pair(100, 0, 100, 100);
        assert_eq!(smallest_certifiable_epsilon(&deg, 0.05).unwrap(), 1.0);
    }

    #[test]
    fn point_mass_epsilon_star() {
        let d = DeltaDistribution { mu: 0.01, sigma: 0.0, real_small_sample: true, synthetic_small_sample: true, degenerate: true };
        assert_eq!(epsilon_star_of(&d, 0.05), 0.01);
        assert_eq!(d.coverage(0.01), 1.0);
        assert_eq!(d.coverage(0.0099), 0.0);
    }

    #[test]
    fn decomposition_example() {
        let p = pair(500, 17, 2000, 45);
        let d = decompose_error(0.03, 0.025, &p).unwrap();
        assert!((d.synthetic_sampling + 0.0025).abs() < 1e-15);
        assert!((d.simulator_bias + 0.005).abs() < 1e-15);
        assert!((d.real_sampling + 0.004).abs() < 1e-15);
        assert!((d.total() + 0.0115).abs() < 1e-15);
        let same = decompose_error(0.034, 0.034, &pair(500, 17, 500, 17)).unwrap();
        assert_eq!((same.synthetic_sampling, same.simulator_bias, same.real_sampling), (0.0, 0.0, 0.0));
    }

    #[test]
    fn scale_up_example() {
        let ci = scale_up_interval(&CampaignOutcome::new(50_000, 1415).unwrap(), 0.95).unwrap();
        assert!((ci.standard_error - 0.000741).abs() < 1e-6);
        assert!((ci.lower - 0.02685).abs() < 1e-4 && (ci.upper - 0.02975).abs() < 1e-4);
        let zero = scale_up_interval(&CampaignOutcome::new(1000, 0).unwrap(), 0.95).unwrap();
        assert_eq!((zero.lower, zero.upper), (0.0, 0.0));
        assert!(zero.small_sample_warning);
    }

    #[test]
    fn relative_mode_scales_epsilon() {
        let p = pair(500, 17, 2000, 45);
        let c = RefCriterion::relative(0.5, 0.05).unwrap();
        let a = certify_ref(&p, &c).unwrap();
        assert!((a.effective_epsilon - 0.017).abs() < 1e-15);
        assert!(a.warnings.iter().any(|w| w.starts_with("relative tolerance")));
    }

    #[test]
    fn operating_characteristics() {
        let p = SeedPolicy::new(2024);
        let good = ref_operating_characteristics(0.03, 0.03, 10_000, 10_000, &crit(), 2000, &p, Workers::Auto).unwrap();
        assert!(good.mean >= 0.99);
        let bad = ref_operating_characteristics(0.03, 0.08, 10_000, 10_000, &crit(), 2000, &p, Workers::Auto).unwrap();
        assert!(bad.mean <= 0.01);
        let one_a = ref_operating_characteristics(0.03, 0.04, 500, 2000, &crit(), 1, &p, Workers::Auto).unwrap();
        let one_b = ref_operating_characteristics(0.03, 0.04, 500, 2000, &crit(), 1, &p, Workers::Fixed(2)).unwrap();
        assert_eq!(one_a, one_b);
    }

    fn outcome() -> impl Strategy<Value = CampaignOutcome> {
        (1u64..5000).prop_flat_map(|t| (Just(t), 0..=t)).prop_map(|(t, k)| CampaignOutcome { tests: t, failures: k })
    }

    proptest! {
        #[test]
        fn coverage_increases_in_epsilon(r in outcome(), s in outcome(), e in 0.001f64..0.5, de in 0.001f64..0.5) {
            let d = delta_distribution(&PairedCampaigns { real: r, synthetic: s }).unwrap();
            prop_assert!(d.coverage(e + de) >= d.coverage(e));
        }

        #[test]
        fn coverage_decreases_in_abs_mu(mu in 0.0f64..0.5, dm in 0.0f64..0.5, sigma in 1e-4f64..0.2, e in 0.001f64..0.5) {
            let mk = |mu| DeltaDistribution { mu, sigma, real_small_sample: false, synthetic_small_sample: false, degenerate: false };
            prop_assert!(mk(mu + dm).coverage(e) <= mk(mu).coverage(e));
            prop_assert_eq!(mk(-mu).coverage(e), mk(mu).coverage(e));
        }

        #[test]
        fn coverage_nonincreasing_in_sigma_when_mu_inside(frac in 0.0f64..=1.0, e in 0.001f64..0.5, s in 1e-4f64..0.2, ds in 0.0f64..0.2) {
            let mk = |sigma| DeltaDistribution { mu: frac * e, sigma, real_small_sample: false, synthetic_small_sample: false, degenerate: false };
            prop_assert!(mk(s + ds).coverage(e) <= mk(s).coverage(e) + 1e-15);
        }

        #[test]
        fn epsilon_star_brackets_certification(r in outcome(), s in outcome(), alpha in 0.01f64..0.5) {
            let p = PairedCampaigns { real: r, synthetic: s };
            let d = delta_distribution(&p).unwrap();
            prop_assume!(d.sigma > 0.0);
            let e = smallest_certifiable_epsilon(&p, alpha).unwrap();
            prop_assert!(d.coverage(e + 1e-6) >= 1.0 - alpha);
            prop_assert!(d.coverage(e - 1e-6) < 1.0 - alpha);
        }

        #[test]
        fn swap_symmetry(r in outcome(), s in outcome(), e in 0.001f64..0.5) {
            let p = PairedCampaigns { real: r, synthetic: s };
            let a = delta_distribution(&p).unwrap();
            let b = delta_distribution(&p.swapped()).unwrap();
            prop_assert_eq!(a.mu, -b.mu);
            prop_assert_eq!(a.sigma, b.sigma);
            prop_assert_eq!(a.coverage(e), b.coverage(e));
        }

        #[test]
        fn zero_mu_threshold(t in 10u64..5000, frac in 0.05f64..0.95, alpha in 0.01f64..0.5, e in 0.001f64..0.3) {
            let k = ((t as f64) * frac) as u64;
            let p = pair(t, k, t, k);
            let d = delta_distribution(&p).unwrap();
            let threshold = d.sigma * normal_quantile(1.0 - alpha / 2.0).unwrap();
            prop_assume!((e - threshold).abs() > 1e-9);
            let certified = certify_ref(&p, &RefCriterion::new(e, alpha).unwrap()).unwrap().certified;
            prop_assert_eq!(certified, e >= threshold);
        }

        #[test]
        fn decomposition_telescopes(r in outcome(), s in outcome(), tr in 0.0f64..=1.0, ts in 0.0f64..=1.0) {
            let p = PairedCampaigns { real: r, synthetic: s };
            let d = decompose_error(tr, ts, &p).unwrap();
            let direct = mle_pfs(&s).unwrap() - mle_pfs(&r).unwrap();
            prop_assert!((d.total() - direct).abs() <= 4.0 * f64::EPSILON);
        }
    }
}
