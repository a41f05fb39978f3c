//! Debug effectiveness of mile-based versus scenario-based testing.
//!
//! The model has a single failure region `F` with true pfs `q`. A campaign
//! either hits `F` at least once, after which the region is fixed and the
//! residual pfs is 0, or misses it and leaves the pfs at `q`:
//!
//! * mile-based testing draws `t` scenarios from the operational profile,
//!   so `E[θ] = q(1−q)^t`;
//! * scenario-based testing draws `t_i` scenarios from a generator inside
//!   each subdomain, hitting `F` with probability `d_i` per draw, so
//!   `E[θ] = q ∏(1−d_i)^(t_i)`.
//!
//! Verdicts always come from these exact expressions.

mod sweep;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::mc::{run_replicated, EmpiricalEstimate, SeedPolicy, Workers};
use crate::scenario_space::{
    DiscreteSampler, FailureRegion, OperationalSpace, ProposalDistribution,
};

pub use sweep::{
    run_sweep, write_sweep_csv, ConcentratedGrid, SweepConfig, SweepParams, SweepRow, UniformGrid,
};

/// Factor used to label `≪` / `≫` regimes.
pub const REGIME_FACTOR: f64 = 10.0;

/// Expectations within this relative distance are reported as a tie.
pub const TIE_TOLERANCE: f64 = 1e-15;

/// Single-failure-region model over a scenario space.
#[derive(Debug, Clone)]
pub struct SingleRegionModel {
    space: OperationalSpace,
    region: FailureRegion,
    mask: Vec<bool>,
    q: f64,
    generators: Vec<Option<DiscreteSampler>>,
    detection: Vec<f64>,
}

impl SingleRegionModel {
    /// Model whose subdomain generators are the conditional operational profiles.
    ///
    /// Subdomains with zero operational mass get no generator; allocating
    /// tests to them is an error.
    pub fn new(space: OperationalSpace, region: FailureRegion) -> Result<Self> {
        Self::with_proposals(space, region, &[])
    }

    /// Model with explicit generators for some subdomains.
    pub fn with_proposals(
        space: OperationalSpace,
        region: FailureRegion,
        proposals: &[ProposalDistribution],
    ) -> Result<Self> {
        let mask = space.region_mask(&region)?;
        let q = space.true_pfs(&region)?;
        let n = space.n_subdomains();
        let mut generators = Vec::with_capacity(n);
        let mut detection = Vec::with_capacity(n);
        for i in 1..=n {
            match proposals.iter().find(|p| p.subdomain == i) {
                Some(p) => {
                    generators.push(Some(space.generator_sampler(p)?));
                    let hit: f64 = p
                        .mass
                        .iter()
                        .filter(|(id, _)| space.index_of(id).is_some_and(|j| mask[j]))
                        .map(|(_, m)| m)
                        .sum();
                    detection.push(hit.clamp(0.0, 1.0));
                }
                None if space.subdomain_mass(i)? > 0.0 => {
                    generators.push(Some(space.conditional_sampler(i)?));
                    detection.push(space.conditional_pfs(&region, i)?);
                }
                None => {
                    generators.push(None);
                    detection.push(0.0);
                }
            }
        }
        Ok(SingleRegionModel {
            space,
            region,
            mask,
            q,
            generators,
            detection,
        })
    }

    pub fn space(&self) -> &OperationalSpace {
        &self.space
    }

    pub fn region(&self) -> &FailureRegion {
        &self.region
    }

    /// True pfs of the failure region.
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Per-subdomain detection rates `d_i` (index `i − 1`).
    pub fn detection_rates(&self) -> &[f64] {
        &self.detection
    }

    fn check_allocation(&self, alloc: &Allocation) -> Result<()> {
        if alloc.per_subdomain.len() != self.space.n_subdomains() {
            return Err(Error::domain(format!(
                "allocation covers {} subdomains, model has {}",
                alloc.per_subdomain.len(),
                self.space.n_subdomains()
            )));
        }
        for (i, (&t_i, g)) in alloc.per_subdomain.iter().zip(&self.generators).enumerate() {
            if t_i > 0 && g.is_none() {
                return Err(Error::UndefinedConditional(i + 1));
            }
        }
        Ok(())
    }
}

/// Test budget per subdomain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub per_subdomain: Vec<u64>,
}

impl Allocation {
    pub fn total(&self) -> u64 {
        self.per_subdomain.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllocationPolicy {
    /// `⌊t/n⌋` each, with the remainder going one apiece to subdomains `1..=r`.
    Equal,
    Explicit(Vec<u64>),
}

pub fn allocate_budget(t: u64, n: usize, policy: &AllocationPolicy) -> Result<Allocation> {
    if n == 0 {
        return Err(Error::domain("cannot allocate over zero subdomains"));
    }
    match policy {
        AllocationPolicy::Equal => {
            let base = t / n as u64;
            let rem = (t % n as u64) as usize;
            Ok(Allocation {
                per_subdomain: (0..n).map(|i| base + u64::from(i < rem)).collect(),
            })
        }
        AllocationPolicy::Explicit(list) => {
            if list.len() != n {
                return Err(Error::domain(format!(
                    "explicit allocation has {} entries for {n} subdomains",
                    list.len()
                )));
            }
            let total: u64 = list.iter().sum();
            if total != t {
                return Err(Error::domain(format!(
                    "explicit allocation sums to {total}, budget is {t}"
                )));
            }
            Ok(Allocation {
                per_subdomain: list.clone(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Superior {
    Mile,
    Scenario,
    Tie,
}

impl std::fmt::Display for Superior {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Superior::Mile => "mile",
            Superior::Scenario => "scenario",
            Superior::Tie => "tie",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyComparison {
    pub expected_pfs_mile: f64,
    pub expected_pfs_scenario: f64,
    pub superior: Superior,
    /// `E_mile − E_scenario`; positive when scenario-based testing wins.
    pub margin: f64,
    /// `E_scenario / E_mile`; NaN when both are zero.
    pub ratio: f64,
}

/// `t·ln(1−p)` with `0·ln 0 = 0`.
fn log_miss(p: f64, t: u64) -> f64 {
    if t == 0 {
        0.0
    } else {
        t as f64 * (-p).ln_1p()
    }
}

/// `q(1−q)^t`: expected residual pfs after mile-based testing and fixing.
pub fn expected_pfs_after_mile(q: f64, t: u64) -> Result<f64> {
    check_probability("q", q)?;
    Ok(q * log_miss(q, t).exp())
}

/// Probabilities of detecting and of missing the region: `(1 − ∏(1−d_i)^t_i, ∏(1−d_i)^t_i)`.
pub fn scenario_detection_probability(d: &[f64], alloc: &Allocation) -> Result<(f64, f64)> {
    if d.len() != alloc.per_subdomain.len() {
        return Err(Error::domain(format!(
            "{} detection rates but {} allocation entries",
            d.len(),
            alloc.per_subdomain.len()
        )));
    }
    let mut log_p = 0.0;
    for (&d_i, &t_i) in d.iter().zip(&alloc.per_subdomain) {
        check_probability("detection rate", d_i)?;
        log_p += log_miss(d_i, t_i);
    }
    let miss = log_p.exp();
    Ok((1.0 - miss, miss))
}

/// `q ∏(1−d_i)^t_i`: expected residual pfs after scenario-based testing and fixing.
pub fn expected_pfs_after_scenario(q: f64, d: &[f64], alloc: &Allocation) -> Result<f64> {
    check_probability("q", q)?;
    let (_, miss) = scenario_detection_probability(d, alloc)?;
    Ok(q * miss)
}

fn verdict(q: f64, log_miss_mile: f64, log_miss_scenario: f64) -> StrategyComparison {
    let mile = q * log_miss_mile.exp();
    let scenario = q * log_miss_scenario.exp();
    let superior = if q == 0.0 || log_miss_mile == log_miss_scenario {
        Superior::Tie
    } else {
        let scale = log_miss_mile.abs().max(log_miss_scenario.abs()).max(1.0);
        let gap = log_miss_scenario - log_miss_mile;
        if gap.is_nan() || gap.abs() <= TIE_TOLERANCE * scale {
            Superior::Tie
        } else if gap < 0.0 {
            Superior::Scenario
        } else {
            Superior::Mile
        }
    };
    StrategyComparison {
        expected_pfs_mile: mile,
        expected_pfs_scenario: scenario,
        superior,
        margin: mile - scenario,
        ratio: scenario / mile,
    }
}

/// Constant detection rate `d̄` in every subdomain.
///
/// Reduces to comparing `q(1−d̄)^t` with `q(1−q)^t`: scenario-based testing
/// wins exactly when `d̄ > q`.
pub fn uniform_spread_verdict(q: f64, d_bar: f64, t: u64) -> Result<StrategyComparison> {
    check_probability("q", q)?;
    check_probability("d_bar", d_bar)?;
    if t == 0 {
        return Err(Error::domain("uniform-spread comparison needs t ≥ 1"));
    }
    Ok(verdict(q, log_miss(q, t), log_miss(d_bar, t)))
}

/// Compares both strategies on a model for budget `t` split as `alloc`.
pub fn compare_strategies(model: &SingleRegionModel, t: u64, alloc: &Allocation) -> Result<StrategyComparison> {
    model.check_allocation(alloc)?;
    if alloc.total() != t {
        return Err(Error::domain(format!(
            "allocation spends {} tests, budget is {t}",
            alloc.total()
        )));
    }
    let scenario: f64 = model
        .detection
        .iter()
        .zip(&alloc.per_subdomain)
        .map(|(&d, &t_i)| log_miss(d, t_i))
        .sum();
    Ok(verdict(model.q, log_miss(model.q, t), scenario))
}

/// Where `Op(D_k)` sits relative to `1/n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `Op(D_k) ≪ 1/n`: the failure-prone subdomain is rare in operation.
    RareSubdomain,
    /// `Op(D_k) ≫ 1/n`: operation samples the failure-prone subdomain heavily.
    DominantSubdomain,
    Intermediate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentratedAnalysis {
    pub subdomain: usize,
    pub op_subdomain: f64,
    pub inverse_n: f64,
    pub regime: Regime,
    pub op_failure_region: f64,
    pub detection_rate: f64,
    pub allocation: Allocation,
    pub comparison: StrategyComparison,
    /// First-order approximation `q(1 − t·Op(F))` of the scenario-based expectation.
    pub first_order_scenario: f64,
    /// `|E_scenario − q(1 − t·Op(F))|`, informational only.
    pub approximation_gap: f64,
}

/// Failure region concentrated in subdomain `k`.
pub fn concentrated_region_analysis(
    model: &SingleRegionModel,
    k: usize,
    t: u64,
    policy: &AllocationPolicy,
) -> Result<ConcentratedAnalysis> {
    let space = &model.space;
    let detection_rate = space.detection_rate(&model.region, k)?;
    let op_subdomain = space.subdomain_mass(k)?;
    let n = space.n_subdomains();
    let inverse_n = 1.0 / n as f64;
    // Masses are sums of floats, so a ratio of exactly the factor may land a few ulps off.
    let slack = 1.0 + 1e-9;
    let regime = if op_subdomain * REGIME_FACTOR <= inverse_n * slack {
        Regime::RareSubdomain
    } else if op_subdomain * slack >= REGIME_FACTOR * inverse_n {
        Regime::DominantSubdomain
    } else {
        Regime::Intermediate
    };
    let allocation = allocate_budget(t, n, policy)?;
    let comparison = compare_strategies(model, t, &allocation)?;
    let first_order_scenario = model.q * (1.0 - t as f64 * model.q);
    Ok(ConcentratedAnalysis {
        subdomain: k,
        op_subdomain,
        inverse_n,
        regime,
        op_failure_region: model.q,
        detection_rate,
        approximation_gap: (comparison.expected_pfs_scenario - first_order_scenario).abs(),
        allocation,
        comparison,
        first_order_scenario,
    })
}

/// Testing strategy for [`simulate_debug_campaign`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DebugStrategy {
    /// `t` draws from the operational profile.
    Mile { tests: u64 },
    /// `t_i` draws from each subdomain generator.
    Scenario(Allocation),
}

/// Monte Carlo estimate of the expected residual pfs after one debug campaign.
pub fn simulate_debug_campaign(
    model: &SingleRegionModel,
    strategy: &DebugStrategy,
    replicates: u64,
    policy: &SeedPolicy,
    workers: Workers,
) -> Result<EmpiricalEstimate> {
    let q = model.q;
    let mask = &model.mask;
    match strategy {
        DebugStrategy::Mile { tests } => run_replicated(
            |rng| {
                let hit = (0..*tests).any(|_| mask[model.space.sample_operational(rng)]);
                if hit {
                    0.0
                } else {
                    q
                }
            },
            replicates,
            policy,
            workers,
        ),
        DebugStrategy::Scenario(alloc) => {
            model.check_allocation(alloc)?;
            let plan: Vec<(&DiscreteSampler, u64)> = model
                .generators
                .iter()
                .zip(&alloc.per_subdomain)
                .filter(|(_, &t_i)| t_i > 0)
                .map(|(g, &t_i)| (g.as_ref().expect("checked above"), t_i))
                .collect();
            run_replicated(
                |rng| {
                    let hit = plan
                        .iter()
                        .any(|(g, t_i)| (0..*t_i).any(|_| mask[g.sample(rng)]));
                    if hit {
                        0.0
                    } else {
                        q
                    }
                },
                replicates,
                policy,
                workers,
            )
        }
    }
}

/// Builds the two-level space used for concentrated-region studies.
///
/// Subdomain 1 holds the failing scenario (mass `q`) and a passing one
/// (mass `op_dk − q`); subdomains `2..=n` hold one passing scenario each,
/// sharing `1 − op_dk` equally.
pub fn concentrated_fixture(q: f64, op_dk: f64, n: usize) -> Result<SingleRegionModel> {
    check_probability("q", q)?;
    check_probability("op_dk", op_dk)?;
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    if q > op_dk {
        return Err(Error::domain(format!(
            "failure mass {q} exceeds subdomain mass {op_dk}"
        )));
    }
    if n == 1 && (op_dk - 1.0).abs() > 0.0 {
        return Err(Error::domain("with one subdomain its mass must be 1"));
    }
    if n > 1 && op_dk >= 1.0 {
        return Err(Error::domain("other subdomains would be empty of mass"));
    }
    let mut entries = vec![
        ("f".to_string(), 1, q),
        ("k".to_string(), 1, op_dk - q),
    ];
    let rest = if n > 1 { (1.0 - op_dk) / (n - 1) as f64 } else { 0.0 };
    entries.extend((2..=n).map(|i| (format!("o{i}"), i, rest)));
    let space = OperationalSpace::from_entries(n, entries)?;
    SingleRegionModel::new(space, FailureRegion::new(["f"]))
}

/// Single-subdomain space with operational failure mass `q` and a
/// generator that hits the region with probability `d_bar`.
pub fn uniform_fixture(q: f64, d_bar: f64) -> Result<SingleRegionModel> {
    check_probability("q", q)?;
    check_probability("d_bar", d_bar)?;
    let space = OperationalSpace::from_entries(1, [("f", 1, q), ("p", 1, 1.0 - q)])?;
    let proposal = ProposalDistribution {
        subdomain: 1,
        mass: [("f".to_string(), d_bar), ("p".to_string(), 1.0 - d_bar)].into(),
    };
    SingleRegionModel::with_proposals(space, FailureRegion::new(["f"]), &[proposal])
}
