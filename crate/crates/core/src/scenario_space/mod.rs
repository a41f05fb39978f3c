//! Finite, partitioned scenario spaces with an operational profile.
//!
//! A scenario space is a finite list of concrete scenarios, each assigned to
//! exactly one logical scenario (a *subdomain*, numbered `1..=n`). The
//! operational profile puts probability mass on the concrete scenarios.
//! Ground-truth quantities used elsewhere in the crate, such as the true pfs
//! of a failure region or a detection rate, are exact finite sums over this
//! representation.
//!
//! Raw [`ScenarioSpace`] / [`OperationalProfile`] values can be checked with
//! [`validate_space`]; analytic operations live on the validated
//! [`OperationalSpace`].

mod file;
mod sampler;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use file::{parse_scenario_file, ScenarioDocument, ScenarioEntry, ScenarioFile, ProposalEntry};
pub use sampler::DiscreteSampler;

/// Absolute tolerance on probability-mass sums.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Unvalidated scenario space: ordered scenario ids plus the partition map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpace {
    pub scenarios: Vec<String>,
    /// scenario id → subdomain index in `1..=n_subdomains`.
    pub partition: BTreeMap<String, usize>,
    pub n_subdomains: usize,
}

/// Unvalidated operational profile: scenario id → probability mass.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OperationalProfile {
    pub mass: BTreeMap<String, f64>,
}

/// Set of scenarios that cause a failure.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FailureRegion {
    pub members: BTreeSet<String>,
}

impl FailureRegion {
    pub fn new<I, S>(members: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        FailureRegion {
            members: members.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Test-generation distribution restricted to one subdomain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalDistribution {
    pub subdomain: usize,
    pub mass: BTreeMap<String, f64>,
}

/// A single invariant violation found by [`validate_space`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoSubdomains,
    DuplicateScenario(String),
    /// Scenario listed in the space but absent from the partition map.
    UncoveredScenario(String),
    /// Partition entry for an id that is not in the scenario list.
    UnknownPartitionEntry(String),
    SubdomainOutOfRange { scenario: String, subdomain: usize },
    EmptySubdomain(usize),
    MissingMass(String),
    UnknownMassEntry(String),
    InvalidMass { scenario: String, mass: f64 },
    MassSum(f64),
}

impl Violation {
    /// Scenario the violation is attached to, if any.
    pub fn scenario(&self) -> Option<&str> {
        match self {
            Violation::DuplicateScenario(s)
            | Violation::UncoveredScenario(s)
            | Violation::UnknownPartitionEntry(s)
            | Violation::MissingMass(s)
            | Violation::UnknownMassEntry(s) => Some(s),
            Violation::SubdomainOutOfRange { scenario, .. }
            | Violation::InvalidMass { scenario, .. } => Some(scenario),
            Violation::NoSubdomains | Violation::EmptySubdomain(_) | Violation::MassSum(_) => None,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoSubdomains => write!(f, "space has no subdomains (n = 0)"),
            Violation::DuplicateScenario(s) => write!(f, "duplicate scenario id `{s}`"),
            Violation::UncoveredScenario(s) => write!(f, "uncovered scenario `{s}`: not assigned to any subdomain"),
            Violation::UnknownPartitionEntry(s) => {
                write!(f, "partition references unknown scenario `{s}`")
            }
            Violation::SubdomainOutOfRange { scenario, subdomain } => {
                write!(f, "scenario `{scenario}` assigned to subdomain {subdomain}, outside 1..=n")
            }
            Violation::EmptySubdomain(i) => write!(f, "subdomain {i} is empty"),
            Violation::MissingMass(s) => write!(f, "scenario `{s}` has no operational mass"),
            Violation::UnknownMassEntry(s) => {
                write!(f, "operational mass given for unknown scenario `{s}`")
            }
            Violation::InvalidMass { scenario, mass } => {
                write!(f, "scenario `{scenario}` has invalid mass {mass}")
            }
            Violation::MassSum(sum) => write!(f, "mass sum ≠ 1 (sum = {sum})"),
        }
    }
}

/// Checks every space/profile invariant. An empty list means the pair is valid.
pub fn validate_space(space: &ScenarioSpace, op: &OperationalProfile) -> Vec<Violation> {
    let mut out = Vec::new();
    if space.n_subdomains == 0 {
        out.push(Violation::NoSubdomains);
    }

    let mut seen = BTreeSet::new();
    for id in &space.scenarios {
        if !seen.insert(id.as_str()) {
            out.push(Violation::DuplicateScenario(id.clone()));
        }
    }

    let mut occupied = vec![false; space.n_subdomains];
    for id in &space.scenarios {
        match space.partition.get(id) {
            None => out.push(Violation::UncoveredScenario(id.clone())),
            Some(&i) if i == 0 || i > space.n_subdomains => {
                out.push(Violation::SubdomainOutOfRange {
                    scenario: id.clone(),
                    subdomain: i,
                })
            }
            Some(&i) => occupied[i - 1] = true,
        }
    }
    for id in space.partition.keys() {
        if !seen.contains(id.as_str()) {
            out.push(Violation::UnknownPartitionEntry(id.clone()));
        }
    }
    for (i, occ) in occupied.iter().enumerate() {
        if !occ {
            out.push(Violation::EmptySubdomain(i + 1));
        }
    }

    let mut sum = 0.0;
    for id in &space.scenarios {
        match op.mass.get(id) {
            None => out.push(Violation::MissingMass(id.clone())),
            Some(&m) if !(m.is_finite() && (0.0..=1.0).contains(&m)) => {
                out.push(Violation::InvalidMass {
                    scenario: id.clone(),
                    mass: m,
                })
            }
            Some(&m) => sum += m,
        }
    }
    for id in op.mass.keys() {
        if !seen.contains(id.as_str()) {
            out.push(Violation::UnknownMassEntry(id.clone()));
        }
    }
    if (sum - 1.0).abs() > MASS_TOLERANCE {
        out.push(Violation::MassSum(sum));
    }
    out
}

/// A validated scenario space together with its operational profile.
///
/// Scenarios are stored densely in their original order; subdomains are
/// addressed with 1-based indices throughout the public API.
#[derive(Debug, Clone)]
pub struct OperationalSpace {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    subdomain: Vec<usize>,
    mass: Vec<f64>,
    n: usize,
    members: Vec<Vec<usize>>,
    sampler: DiscreteSampler,
}

impl OperationalSpace {
    pub fn new(space: &ScenarioSpace, op: &OperationalProfile) -> Result<Self> {
        let violations = validate_space(space, op);
        if !violations.is_empty() {
            let msg = violations
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; ");
            return Err(Error::domain(msg));
        }
        let ids = space.scenarios.clone();
        let index = ids
            .iter()
            .enumerate()
            .map(|(j, id)| (id.clone(), j))
            .collect();
        let subdomain: Vec<usize> = ids.iter().map(|id| space.partition[id]).collect();
        let mass: Vec<f64> = ids.iter().map(|id| op.mass[id]).collect();
        let n = space.n_subdomains;
        let mut members = vec![Vec::new(); n];
        for (j, &i) in subdomain.iter().enumerate() {
            members[i - 1].push(j);
        }
        let sampler = DiscreteSampler::new((0..ids.len()).zip(mass.iter().copied()))?;
        Ok(OperationalSpace {
            ids,
            index,
            subdomain,
            mass,
            n,
            members,
            sampler,
        })
    }

    /// Builds a space from `(id, subdomain, mass)` triples.
    pub fn from_entries<I, S>(n_subdomains: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize, f64)>,
        S: Into<String>,
    {
        let mut space = ScenarioSpace {
            scenarios: Vec::new(),
            partition: BTreeMap::new(),
            n_subdomains,
        };
        let mut op = OperationalProfile::default();
        for (id, i, m) in entries {
            let id = id.into();
            space.scenarios.push(id.clone());
            space.partition.insert(id.clone(), i);
            op.mass.insert(id, m);
        }
        Self::new(&space, &op)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn n_subdomains(&self) -> usize {
        self.n
    }

    pub fn id(&self, scenario: usize) -> &str {
        &self.ids[scenario]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn subdomain_of(&self, scenario: usize) -> usize {
        self.subdomain[scenario]
    }

    pub fn mass_of(&self, scenario: usize) -> f64 {
        self.mass[scenario]
    }

    /// Scenario indices belonging to subdomain `i`.
    pub fn members(&self, i: usize) -> Result<&[usize]> {
        self.check_subdomain(i)?;
        Ok(&self.members[i - 1])
    }

    /// Converts back to the raw representation.
    pub fn to_raw(&self) -> (ScenarioSpace, OperationalProfile) {
        let space = ScenarioSpace {
            scenarios: self.ids.clone(),
            partition: self
                .ids
                .iter()
                .cloned()
                .zip(self.subdomain.iter().copied())
                .collect(),
            n_subdomains: self.n,
        };
        let op = OperationalProfile {
            mass: self
                .ids
                .iter()
                .cloned()
                .zip(self.mass.iter().copied())
                .collect(),
        };
        (space, op)
    }

    fn check_subdomain(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n {
            Err(Error::domain(format!(
                "subdomain index {i} outside 1..={}",
                self.n
            )))
        } else {
            Ok(())
        }
    }

    /// Membership mask of `region` over scenario indices.
    pub fn region_mask(&self, region: &FailureRegion) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.ids.len()];
        for id in &region.members {
            let j = self.index_of(id).ok_or_else(|| {
                Error::domain(format!("failure region member `{id}` is not in the space"))
            })?;
            mask[j] = true;
        }
        Ok(mask)
    }

    /// True pfs: operational mass of the failure region.
    pub fn true_pfs(&self, region: &FailureRegion) -> Result<f64> {
        let mask = self.region_mask(region)?;
        Ok(self.masked_mass(&mask, 0..self.ids.len()))
    }

    fn masked_mass(&self, mask: &[bool], scenarios: impl IntoIterator<Item = usize>) -> f64 {
        let sum: f64 = scenarios
            .into_iter()
            .filter(|&j| mask[j])
            .map(|j| self.mass[j])
            .sum();
        sum.min(1.0)
    }

    /// Operational mass `Op_i` of subdomain `i`.
    pub fn subdomain_mass(&self, i: usize) -> Result<f64> {
        self.check_subdomain(i)?;
        Ok(self.members[i - 1].iter().map(|&j| self.mass[j]).sum())
    }

    /// Mass of `region ∩ D_i`.
    pub fn region_mass_in(&self, region: &FailureRegion, i: usize) -> Result<f64> {
        self.check_subdomain(i)?;
        let mask = self.region_mask(region)?;
        Ok(self.masked_mass(&mask, self.members[i - 1].iter().copied()))
    }

    /// Conditional pfs `θ_i` inside subdomain `i`.
    pub fn conditional_pfs(&self, region: &FailureRegion, i: usize) -> Result<f64> {
        let op_i = self.subdomain_mass(i)?;
        if op_i <= 0.0 {
            return Err(Error::UndefinedConditional(i));
        }
        let hit = self.region_mass_in(region, i)?;
        Ok((hit / op_i).clamp(0.0, 1.0))
    }

    /// Detection rate `d_k` for a failure region concentrated in subdomain `k`.
    ///
    /// Only defined when every region member lies in `D_k`; in that case it
    /// coincides with [`conditional_pfs`](Self::conditional_pfs).
    pub fn detection_rate(&self, region: &FailureRegion, k: usize) -> Result<f64> {
        self.check_subdomain(k)?;
        let mask = self.region_mask(region)?;
        if let Some(j) = (0..self.ids.len()).find(|&j| mask[j] && self.subdomain[j] != k) {
            return Err(Error::Precondition(format!(
                "failure region is not contained in subdomain {k}: `{}` lies in subdomain {}",
                self.ids[j], self.subdomain[j]
            )));
        }
        self.conditional_pfs(region, k)
    }

    /// `|θ − Σ θ_i·Op_i|`, with zero-mass subdomains contributing 0.
    pub fn total_probability_check(&self, region: &FailureRegion) -> Result<f64> {
        let theta = self.true_pfs(region)?;
        let mut pooled = 0.0;
        for i in 1..=self.n {
            let op_i = self.subdomain_mass(i)?;
            if op_i > 0.0 {
                pooled += self.conditional_pfs(region, i)? * op_i;
            }
        }
        Ok((theta - pooled).abs())
    }

    /// Draws one scenario index i.i.d. from the operational profile.
    pub fn sample_operational<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng)
    }

    /// Sampler for the operational profile conditioned on subdomain `i`.
    pub fn conditional_sampler(&self, i: usize) -> Result<DiscreteSampler> {
        if self.subdomain_mass(i)? <= 0.0 {
            return Err(Error::UndefinedConditional(i));
        }
        DiscreteSampler::new(self.members[i - 1].iter().map(|&j| (j, self.mass[j])))
    }

    /// Validates a proposal against this space and returns its sampler.
    pub fn proposal_sampler(&self, proposal: &ProposalDistribution) -> Result<DiscreteSampler> {
        self.distribution_sampler(proposal, true)
    }

    /// Sampler for a test generator inside one subdomain.
    ///
    /// Same checks as [`Self::proposal_sampler`] except absolute continuity:
    /// a generator may ignore scenarios it never needs to visit.
    pub fn generator_sampler(&self, generator: &ProposalDistribution) -> Result<DiscreteSampler> {
        self.distribution_sampler(generator, false)
    }

    fn distribution_sampler(&self, proposal: &ProposalDistribution, continuity: bool) -> Result<DiscreteSampler> {
        let i = proposal.subdomain;
        self.check_subdomain(i)?;
        let mut sum = 0.0;
        let mut dense = Vec::with_capacity(proposal.mass.len());
        for (id, &m) in &proposal.mass {
            let j = self.index_of(id).ok_or_else(|| {
                Error::domain(format!("proposal references unknown scenario `{id}`"))
            })?;
            if self.subdomain[j] != i {
                return Err(Error::domain(format!(
                    "proposal for subdomain {i} puts mass on `{id}` from subdomain {}",
                    self.subdomain[j]
                )));
            }
            if !(m.is_finite() && (0.0..=1.0).contains(&m)) {
                return Err(Error::domain(format!(
                    "proposal mass {m} for `{id}` is not a probability"
                )));
            }
            sum += m;
            dense.push((j, m));
        }
        if (sum - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::domain(format!(
                "proposal masses for subdomain {i} sum to {sum}, not 1"
            )));
        }
        for &j in &self.members[i - 1] {
            let q = proposal.mass.get(&self.ids[j]).copied().unwrap_or(0.0);
            if continuity && self.mass[j] > 0.0 && q <= 0.0 {
                return Err(Error::domain(format!(
                    "proposal is not absolutely continuous: `{}` has operational mass but zero proposal mass",
                    self.ids[j]
                )));
            }
        }
        dense.sort_by_key(|&(j, _)| j);
        DiscreteSampler::new(dense)
    }

    /// Draws one scenario from a subdomain proposal distribution.
    pub fn sample_subdomain<R: Rng + ?Sized>(
        &self,
        proposal: &ProposalDistribution,
        rng: &mut R,
    ) -> Result<usize> {
        Ok(self.proposal_sampler(proposal)?.sample(rng))
    }

    /// Conditional operational profile of subdomain `i` as a proposal.
    pub fn conditional_proposal(&self, i: usize) -> Result<ProposalDistribution> {
        let op_i = self.subdomain_mass(i)?;
        if op_i <= 0.0 {
            return Err(Error::UndefinedConditional(i));
        }
        let mut mass: BTreeMap<String, f64> = self.members[i - 1]
            .iter()
            .map(|&j| (self.ids[j].clone(), self.mass[j] / op_i))
            .collect();
        // Put any rounding residue on the largest entry so the sum stays within tolerance.
        let residue = 1.0 - mass.values().sum::<f64>();
        if let Some(v) = mass.values_mut().max_by(|a, b| a.total_cmp(b)) {
            *v += residue;
        }
        Ok(ProposalDistribution { subdomain: i, mass })
    }
}
