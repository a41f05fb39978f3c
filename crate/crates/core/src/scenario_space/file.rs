//! JSON scenario-space documents.
//!
//! ```json
//! {
//!   "n_subdomains": 2,
//!   "scenarios": [{"id": "s1", "subdomain": 1, "op_mass": 0.7},
//!                 {"id": "s2", "subdomain": 2, "op_mass": 0.3}],
//!   "failure_region": ["s2"],
//!   "proposals": [{"subdomain": 2, "mass": {"s2": 1.0}}]
//! }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    validate_space, FailureRegion, OperationalProfile, OperationalSpace, ProposalDistribution,
    ScenarioSpace,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioEntry {
    pub id: String,
    pub subdomain: usize,
    pub op_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProposalEntry {
    pub subdomain: usize,
    pub mass: BTreeMap<String, f64>,
}

/// Serialized form of a scenario space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub scenarios: Vec<ScenarioEntry>,
    pub n_subdomains: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_region: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub proposals: Vec<ProposalEntry>,
}

/// A parsed and validated scenario-space document.
#[derive(Debug, Clone)]
pub struct ScenarioDocument {
    pub space: OperationalSpace,
    pub failure_region: Option<FailureRegion>,
    pub proposals: Vec<ProposalDistribution>,
}

impl ScenarioDocument {
    /// Proposal registered for subdomain `i`, if any.
    pub fn proposal_for(&self, i: usize) -> Option<&ProposalDistribution> {
        self.proposals.iter().find(|p| p.subdomain == i)
    }
}

impl From<&OperationalSpace> for ScenarioFile {
    fn from(space: &OperationalSpace) -> Self {
        ScenarioFile {
            scenarios: (0..space.len())
                .map(|j| ScenarioEntry {
                    id: space.id(j).to_string(),
                    subdomain: space.subdomain_of(j),
                    op_mass: space.mass_of(j),
                })
                .collect(),
            n_subdomains: space.n_subdomains(),
            failure_region: None,
            proposals: Vec::new(),
        }
    }
}

/// 1-based line of the first occurrence of `"needle"` in `text`.
fn line_of(text: &str, needle: &str) -> Option<usize> {
    let quoted = format!("\"{needle}\"");
    let offset = text.find(&quoted)?;
    Some(text[..offset].matches('\n').count() + 1)
}

/// Parses a scenario-space document, rejecting any invariant violation.
pub fn parse_scenario_file(text: &str) -> Result<ScenarioDocument> {
    let file: ScenarioFile =
        serde_json::from_str(text).map_err(|e| Error::parse(Some(e.line()), e.to_string()))?;

    let mut space = ScenarioSpace {
        scenarios: Vec::with_capacity(file.scenarios.len()),
        partition: BTreeMap::new(),
        n_subdomains: file.n_subdomains,
    };
    let mut op = OperationalProfile::default();
    for entry in &file.scenarios {
        space.scenarios.push(entry.id.clone());
        space.partition.insert(entry.id.clone(), entry.subdomain);
        op.mass.insert(entry.id.clone(), entry.op_mass);
    }

    let violations = validate_space(&space, &op);
    if let Some(first) = violations.first() {
        let line = first.scenario().and_then(|id| line_of(text, id));
        let message = violations
            .iter()
            .map(|v| match v.scenario().and_then(|id| line_of(text, id)) {
                Some(l) => format!("line {l}: {v}"),
                None => v.to_string(),
            })
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::parse(line, message));
    }
    let operational = OperationalSpace::new(&space, &op)?;

    let failure_region = match file.failure_region {
        Some(ids) => {
            let region = FailureRegion::new(ids);
            if let Some(bad) = region
                .members
                .iter()
                .find(|id| operational.index_of(id).is_none())
            {
                return Err(Error::parse(
                    line_of(text, bad),
                    format!("failure region member `{bad}` is not a scenario"),
                ));
            }
            Some(region)
        }
        None => None,
    };

    let mut proposals = Vec::with_capacity(file.proposals.len());
    for entry in file.proposals {
        let proposal = ProposalDistribution {
            subdomain: entry.subdomain,
            mass: entry.mass,
        };
        if proposals
            .iter()
            .any(|p: &ProposalDistribution| p.subdomain == proposal.subdomain)
        {
            return Err(Error::parse(
                None,
                format!("duplicate proposal for subdomain {}", proposal.subdomain),
            ));
        }
        if let Err(e) = operational.proposal_sampler(&proposal) {
            let line = proposal.mass.keys().next().and_then(|id| {
                let start = text.find("\"proposals\"")?;
                line_of(&text[start..], id).map(|l| l + text[..start].matches('\n').count())
            });
            return Err(Error::parse(line, e.to_string()));
        }
        proposals.push(proposal);
    }

    Ok(ScenarioDocument {
        space: operational,
        failure_region,
        proposals,
    })
}
