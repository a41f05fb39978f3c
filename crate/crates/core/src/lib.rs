//! Estimation of the probability of failure per scenario (pfs) for
//! scenario-based testing of automated driving systems.
//!
//! * [`scenario_space`]: finite partitioned scenario spaces, operational
//!   profiles and failure regions.
//! * [`estimators`]: maximum-likelihood, Bayesian, Wald and importance
//!   sampling estimators over test campaigns.
//! * [`strategy`]: debug effectiveness of mile-based versus scenario-based
//!   testing, in closed form and by simulation.
//! * [`ref_cert`]: fidelity certification of a simulator against real-world
//!   data, and the certification workflow.
//! * [`mc`]: reproducible parallel Monte Carlo replication.

pub mod error;
pub mod estimators;
pub mod mc;
pub mod normal;
pub mod ref_cert;
pub mod scenario_space;
pub mod strategy;

pub use error::{Error, Result};
pub use estimators::{CampaignOutcome, PriorSpec};
pub use mc::{EmpiricalEstimate, SeedPolicy, Workers};
pub use normal::{normal_cdf, normal_quantile};
pub use ref_cert::{PairedCampaigns, RefAssessment, RefCriterion};
pub use scenario_space::{FailureRegion, OperationalSpace, ProposalDistribution};
pub use strategy::{Allocation, SingleRegionModel, StrategyComparison, Superior};
