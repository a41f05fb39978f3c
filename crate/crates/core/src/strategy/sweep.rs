//! Grid sweeps over strategy comparisons.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{
    allocate_budget, compare_strategies, concentrated_fixture, simulate_debug_campaign,
    uniform_fixture, uniform_spread_verdict, AllocationPolicy, DebugStrategy, Superior,
};
use crate::error::{Error, Result};
use crate::mc::{EmpiricalEstimate, SeedPolicy, Workers};

/// Constant detection rate in every subdomain.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformGrid {
    pub q: Vec<f64>,
    pub d_bar: Vec<f64>,
    pub t: Vec<u64>,
}

/// Failure region inside subdomain 1 of `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentratedGrid {
    pub q: Vec<f64>,
    pub n: Vec<usize>,
    pub op_dk: Vec<f64>,
    pub t: Vec<u64>,
    #[serde(default = "equal_policy")]
    pub allocation: AllocationPolicy,
}

fn equal_policy() -> AllocationPolicy {
    AllocationPolicy::Equal
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub uniform: Option<UniformGrid>,
    #[serde(default)]
    pub concentrated: Option<ConcentratedGrid>,
    /// Monte Carlo replicates per strategy when simulation is requested.
    #[serde(default = "default_replicates")]
    pub replicates: u64,
}

fn default_replicates() -> u64 {
    100_000
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(Some(e.line()), e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum SweepParams {
    Uniform { q: f64, d_bar: f64, t: u64 },
    Concentrated { q: f64, n: usize, op_dk: f64, t: u64, allocation: Vec<u64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub config_id: String,
    pub params: SweepParams,
    pub e_pfs_mile: f64,
    pub e_pfs_scenario: f64,
    pub verdict: Superior,
    pub mc_mile: Option<EmpiricalEstimate>,
    pub mc_scenario: Option<EmpiricalEstimate>,
}

/// Evaluates every grid point. With `simulate`, each point also gets
/// Monte Carlo estimates for both strategies, seeded from `policy` and the
/// point's position in the sweep.
pub fn run_sweep(config: &SweepConfig, simulate: bool, policy: &SeedPolicy, workers: Workers) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    if let Some(g) = &config.uniform {
        for &q in &g.q {
            for &d_bar in &g.d_bar {
                for &t in &g.t {
                    let c = uniform_spread_verdict(q, d_bar, t)?;
                    let index = rows.len() as u64;
                    let (mc_mile, mc_scenario) = if simulate {
                        let model = uniform_fixture(q, d_bar)?;
                        let alloc = allocate_budget(t, 1, &AllocationPolicy::Equal)?;
                        simulate_pair(&model, t, alloc, config.replicates, policy, index, workers)?
                    } else {
                        (None, None)
                    };
                    rows.push(SweepRow {
                        config_id: format!("u{:04}", index + 1),
                        params: SweepParams::Uniform { q, d_bar, t },
                        e_pfs_mile: c.expected_pfs_mile,
                        e_pfs_scenario: c.expected_pfs_scenario,
                        verdict: c.superior,
                        mc_mile,
                        mc_scenario,
                    });
                }
            }
        }
    }
    if let Some(g) = &config.concentrated {
        for &q in &g.q {
            for &n in &g.n {
                for &op_dk in &g.op_dk {
                    for &t in &g.t {
                        let model = concentrated_fixture(q, op_dk, n)?;
                        let alloc = allocate_budget(t, n, &g.allocation)?;
                        let c = compare_strategies(&model, t, &alloc)?;
                        let index = rows.len() as u64;
                        let params = SweepParams::Concentrated {
                            q,
                            n,
                            op_dk,
                            t,
                            allocation: alloc.per_subdomain.clone(),
                        };
                        let (mc_mile, mc_scenario) = if simulate {
                            simulate_pair(&model, t, alloc, config.replicates, policy, index, workers)?
                        } else {
                            (None, None)
                        };
                        rows.push(SweepRow {
                            config_id: format!("c{:04}", index + 1),
                            params,
                            e_pfs_mile: c.expected_pfs_mile,
                            e_pfs_scenario: c.expected_pfs_scenario,
                            verdict: c.superior,
                            mc_mile,
                            mc_scenario,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

type EstimatePair = (Option<EmpiricalEstimate>, Option<EmpiricalEstimate>);

fn simulate_pair(
    model: &super::SingleRegionModel,
    t: u64,
    alloc: super::Allocation,
    replicates: u64,
    policy: &SeedPolicy,
    index: u64,
    workers: Workers,
) -> Result<EstimatePair> {
    let point = policy.derive(index);
    let mile = simulate_debug_campaign(model, &DebugStrategy::Mile { tests: t }, replicates, &point.derive(0), workers)?;
    let scenario = simulate_debug_campaign(model, &DebugStrategy::Scenario(alloc), replicates, &point.derive(1), workers)?;
    Ok((Some(mile), Some(scenario)))
}

/// Writes `config_id,e_pfs_mile,e_pfs_scenario,verdict`, plus
/// `mc_mean_mile,mc_se_mile,mc_mean_scenario,mc_se_scenario` when `with_mc`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], with_mc: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["config_id", "e_pfs_mile", "e_pfs_scenario", "verdict"];
    if with_mc {
        header.extend(["mc_mean_mile", "mc_se_mile", "mc_mean_scenario", "mc_se_scenario"]);
    }
    w.write_record(&header).map_err(csv_io)?;
    for r in rows {
        let mut rec = vec![
            r.config_id.clone(),
            format!("{:e}", r.e_pfs_mile),
            format!("{:e}", r.e_pfs_scenario),
            r.verdict.to_string(),
        ];
        if with_mc {
            for est in [&r.mc_mile, &r.mc_scenario] {
                match est {
                    Some(e) => rec.extend([format!("{:e}", e.mean), format!("{:e}", e.standard_error)]),
                    None => rec.extend([String::new(), String::new()]),
                }
            }
        }
        w.write_record(&rec).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::domain(format!("csv write failed: {other:?}")),
    }
}
