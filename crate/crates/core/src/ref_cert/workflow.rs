//! Certification workflow as a persisted state machine.
//!
//! Phases follow the use case: collect real data, generate synthetic data,
//! certify, then either scale up, grow the synthetic campaign, reconfigure
//! the simulator, or settle for the smallest certifiable tolerance. After
//! scale-up the workflow monitors new real data and re-certifies.
//!
//! Each accepted event appends one [`HistoryEntry`]. The history is written
//! as JSON lines and reloading replays every event through
//! [`workflow_step`], so an edited or reordered log is rejected.

use serde::{Deserialize, Serialize};

use super::{certify_ref, certify_with_epsilon_star, PairedCampaigns, RefAssessment, RefCriterion};
use crate::error::{Error, Result};
use crate::estimators::{wald_variance, CampaignOutcome};

/// Minimum projected share of `Var(Δ̂)` that doubling `t_s` must remove
/// for another synthetic round to be worthwhile.
pub const DEFAULT_GROWTH_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    CollectReal,
    GenerateSynthetic,
    Certify,
    IncreaseSynthetic,
    ReconfigureSimulator,
    QuantifyFidelityLimit,
    ScaleUp,
    Monitor,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum Event {
    /// Real-world campaign for the first comparison.
    CollectReal { real: CampaignOutcome },
    /// First simulated campaign.
    GenerateSynthetic { synthetic: CampaignOutcome },
    /// Evaluate the criterion on the current pair.
    Certify,
    /// Larger simulated campaign; certification is re-run on it.
    IncreaseSynthetic { synthetic: CampaignOutcome },
    /// Simulated campaign from a reconfigured simulator.
    Reconfigure { synthetic: CampaignOutcome },
    /// Operator declares that no further reconfiguration is possible.
    ExhaustReconfiguration,
    /// Accept the smallest certifiable tolerance and scale up.
    AcceptFidelityLimit,
    BeginMonitoring,
    /// Fresh real-world data after scale-up.
    NewRealData { real: CampaignOutcome },
}

impl Event {
    pub fn name(&self) -> &'static str {
        match self {
            Event::CollectReal { .. } => "collect-real",
            Event::GenerateSynthetic { .. } => "generate-synthetic",
            Event::Certify => "certify",
            Event::IncreaseSynthetic { .. } => "increase-synthetic",
            Event::Reconfigure { .. } => "reconfigure",
            Event::ExhaustReconfiguration => "exhaust-reconfiguration",
            Event::AcceptFidelityLimit => "accept-fidelity-limit",
            Event::BeginMonitoring => "begin-monitoring",
            Event::NewRealData { .. } => "new-real-data",
        }
    }

    /// Rebuilds an event from its name and the campaign counts recorded
    /// after it was applied.
    fn from_entry(e: &HistoryEntry) -> Result<Event> {
        let real = || counts(e.t_r, e.k_r, "t_r/k_r");
        let synthetic = || counts(e.t_s, e.k_s, "t_s/k_s");
        Ok(match e.event.as_str() {
            "collect-real" => Event::CollectReal { real: real()? },
            "generate-synthetic" => Event::GenerateSynthetic { synthetic: synthetic()? },
            "certify" => Event::Certify,
            "increase-synthetic" => Event::IncreaseSynthetic { synthetic: synthetic()? },
            "reconfigure" => Event::Reconfigure { synthetic: synthetic()? },
            "exhaust-reconfiguration" => Event::ExhaustReconfiguration,
            "accept-fidelity-limit" => Event::AcceptFidelityLimit,
            "begin-monitoring" => Event::BeginMonitoring,
            "new-real-data" => Event::NewRealData { real: real()? },
            other => return Err(Error::parse(None, format!("unknown event `{other}`"))),
        })
    }
}

fn counts(t: Option<u64>, k: Option<u64>, what: &str) -> Result<CampaignOutcome> {
    match (t, k) {
        (Some(t), Some(k)) => CampaignOutcome::new(t, k),
        _ => Err(Error::parse(None, format!("entry is missing {what}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkflowConfig {
    pub criterion: RefCriterion,
    pub growth_threshold: f64,
}

impl WorkflowConfig {
    pub fn new(criterion: RefCriterion) -> Self {
        WorkflowConfig {
            criterion,
            growth_threshold: DEFAULT_GROWTH_THRESHOLD,
        }
    }
}

/// One line of the persisted log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    /// Phase after the event.
    pub phase: Phase,
    pub event: String,
    pub t_r: Option<u64>,
    pub k_r: Option<u64>,
    pub t_s: Option<u64>,
    pub k_s: Option<u64>,
    pub coverage: Option<f64>,
    pub certified: Option<bool>,
    pub epsilon_star: Option<f64>,
    /// Caller-supplied time, milliseconds since the Unix epoch.
    pub timestamp: u64,
    pub epsilon: f64,
    pub alpha: f64,
    #[serde(default)]
    pub relative: bool,
    pub growth_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkflowState {
    pub config: WorkflowConfig,
    pub phase: Phase,
    pub real: Option<CampaignOutcome>,
    pub synthetic: Option<CampaignOutcome>,
    pub last_assessment: Option<RefAssessment>,
    pub history: Vec<HistoryEntry>,
}

/// Share of `Var(Δ̂)` removed by doubling the synthetic campaign:
/// `(Var_s / 2) / (Var_s + Var_r)`.
pub fn growth_gain(pair: &PairedCampaigns) -> Result<f64> {
    let vs = wald_variance(&pair.synthetic)?;
    let vr = wald_variance(&pair.real)?;
    let total = vs + vr;
    Ok(if total > 0.0 { 0.5 * vs / total } else { 0.0 })
}

impl WorkflowState {
    pub fn new(config: WorkflowConfig) -> Self {
        WorkflowState {
            config,
            phase: Phase::CollectReal,
            real: None,
            synthetic: None,
            last_assessment: None,
            history: Vec::new(),
        }
    }

    fn pair(&self) -> Result<PairedCampaigns> {
        match (self.real, self.synthetic) {
            (Some(r), Some(s)) => PairedCampaigns::new(r, s),
            _ => Err(Error::Precondition("both campaigns must be recorded".into())),
        }
    }

    /// Certifies the current pair and picks the next phase.
    fn decide(&mut self) -> Result<()> {
        let pair = self.pair()?;
        let a = certify_ref(&pair, &self.config.criterion)?;
        self.phase = if a.certified {
            Phase::ScaleUp
        } else if growth_gain(&pair)? >= self.config.growth_threshold {
            Phase::IncreaseSynthetic
        } else {
            Phase::ReconfigureSimulator
        };
        self.last_assessment = Some(a);
        Ok(())
    }

    /// Applies `event` in place. On error the state is unchanged.
    pub fn apply(&mut self, event: Event, timestamp: u64) -> Result<&HistoryEntry> {
        *self = workflow_step(self, event, timestamp)?;
        Ok(self.history.last().expect("step appends an entry"))
    }

    /// The history as JSON lines, one entry per line.
    pub fn to_jsonl(&self) -> String {
        self.history
            .iter()
            .map(|e| serde_json::to_string(e).expect("entries serialize") + "\n")
            .collect()
    }
}

/// Applies one event, returning the successor state.
pub fn workflow_step(state: &WorkflowState, event: Event, timestamp: u64) -> Result<WorkflowState> {
    let mut next = state.clone();
    let illegal = || Error::Transition {
        phase: state.phase.to_string(),
        event: event.name().to_string(),
    };
    let mut assessed = false;
    match (state.phase, event) {
        (Phase::CollectReal, Event::CollectReal { real }) => {
            next.real = Some(nonempty(real)?);
            next.phase = Phase::GenerateSynthetic;
        }
        (Phase::GenerateSynthetic, Event::GenerateSynthetic { synthetic }) => {
            next.synthetic = Some(nonempty(synthetic)?);
            next.phase = Phase::Certify;
        }
        (Phase::Certify, Event::Certify) => {
            next.decide()?;
            assessed = true;
        }
        (Phase::IncreaseSynthetic, Event::IncreaseSynthetic { synthetic }) => {
            next.synthetic = Some(nonempty(synthetic)?);
            next.decide()?;
            assessed = true;
        }
        (Phase::ReconfigureSimulator, Event::Reconfigure { synthetic }) => {
            next.synthetic = Some(nonempty(synthetic)?);
            next.phase = Phase::Certify;
        }
        (Phase::Certify, Event::ExhaustReconfiguration) => {
            next.phase = Phase::QuantifyFidelityLimit;
        }
        (Phase::QuantifyFidelityLimit, Event::AcceptFidelityLimit) => {
            let a = certify_with_epsilon_star(&next.pair()?, &next.config.criterion)?;
            next.last_assessment = Some(a);
            next.phase = Phase::ScaleUp;
            assessed = true;
        }
        (Phase::ScaleUp, Event::BeginMonitoring) => {
            next.phase = Phase::Monitor;
        }
        (Phase::Monitor, Event::NewRealData { real }) => {
            next.real = Some(nonempty(real)?);
            next.last_assessment = Some(certify_ref(&next.pair()?, &next.config.criterion)?);
            next.phase = Phase::Certify;
            assessed = true;
        }
        _ => return Err(illegal()),
    }
    let a = next.last_assessment.as_ref().filter(|_| assessed);
    let c = next.config;
    next.history.push(HistoryEntry {
        phase: next.phase,
        event: event.name().to_string(),
        t_r: next.real.map(|r| r.tests),
        k_r: next.real.map(|r| r.failures),
        t_s: next.synthetic.map(|s| s.tests),
        k_s: next.synthetic.map(|s| s.failures),
        coverage: a.map(|a| a.coverage),
        certified: a.map(|a| a.certified),
        epsilon_star: a.and_then(|a| a.epsilon_star),
        timestamp,
        epsilon: c.criterion.epsilon,
        alpha: c.criterion.alpha,
        relative: c.criterion.relative,
        growth_threshold: c.growth_threshold,
    });
    Ok(next)
}

fn nonempty(c: CampaignOutcome) -> Result<CampaignOutcome> {
    let c = CampaignOutcome::new(c.tests, c.failures)?;
    if c.tests == 0 {
        return Err(Error::InsufficientData("campaign has no tests".into()));
    }
    Ok(c)
}

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= 1e-12,
        _ => false,
    }
}

/// Rebuilds a workflow from its JSON-lines log.
///
/// Every entry is replayed; the log is rejected if an event is illegal at
/// that point or the recorded results differ from the replayed ones.
pub fn load_jsonl(text: &str) -> Result<WorkflowState> {
    let mut state: Option<WorkflowState> = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = Some(i + 1);
        if line.trim().is_empty() {
            continue;
        }
        let entry: HistoryEntry =
            serde_json::from_str(line).map_err(|e| Error::parse(line_no, e.to_string()))?;
        let criterion = RefCriterion {
            epsilon: entry.epsilon,
            alpha: entry.alpha,
            relative: entry.relative,
        };
        let config = WorkflowConfig {
            criterion,
            growth_threshold: entry.growth_threshold,
        };
        let current = state.get_or_insert_with(|| WorkflowState::new(config));
        if current.config != config {
            return Err(Error::parse(line_no, "criterion differs from earlier entries"));
        }
        RefCriterion::new(criterion.epsilon, criterion.alpha).map_err(|e| Error::parse(line_no, e.to_string()))?;
        let event = Event::from_entry(&entry).map_err(|e| relocate(e, line_no))?;
        let next = workflow_step(current, event, entry.timestamp).map_err(|e| relocate(e, line_no))?;
        let replayed = next.history.last().expect("step appends an entry");
        let consistent = replayed.phase == entry.phase
            && replayed.certified == entry.certified
            && (replayed.t_r, replayed.k_r, replayed.t_s, replayed.k_s)
                == (entry.t_r, entry.k_r, entry.t_s, entry.k_s)
            && close(replayed.coverage, entry.coverage)
            && close(replayed.epsilon_star, entry.epsilon_star);
        if !consistent {
            return Err(Error::parse(
                line_no,
                format!(
                    "recorded entry does not match replay (recorded phase {}, replayed {})",
                    entry.phase, replayed.phase
                ),
            ));
        }
        *current = next;
    }
    state.ok_or_else(|| Error::parse(None, "workflow log is empty"))
}

fn relocate(e: Error, line: Option<usize>) -> Error {
    match e {
        Error::Parse { message, .. } => Error::Parse { line, message },
        Error::Transition { phase, event } => Error::parse(
            line,
            format!("event `{event}` is not allowed in phase {phase}"),
        ),
        other => Error::parse(line, other.to_string()),
    }
}
