//! Command-line front end: argument parsing, input files, and reports.
//!
//! Every command produces a [`Report`]. Without `--out-dir` the report is
//! printed to stdout as JSON; with it, files are written there and a short
//! human-readable summary goes to stdout.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pfskit_core::estimators::{
    aggregate, aggregate_by_subdomain, importance_sampling_pfs, parse_campaign_csv, parse_prior,
    pooled_total_pfs, posterior_mean, wald_confidence_interval, CampaignRecord, WeightedSample,
};
use pfskit_core::mc::{SeedPolicy, Workers};
use pfskit_core::ref_cert::{
    certify_ref, delta_distribution, load_jsonl,
    ref_operating_characteristics, smallest_certifiable_epsilon, Event, WorkflowConfig,
    WorkflowState, DEFAULT_GROWTH_THRESHOLD, RARE_FAILURE_WARNING,
};
use pfskit_core::scenario_space::parse_scenario_file;
use pfskit_core::strategy::{expected_pfs_after_mile, run_sweep, uniform_spread_verdict, write_sweep_csv, SweepConfig};
use pfskit_core::{CampaignOutcome, Error, PairedCampaigns, RefCriterion};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "pfskit", version, about = "Failure-probability estimation for scenario-based testing")]
pub struct Cli {
    /// Master seed for every Monte Carlo computation.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Write reports and data files here instead of printing JSON to stdout.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Configuration file (sweep grid for `compare`, curve request for `plots`).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for Monte Carlo (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the pfs from a campaign log.
    Estimate(EstimateArgs),
    /// Compare mile-based and scenario-based testing over a sweep grid.
    Compare(CompareArgs),
    /// Simulator fidelity certification.
    #[command(subcommand)]
    Ref(RefCommand),
    /// Emit CSV series for plotting.
    Plots,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Campaign log with header `scenario_id,subdomain,outcome`.
    #[arg(long)]
    pub log: PathBuf,
    /// Prior file (`{"kind":"beta",...}` or `{"kind":"grid",...}`).
    #[arg(long)]
    pub prior: Option<PathBuf>,
    /// Scenario-space file for per-subdomain pooling.
    #[arg(long)]
    pub space: Option<PathBuf>,
    #[arg(long, default_value_t = 0.95)]
    pub confidence: f64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Append Monte Carlo estimates for both strategies.
    #[arg(long)]
    pub mc: bool,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct RealInput {
    /// Real-world campaign log.
    #[arg(long)]
    pub real: Option<PathBuf>,
    /// Real-world campaign as `TESTS,FAILURES`.
    #[arg(long, value_parser = parse_counts)]
    pub real_counts: Option<CampaignOutcome>,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct SyntheticInput {
    /// Simulated campaign log.
    #[arg(long)]
    pub synthetic: Option<PathBuf>,
    /// Simulated campaign as `TESTS,FAILURES`.
    #[arg(long, value_parser = parse_counts)]
    pub synthetic_counts: Option<CampaignOutcome>,
}

#[derive(Debug, Clone, Args)]
pub struct CriterionArgs {
    #[arg(long, default_value_t = 0.02)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Interpret epsilon relative to the real-world estimate.
    #[arg(long)]
    pub relative: bool,
}

impl CriterionArgs {
    fn criterion(&self) -> Result<RefCriterion, Error> {
        if self.relative {
            RefCriterion::relative(self.epsilon, self.alpha)
        } else {
            RefCriterion::new(self.epsilon, self.alpha)
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum RefCommand {
    /// Test the (epsilon, alpha) criterion on a pair of campaigns.
    Certify {
        #[command(flatten)]
        real: RealInput,
        #[command(flatten)]
        synthetic: SyntheticInput,
        #[command(flatten)]
        criterion: CriterionArgs,
    },
    /// Smallest certifiable epsilon at the given alpha.
    EpsilonStar {
        #[command(flatten)]
        real: RealInput,
        #[command(flatten)]
        synthetic: SyntheticInput,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Advance or inspect a persisted certification workflow.
    Workflow(WorkflowArgs),
    /// Certification rate of the test by simulation.
    Oc {
        #[arg(long)]
        theta_r: f64,
        #[arg(long)]
        theta_s: f64,
        #[arg(long)]
        t_r: u64,
        #[arg(long)]
        t_s: u64,
        #[command(flatten)]
        criterion: CriterionArgs,
        #[arg(long, default_value_t = 10_000)]
        replicates: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EventKind {
    CollectReal,
    GenerateSynthetic,
    Certify,
    IncreaseSynthetic,
    Reconfigure,
    ExhaustReconfiguration,
    AcceptFidelityLimit,
    BeginMonitoring,
    NewRealData,
}

#[derive(Debug, Args)]
pub struct WorkflowArgs {
    /// JSON-lines workflow log; created on the first event.
    #[arg(long)]
    pub log: PathBuf,
    /// Event to apply. Without it the log is replayed and the state reported.
    #[arg(long, value_enum)]
    pub event: Option<EventKind>,
    /// Campaign carried by the event, as `TESTS,FAILURES`.
    #[arg(long, value_parser = parse_counts)]
    pub counts: Option<CampaignOutcome>,
    /// Criterion for a new log; ignored once the log exists.
    #[command(flatten)]
    pub criterion: CriterionArgs,
    #[arg(long, default_value_t = DEFAULT_GROWTH_THRESHOLD)]
    pub growth_threshold: f64,
    /// Timestamp for the entry in Unix milliseconds (default: now).
    #[arg(long)]
    pub timestamp: Option<u64>,
}

fn parse_counts(s: &str) -> Result<CampaignOutcome, String> {
    let (t, k) = s.split_once(',').ok_or("expected TESTS,FAILURES")?;
    let t: u64 = t.trim().parse().map_err(|_| format!("bad test count `{t}`"))?;
    let k: u64 = k.trim().parse().map_err(|_| format!("bad failure count `{k}`"))?;
    CampaignOutcome::new(t, k).map_err(|e| e.to_string())
}

/// Errors surfaced by the front end, each with its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl CliError {
    /// | code | meaning |
    /// |------|---------|
    /// | 1 | I/O or other failure |
    /// | 2 | usage error |
    /// | 3 | malformed input file |
    /// | 4 | value outside its domain |
    /// | 5 | insufficient data |
    /// | 6 | illegal workflow transition |
    /// | 7 | numerical degeneracy |
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Error::Io(_) => 1,
                Error::Parse { .. } => 3,
                Error::Domain(_)
                | Error::Precondition(_)
                | Error::UndefinedConditional(_)
                | Error::DegenerateWeights => 4,
                Error::InsufficientData(_) => 5,
                Error::Transition { .. } => 6,
                Error::NumericalDegeneracy(_) => 7,
            },
        }
    }
}

/// Machine-readable result of one command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub inputs: Value,
    pub results: Value,
    pub warnings: Vec<String>,
}

impl Report {
    fn new(command: &str, seed: u64, inputs: Value) -> Self {
        Report {
            tool: "pfskit".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            inputs,
            results: Value::Null,
            warnings: Vec::new(),
        }
    }
}

/// Six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        format!("{:.*}", (5 - exp).max(0) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

/// What a command produced.
pub struct Output {
    pub report: Option<Report>,
    /// Data files as (file name, contents).
    pub files: Vec<(String, String)>,
    /// Printed to stdout when no output directory is given and there is no report.
    pub stdout: Option<String>,
    pub summary: Vec<String>,
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    let workers = cli.workers.map_or(Workers::Auto, Workers::Fixed);
    match &cli.command {
        Command::Estimate(a) => cmd_estimate(a, cli.seed),
        Command::Compare(a) => cmd_compare(a, cli.config.as_deref(), cli.seed, workers),
        Command::Ref(r) => cmd_ref(r, cli.seed, workers),
        Command::Plots => cmd_report_plots(cli.config.as_deref(), cli.seed),
    }
}

/// Runs the command and writes its outputs. Returns the process exit code.
pub fn execute(cli: &Cli) -> u8 {
    match run(cli).and_then(|out| emit(cli, out)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(cli: &Cli, out: Output) -> Result<(), CliError> {
    match &cli.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            if let Some(r) = &out.report {
                fs::write(dir.join("report.json"), to_json(r) + "\n")?;
            }
            for (name, text) in &out.files {
                fs::write(dir.join(name), text)?;
            }
            for line in &out.summary {
                println!("{line}");
            }
        }
        None => {
            if let Some(text) = &out.stdout {
                print!("{text}");
            } else if let Some(r) = &out.report {
                println!("{}", to_json(r));
            }
            for (name, text) in out.files.iter().filter(|_| out.stdout.is_none()) {
                fs::write(name, text)?;
            }
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| {
        CliError::Core(Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
    })
}

fn read_log(path: &Path) -> Result<Vec<CampaignRecord>, CliError> {
    let text = read(path)?;
    Ok(parse_campaign_csv(text.as_bytes())?)
}

/// Point estimate, interval and optional posterior for a campaign log.
pub fn cmd_estimate(a: &EstimateArgs, seed: u64) -> Result<Output, CliError> {
    let records = read_log(&a.log)?;
    let outcome = aggregate(&records);
    let ci = wald_confidence_interval(&outcome, a.confidence)?;
    let mut report = Report::new(
        "estimate",
        seed,
        json!({
            "log": a.log,
            "prior": a.prior,
            "space": a.space,
            "confidence": a.confidence,
            "tests": outcome.tests,
            "failures": outcome.failures,
        }),
    );
    if ci.small_sample_warning {
        report.warnings.push(RARE_FAILURE_WARNING.to_string());
    }
    let mut summary = vec![
        format!("tests {}, failures {}", outcome.tests, outcome.failures),
        format!("MLE pfs {}", sig6(ci.estimate)),
        format!(
            "{}% Wald interval [{}, {}]",
            sig6(100.0 * a.confidence),
            sig6(ci.lower),
            sig6(ci.upper)
        ),
    ];
    let mut results = json!({ "mle": ci.estimate, "wald": ci });
    if let Some(p) = &a.prior {
        let prior = parse_prior(&read(p)?)?;
        let post = posterior_mean(&outcome, &prior)?;
        summary.push(format!("posterior mean {}", sig6(post.mean)));
        results["prior"] = json!(prior);
        results["posterior"] = json!(post);
    }
    if let Some(path) = &a.space {
        let doc = parse_scenario_file(&read(path)?)?;
        let space = &doc.space;
        let n = space.n_subdomains();
        for r in &records {
            let j = space.index_of(&r.scenario_id).ok_or_else(|| {
                Error::Domain(format!("log names unknown scenario `{}`", r.scenario_id))
            })?;
            if space.subdomain_of(j) != r.subdomain {
                return Err(Error::Domain(format!(
                    "log puts `{}` in subdomain {}, the space file in {}",
                    r.scenario_id,
                    r.subdomain,
                    space.subdomain_of(j)
                ))
                .into());
            }
        }
        let by_sub = aggregate_by_subdomain(&records, n)?;
        let mut estimates = Vec::with_capacity(n);
        let mut masses = Vec::with_capacity(n);
        let mut per_sub = Vec::with_capacity(n);
        for i in 1..=n {
            let op_i = space.subdomain_mass(i)?;
            masses.push(op_i);
            let o = by_sub[i - 1];
            if op_i == 0.0 && o.tests == 0 {
                estimates.push(0.0);
                per_sub.push(json!({ "subdomain": i, "op_mass": 0.0, "tests": 0, "estimate": null }));
                continue;
            }
            if o.tests == 0 {
                return Err(Error::InsufficientData(format!(
                    "subdomain {i} carries operational mass {op_i} but has no tests"
                ))
                .into());
            }
            let (estimate, method, se) = match doc.proposal_for(i) {
                Some(proposal) => {
                    space.proposal_sampler(proposal)?;
                    let samples: Vec<WeightedSample> = records
                        .iter()
                        .filter(|r| r.subdomain == i)
                        .map(|r| {
                            let j = space.index_of(&r.scenario_id).expect("checked above");
                            let q = proposal.mass.get(&r.scenario_id).copied().unwrap_or(0.0);
                            let weight = if q > 0.0 { space.mass_of(j) / op_i / q } else { 0.0 };
                            WeightedSample { scenario: r.scenario_id.clone(), failed: r.failed, weight }
                        })
                        .collect();
                    let is = importance_sampling_pfs(&samples)?;
                    (is.estimate, "importance-sampling", is.standard_error)
                }
                None => {
                    let ci = wald_confidence_interval(&o, a.confidence)?;
                    (ci.estimate, "mle", ci.standard_error)
                }
            };
            estimates.push(estimate);
            per_sub.push(json!({
                "subdomain": i,
                "op_mass": op_i,
                "tests": o.tests,
                "failures": o.failures,
                "estimate": estimate,
                "standard_error": se,
                "method": method,
            }));
        }
        let pooled = pooled_total_pfs(&estimates, &masses)?;
        summary.push(format!("pooled pfs {}", sig6(pooled)));
        results["subdomains"] = json!(per_sub);
        results["pooled"] = json!(pooled);
    }
    report.results = results;
    Ok(Output { report: Some(report), files: Vec::new(), stdout: None, summary })
}

/// Strategy comparison over a sweep grid.
pub fn cmd_compare(a: &CompareArgs, config: Option<&Path>, seed: u64, workers: Workers) -> Result<Output, CliError> {
    let path = config.ok_or_else(|| CliError::Usage("compare needs --config <sweep.json>".into()))?;
    let cfg = SweepConfig::from_json(&read(path)?)?;
    let rows = run_sweep(&cfg, a.mc, &SeedPolicy::new(seed), workers)?;
    let mut csv = Vec::new();
    write_sweep_csv(&rows, a.mc, &mut csv)?;
    let csv = String::from_utf8(csv).expect("csv output is UTF-8");
    let mut report = Report::new("compare", seed, json!({ "config": path, "sweep": cfg, "mc": a.mc }));
    report.results = json!(rows);
    let summary = rows
        .iter()
        .map(|r| {
            format!(
                "{}  mile {}  scenario {}  {}",
                r.config_id,
                sig6(r.e_pfs_mile),
                sig6(r.e_pfs_scenario),
                r.verdict
            )
        })
        .collect();
    Ok(Output {
        report: Some(report),
        files: vec![("compare.csv".into(), csv.clone())],
        stdout: Some(csv),
        summary,
    })
}

fn campaign(file: &Option<PathBuf>, counts: &Option<CampaignOutcome>) -> Result<CampaignOutcome, CliError> {
    match (file, counts) {
        (Some(p), _) => Ok(aggregate(&read_log(p)?)),
        (None, Some(c)) => Ok(*c),
        (None, None) => Err(CliError::Usage("campaign input missing".into())),
    }
}

fn paired(real: &RealInput, synthetic: &SyntheticInput) -> Result<PairedCampaigns, CliError> {
    let r = campaign(&real.real, &real.real_counts)?;
    let s = campaign(&synthetic.synthetic, &synthetic.synthetic_counts)?;
    Ok(PairedCampaigns::new(r, s)?)
}

fn pair_json(p: &PairedCampaigns) -> Value {
    json!({
        "t_r": p.real.tests, "k_r": p.real.failures,
        "t_s": p.synthetic.tests, "k_s": p.synthetic.failures,
    })
}

/// Certification subcommands.
pub fn cmd_ref(cmd: &RefCommand, seed: u64, workers: Workers) -> Result<Output, CliError> {
    match cmd {
        RefCommand::Certify { real, synthetic, criterion } => {
            let pair = paired(real, synthetic)?;
            let crit = criterion.criterion()?;
            let a = certify_ref(&pair, &crit)?;
            let mut report = Report::new("ref certify", seed, json!({ "campaigns": pair_json(&pair), "criterion": crit }));
            report.warnings = a.warnings.clone();
            let summary = vec![
                format!("mu {}  sigma {}", sig6(a.delta.mu), sig6(a.delta.sigma)),
                format!("coverage {}  ({})", sig6(a.coverage), if a.certified { "certified" } else { "not certified" }),
            ];
            report.results = json!(a);
            Ok(Output { report: Some(report), files: Vec::new(), stdout: None, summary })
        }
        RefCommand::EpsilonStar { real, synthetic, alpha } => {
            let pair = paired(real, synthetic)?;
            let e = smallest_certifiable_epsilon(&pair, *alpha)?;
            let d = delta_distribution(&pair)?;
            let mut report = Report::new("ref epsilon-star", seed, json!({ "campaigns": pair_json(&pair), "alpha": alpha }));
            if d.real_small_sample || d.synthetic_small_sample {
                report.warnings.push(RARE_FAILURE_WARNING.to_string());
            }
            report.results = json!({ "epsilon_star": e, "delta": d });
            Ok(Output { report: Some(report), files: Vec::new(), stdout: None, summary: vec![format!("epsilon* {}", sig6(e))] })
        }
        RefCommand::Workflow(w) => cmd_workflow(w, seed),
        RefCommand::Oc { theta_r, theta_s, t_r, t_s, criterion, replicates } => {
            let crit = criterion.criterion()?;
            let est = ref_operating_characteristics(*theta_r, *theta_s, *t_r, *t_s, &crit, *replicates, &SeedPolicy::new(seed), workers)?;
            let mut report = Report::new(
                "ref oc",
                seed,
                json!({ "theta_r": theta_r, "theta_s": theta_s, "t_r": t_r, "t_s": t_s, "criterion": crit, "replicates": replicates }),
            );
            report.results = json!({ "certification_rate": est.mean, "standard_error": est.standard_error, "replicates": est.replicates });
            let summary = vec![format!("certification rate {} ± {}", sig6(est.mean), sig6(est.standard_error))];
            Ok(Output { report: Some(report), files: Vec::new(), stdout: None, summary })
        }
    }
}

fn now_millis() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

fn cmd_workflow(w: &WorkflowArgs, seed: u64) -> Result<Output, CliError> {
    let mut state = if w.log.exists() {
        load_jsonl(&read(&w.log)?)?
    } else {
        let mut cfg = WorkflowConfig::new(w.criterion.criterion()?);
        cfg.growth_threshold = w.growth_threshold;
        WorkflowState::new(cfg)
    };
    if let Some(kind) = w.event {
        let needs = |what: &str| {
            w.counts.ok_or_else(|| CliError::Usage(format!("event {what} needs --counts TESTS,FAILURES")))
        };
        let event = match kind {
            EventKind::CollectReal => Event::CollectReal { real: needs("collect-real")? },
            EventKind::GenerateSynthetic => Event::GenerateSynthetic { synthetic: needs("generate-synthetic")? },
            EventKind::Certify => Event::Certify,
            EventKind::IncreaseSynthetic => Event::IncreaseSynthetic { synthetic: needs("increase-synthetic")? },
            EventKind::Reconfigure => Event::Reconfigure { synthetic: needs("reconfigure")? },
            EventKind::ExhaustReconfiguration => Event::ExhaustReconfiguration,
            EventKind::AcceptFidelityLimit => Event::AcceptFidelityLimit,
            EventKind::BeginMonitoring => Event::BeginMonitoring,
            EventKind::NewRealData => Event::NewRealData { real: needs("new-real-data")? },
        };
        let entry = state.apply(event, w.timestamp.unwrap_or_else(now_millis))?.clone();
        let line = serde_json::to_string(&entry).expect("entries serialize") + "\n";
        use std::io::Write;
        fs::OpenOptions::new().create(true).append(true).open(&w.log)?.write_all(line.as_bytes())?;
    }
    let mut report = Report::new("ref workflow", seed, json!({ "log": w.log, "event": w.event.map(|e| format!("{e:?}")) }));
    if let Some(a) = &state.last_assessment {
        report.warnings = a.warnings.clone();
    }
    let mut summary = vec![format!("phase {} after {} entries", state.phase, state.history.len())];
    if let Some(h) = state.history.last() {
        if let (Some(c), Some(ok)) = (h.coverage, h.certified) {
            summary.push(format!("coverage {}  ({})", sig6(c), if ok { "certified" } else { "not certified" }));
        }
        if let Some(e) = h.epsilon_star {
            summary.push(format!("epsilon* {}", sig6(e)));
        }
    }
    report.results = json!({ "phase": state.phase, "history": state.history, "last_assessment": state.last_assessment });
    Ok(Output { report: Some(report), files: Vec::new(), stdout: None, summary })
}

/// Curves requested by `plots`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotRequest {
    #[serde(default)]
    pub coverage: Vec<CoverageCurve>,
    #[serde(default)]
    pub expected_pfs: Vec<PfsCurve>,
}

/// Coverage against epsilon for one pair of campaigns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageCurve {
    pub name: String,
    pub real: [u64; 2],
    pub synthetic: [u64; 2],
    #[serde(default = "default_eps_max")]
    pub epsilon_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

/// Expected residual pfs against the test budget `t = 0..=t_max`.
/// Scenario-based curves use a uniform detection rate `d_bar`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PfsCurve {
    pub name: String,
    pub q: f64,
    #[serde(default)]
    pub d_bar: Option<f64>,
    pub t_max: u64,
}

fn default_eps_max() -> f64 {
    0.05
}

fn default_points() -> usize {
    201
}

/// Writes one `x,y` CSV per requested curve.
pub fn cmd_report_plots(config: Option<&Path>, seed: u64) -> Result<Output, CliError> {
    let req: PlotRequest = match config {
        Some(p) => serde_json::from_str(&read(p)?).map_err(|e| Error::Parse { line: Some(e.line()), message: e.to_string() })?,
        None => PlotRequest::default(),
    };
    let mut files = Vec::new();
    for c in &req.coverage {
        let pair = PairedCampaigns::new(
            CampaignOutcome::new(c.real[0], c.real[1])?,
            CampaignOutcome::new(c.synthetic[0], c.synthetic[1])?,
        )?;
        if c.points < 2 || c.epsilon_max.is_nan() || c.epsilon_max <= 0.0 {
            return Err(Error::Domain(format!("curve `{}` needs points ≥ 2 and epsilon_max > 0", c.name)).into());
        }
        let d = delta_distribution(&pair)?;
        let mut text = String::from("epsilon,coverage\n");
        for j in 0..c.points {
            let eps = c.epsilon_max * j as f64 / (c.points - 1) as f64;
            text += &format!("{eps:e},{:e}\n", d.coverage(eps));
        }
        files.push((format!("coverage_{}.csv", c.name), text));
    }
    for c in &req.expected_pfs {
        let mut text = String::from("t,expected_pfs\n");
        for t in 0..=c.t_max {
            let y = match (c.d_bar, t) {
                (Some(_), 0) | (None, _) => expected_pfs_after_mile(c.q, t)?,
                (Some(d), _) => uniform_spread_verdict(c.q, d, t)?.expected_pfs_scenario,
            };
            text += &format!("{t},{y:e}\n");
        }
        files.push((format!("expected_pfs_{}.csv", c.name), text));
    }
    let mut report = Report::new("plots", seed, json!({ "config": config, "request": req }));
    report.results = json!({ "files": files.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>() });
    let summary = files.iter().map(|(n, _)| format!("wrote {n}")).collect();
    Ok(Output {
        report: if files.is_empty() { None } else { Some(report) },
        files,
        stdout: None,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.034), "0.0340000");
        assert_eq!(sig6(0.83398), "0.833980");
        assert_eq!(sig6(2.656e-8), "2.65600e-8");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(123.4567891), "123.457");
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            CliError::Core(Error::Io(std::io::Error::other("x"))).exit_code(),
            CliError::Usage("x".into()).exit_code(),
            CliError::Core(Error::Parse { line: Some(1), message: "x".into() }).exit_code(),
            CliError::Core(Error::Domain("x".into())).exit_code(),
            CliError::Core(Error::InsufficientData("x".into())).exit_code(),
            CliError::Core(Error::Transition { phase: "a".into(), event: "b".into() }).exit_code(),
            CliError::Core(Error::NumericalDegeneracy("x".into())).exit_code(),
        ];
        assert_eq!(codes, [1, 2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn counts_parser() {
        assert_eq!(parse_counts("500, 17").unwrap(), CampaignOutcome { tests: 500, failures: 17 });
        assert!(parse_counts("5,7").is_err());
        assert!(parse_counts("57").is_err());
    }
}
