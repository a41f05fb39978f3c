use thiserror::Error;

/// Errors produced by the analytic modules.
///
/// Variants are grouped by the kind of failure so that front ends can map
/// them onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside its documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Conditional quantity requested for a subdomain with zero operational mass.
    #[error("conditional pfs undefined: subdomain {0} has zero operational mass")]
    UndefinedConditional(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("degenerate importance weights: all weights are zero")]
    DegenerateWeights,

    /// Illegal workflow event for the current phase. The state is left unchanged.
    #[error("invalid transition: event `{event}` is not allowed in phase {phase}")]
    Transition { phase: String, event: String },

    /// Malformed input document; `line` is 1-based when known.
    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {p} is not a probability in [0, 1]")))
    }
}
