use thiserror::Error;

/// Errors raised by the library.
///
/// Every variant is classified as either a data/usage problem or a numerical
/// failure via [`Error::is_numeric`], which the CLI maps to distinct exit
/// codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("self-loop at time {time}: node {node}")]
    SelfLoop { time: f64, node: usize },

    #[error("node {node} out of range 1..={n} at time {time}")]
    NodeOutOfRange { node: usize, n: usize, time: f64 },

    #[error("input contains no snapshots")]
    EmptyData,

    #[error("need at least {need} snapshots, found {found}")]
    TooFewSnapshots { need: usize, found: usize },

    #[error("snapshot times must be strictly increasing")]
    NonIncreasingTimes,

    #[error("snapshot directedness does not match the sequence flag")]
    MixedDirectedness,

    #[error("unknown statistic `{0}`")]
    UnknownStatistic(String),

    #[error("duplicate statistic `{0}`")]
    DuplicateStatistic(String),

    #[error("statistic list must be non-empty")]
    EmptySpec,

    #[error("statistic `{stat}` requires a directed graph")]
    RequiresDirected { stat: &'static str },

    #[error("triad statistic `{stat}` undefined for n = {n} < 3")]
    TooFewNodes { stat: &'static str, n: usize },

    #[error("spline order must be at least {min}, got {got}")]
    InvalidOrder { min: usize, got: usize },

    #[error("basis dimension {q} is invalid: {why}")]
    InvalidBasisDim { q: usize, why: String },

    #[error("time {0} lies outside the basis domain")]
    OutOfDomain(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("solver diverged: {0}")]
    Divergence(String),

    #[error("smoothing grid must be non-empty with positive entries")]
    EmptyGrid,

    #[error("exact enumeration limited to n <= {max} for {kind} graphs, got n = {n}")]
    EnumerationTooLarge {
        kind: &'static str,
        max: usize,
        n: usize,
    },

    #[error("invalid sampler configuration: {0}")]
    SamplerConfig(String),

    #[error("{failed} of {total} bootstrap replicates failed (more than 10%)")]
    BootstrapUnstable { failed: usize, total: usize },

    #[error("all cross-sectional estimates missing for statistic `{0}`")]
    AllMissing(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// True when the error reflects a numerical failure rather than bad
    /// input data or configuration.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_)
                | Error::Divergence(_)
                | Error::BootstrapUnstable { .. }
                | Error::AllMissing(_)
        )
    }
}
