use thiserror::Error;

/// Errors produced by matrix construction, metric evaluation, analysis, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("label space needs at least two distinct labels, got {0}")]
    TooFewLabels(usize),

    #[error("duplicate label `{0}` in label space")]
    DuplicateLabel(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("label spaces do not match: {0}")]
    LabelSpaceMismatch(String),

    #[error("matrix shape invalid: {0}")]
    BadShape(String),

    #[error("negative or non-finite cell mass {value} at ({row}, {col})")]
    BadCell { row: usize, col: usize, value: f64 },

    #[error("matrix has zero total mass")]
    ZeroMass,

    #[error("scaling factor {0} is not strictly positive and finite")]
    BadScalingFactor(f64),

    #[error("class `{0}` has zero prevalence; prevalence calibration is undefined")]
    ZeroPrevalence(String),

    #[error("invalid distribution: {0}")]
    BadDistribution(String),

    #[error("metric `{metric}` is undefined here: {reason}")]
    UndefinedMetric { metric: String, reason: String },

    #[error("cannot parse metric id `{0}`")]
    BadMetricId(String),

    #[error("gradient undefined: {0}")]
    GradientDomain(String),

    #[error("spearman correlation undefined: {0}")]
    DegenerateCorrelation(String),

    #[error("unknown column `{0}` in ranking table")]
    UnknownColumn(String),

    #[error("invalid search budget: {0}")]
    BadBudget(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    BadFile { path: String, message: String },

    #[error("{path}, line {line}: {message}")]
    BadRecord {
        path: String,
        line: u64,
        message: String,
    },

    #[error("usage: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
