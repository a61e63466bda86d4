use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the forecasting and control pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sensor id {text:?}: {reason} (offending token {token:?})")]
    SensorId {
        text: String,
        token: String,
        reason: &'static str,
    },

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("duplicate column {0:?}")]
    DuplicateColumn(String),

    #[error("row {row}: {reason}")]
    Row { row: usize, reason: String },

    #[error("unknown column {0:?}")]
    MissingColumn(String),

    #[error("column {column:?}: {reason}")]
    Column { column: String, reason: String },

    #[error("empty frame")]
    EmptyFrame,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("constant series")]
    ConstantSeries,

    #[error("singular normal equations")]
    Singular,

    #[error("partial autocorrelation recursion broke down at lag {0}")]
    RecursionBreakdown(usize),

    #[error("insufficient history: need {needed} values, have {have}")]
    InsufficientHistory { needed: usize, have: usize },

    #[error("forecast failed for column {column:?}: {source}")]
    Forecast {
        column: String,
        #[source]
        source: Box<Error>,
    },

    #[error("target unreachable: predicted temperature never holds {target} from {from}")]
    TargetUnreachable { target: f64, from: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unstable house spec: {0}")]
    UnstableSpec(String),

    #[error("model format error: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Stable snake-case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SensorId { .. } => "sensor_id",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::DuplicateColumn(_) => "duplicate_column",
            Error::Row { .. } => "row",
            Error::MissingColumn(_) => "missing_column",
            Error::Column { .. } => "column",
            Error::EmptyFrame => "empty_frame",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::ConstantSeries => "constant_series",
            Error::Singular => "singular",
            Error::RecursionBreakdown(_) => "recursion_breakdown",
            Error::InsufficientHistory { .. } => "insufficient_history",
            Error::Forecast { .. } => "forecast",
            Error::TargetUnreachable { .. } => "target_unreachable",
            Error::Parse(_) => "parse",
            Error::UnstableSpec(_) => "unstable_spec",
            Error::Format(_) => "format",
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn column(column: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Column {
            column: column.into(),
            reason: reason.into(),
        }
    }
}
