//! Error and diagnostic types shared across the pipeline.
//!
//! Hard errors abort an operation; [`Diagnostic`]s record row-level problems
//! that exclude a record without aborting the run (bad dates, negative
//! yields, coverage holes). Parsers return both.

use std::path::PathBuf;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("missing column {column:?} in {path}")]
    MissingColumn { path: PathBuf, column: String },

    #[error("duplicate weather day for station {station} on {date}")]
    DuplicateDay { station: String, date: NaiveDate },

    #[error("weather gap for station {station} from {start} to {end} exceeds the imputation limit")]
    GapTooLarge {
        station: String,
        start: NaiveDate,
        end: NaiveDate,
    },

    #[error("trial location {location} ({state}) has no station binding")]
    UnmappedLocation { state: String, location: String },

    #[error("location {location} ({state}) is bound to more than one station")]
    AmbiguousLocation { state: String, location: String },

    #[error("weather for station {station} does not cover {start}..={end}")]
    CoverageHole {
        station: String,
        start: NaiveDate,
        end: NaiveDate,
    },

    #[error("harvest date {harvest} does not follow sown date {sown}")]
    NonPositiveInterval { sown: NaiveDate, harvest: NaiveDate },

    #[error("cannot fit a model on an empty training set")]
    EmptyTrainingSet,

    #[error("n_neighbors = {k} exceeds training set size {n}")]
    KTooLarge { k: usize, n: usize },

    #[error("design matrix is singular beyond the regularization floor")]
    SingularDesign,

    #[error("training loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("expected a feature vector of dimension {expected}, got {got}")]
    WrongDimension { expected: usize, got: usize },

    #[error("model has not been fitted")]
    Unfitted,

    #[error("scaler needs at least 2 rows, got {n}")]
    TooFewRows { n: usize },

    #[error("fold count {k} exceeds sample count {n}")]
    KExceedsN { k: usize, n: usize },

    #[error("input lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("metric input is empty")]
    Empty,

    #[error("{what} has zero variance; metric undefined")]
    DegenerateVariance { what: &'static str },

    #[error("percent error undefined: truth contains a zero at index {index}")]
    ZeroTruth { index: usize },

    #[error("t-test needs at least 2 values per sample, got {n}")]
    TooFewSamples { n: usize },

    #[error("state {state} not present in the dataset")]
    UnknownState { state: String },

    #[error("source state set selects no rows")]
    EmptySource,

    #[error("target state must not appear among the sources: {state}")]
    TargetInSources { state: String },

    #[error("dataset contains no samples")]
    EmptyDataset,

    #[error("unsupported model serialization format {found:?}")]
    UnknownModelFormat { found: String },

    #[error("invalid {field}: {reason}")]
    InvalidValue { field: &'static str, reason: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("model serialization: {0}")]
    ModelSerde(#[from] serde_json::Error),
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

/// Row-level problem recorded during parsing, joining, or evaluation.
///
/// Diagnostics never abort a run; they are collected, written to a
/// `.diagnostics.csv` sidecar, and echoed on standard error by the CLI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// File or stage the problem was observed in.
    pub source: String,
    /// 1-based data row within the file, when applicable.
    pub row: Option<usize>,
    pub kind: DiagnosticKind,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiagnosticKind {
    BadDate,
    BadValue,
    NegativeYield,
    BadNumeric,
    NonPositiveInterval,
    GapTooLarge,
    CoverageHole,
    DegenerateMetric,
    CandidateFailed,
    NonConvergence,
    Filtered,
}

impl DiagnosticKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiagnosticKind::BadDate => "bad_date",
            DiagnosticKind::BadValue => "bad_value",
            DiagnosticKind::NegativeYield => "negative_yield",
            DiagnosticKind::BadNumeric => "bad_numeric",
            DiagnosticKind::NonPositiveInterval => "non_positive_interval",
            DiagnosticKind::GapTooLarge => "gap_too_large",
            DiagnosticKind::CoverageHole => "coverage_hole",
            DiagnosticKind::DegenerateMetric => "degenerate_metric",
            DiagnosticKind::CandidateFailed => "candidate_failed",
            DiagnosticKind::NonConvergence => "non_convergence",
            DiagnosticKind::Filtered => "filtered",
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.row {
            Some(row) => write!(
                f,
                "{}:{}: {}: {}",
                self.source,
                row,
                self.kind.as_str(),
                self.detail
            ),
            None => write!(f, "{}: {}: {}", self.source, self.kind.as_str(), self.detail),
        }
    }
}
