//! Leakage-free preprocessing, fold construction, grid search, and the
//! nested cross-validation protocol.

mod audit;
mod folds;
mod grid;
mod nested;
mod scaler;

pub use audit::{AuditEvent, AuditSite, TrainingAudit};
pub use folds::{make_folds, FoldPlan};
pub use grid::{grid_search, CandidateScore, GridResult};
pub use nested::{nested_cv, CvReport, FoldOutcome, ScalingMode, SelectionConfig};
pub use scaler::Scaler;
