//! Weather-driven forage yield modeling.
//!
//! The pipeline: ingest variety-trial and daily-weather files, engineer the
//! five weather/planting features, fit a suite of from-scratch regressors
//! under nested cross-validated grid search, and run pooled and
//! state-transfer experiments with leakage-audited preprocessing.

pub mod error;
pub mod experiments;
pub mod featurize;
pub mod ingest;
mod linalg;
pub mod models;
pub mod seeding;
pub mod selection;
pub mod stats;
pub mod synth;
pub mod types;

pub use error::{Diagnostic, DiagnosticKind, Error, Result};
pub use featurize::{Dataset, Sample, FEATURE_NAMES, N_FEATURES};
pub use types::{Granularity, HarvestRecord, Quality, StateCode, StationBinding, StationMap, WeatherDay, WeatherObs};

/// Caps the worker pool used for parallel grid candidates. Call once,
/// before any run; later calls are ignored. Results never depend on the
/// worker count.
pub fn configure_parallelism(jobs: usize) {
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global();
}
