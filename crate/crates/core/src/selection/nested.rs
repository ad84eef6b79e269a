//! The nested cross-validation protocol: an outer k-fold for performance
//! estimation with a full grid search inside every outer-training split.
//!
//! Scaling is leakage-free by default — statistics come from the training
//! side of whichever split is active. The literal-scaling mode instead fits
//! one scaler on the entire dataset before splitting, reproducing the looser
//! reading of "normalized before training" for sensitivity probes; the
//! leak is visible to the audit.

use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, DiagnosticKind, Error, Result};
use crate::featurize::Dataset;
use crate::models::{fit_model, ModelFamily, ModelParams};
use crate::seeding::{derive, Stream};
use crate::selection::audit::{record_if, AuditSite, TrainingAudit};
use crate::selection::folds::make_folds;
use crate::selection::grid::grid_search;
use crate::selection::scaler::Scaler;
use crate::stats::MetricSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingMode {
    /// Fit scalers on the training side of every split (default).
    PerFold,
    /// Fit one scaler on all data before splitting (sensitivity probe).
    PaperLiteral,
}

impl ScalingMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScalingMode::PerFold => "per_fold",
            ScalingMode::PaperLiteral => "paper_literal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub outer_k: usize,
    pub inner_k: usize,
    pub scaling: ScalingMode,
    pub seed: u64,
}

impl SelectionConfig {
    pub fn new(seed: u64) -> Self {
        SelectionConfig {
            outer_k: 10,
            inner_k: 5,
            scaling: ScalingMode::PerFold,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub fold: usize,
    pub params: ModelParams,
    pub metrics: MetricSet,
    pub n_test: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvReport {
    pub family: ModelFamily,
    pub seed: u64,
    pub scaling: ScalingMode,
    pub folds: Vec<FoldOutcome>,
    /// Component-wise mean over folds, ignoring NaN entries.
    pub mean: MetricSet,
    /// Component-wise sample standard deviation over folds, ignoring NaN.
    pub std: MetricSet,
    /// Fold index with the highest finite R².
    pub best_fold: Option<usize>,
    pub diagnostics: Vec<Diagnostic>,
}

impl CvReport {
    pub fn fold_r2_values(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.metrics.r2).collect()
    }

    pub fn best(&self) -> Option<&FoldOutcome> {
        self.best_fold.map(|i| &self.folds[i])
    }
}

fn nan_mean(values: impl Iterator<Item = f64>) -> f64 {
    let finite: Vec<f64> = values.filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        f64::NAN
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    }
}

fn nan_std(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let finite: Vec<f64> = values.filter(|v| v.is_finite()).collect();
    if finite.len() < 2 {
        return f64::NAN;
    }
    let n = finite.len() as f64;
    let mean = finite.iter().sum::<f64>() / n;
    (finite.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Runs the outer CV loop for one family.
pub fn nested_cv(
    data: &Dataset,
    family: ModelFamily,
    grid: &[ModelParams],
    cfg: &SelectionConfig,
    audit: Option<&TrainingAudit>,
) -> Result<CvReport> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = data.len();
    if n < cfg.outer_k {
        return Err(Error::KExceedsN { k: cfg.outer_k, n });
    }
    let rows = data.feature_rows();
    let targets = data.targets();
    let plan = make_folds(n, cfg.outer_k, derive(cfg.seed, Stream::OuterFolds, 0))?;

    let literal_scaler = match cfg.scaling {
        ScalingMode::PaperLiteral => {
            record_if(audit, AuditSite::ScalerFit, "paper_literal_scaling", || {
                data.samples.iter().map(|s| s.source_id.clone()).collect()
            });
            Some(Scaler::fit(&rows)?)
        }
        ScalingMode::PerFold => None,
    };

    let mut folds = Vec::with_capacity(cfg.outer_k);
    let mut diagnostics = Vec::new();
    for fold in 0..cfg.outer_k {
        let (train_idx, test_idx) = plan.split(fold);
        let fold_seed = derive(cfg.seed, Stream::Candidate, fold as u64);
        let context = format!("outer{fold}");

        let train_data = Dataset::new(
            train_idx
                .iter()
                .map(|&i| data.samples[i].clone())
                .collect(),
        );
        let search = grid_search(
            &train_data,
            grid,
            cfg.inner_k,
            fold_seed,
            literal_scaler.as_ref(),
            audit,
            &context,
        )?;
        for c in &search.candidates {
            for failure in &c.failures {
                diagnostics.push(Diagnostic {
                    source: format!("{context}/{}", c.params.describe()),
                    row: None,
                    kind: DiagnosticKind::CandidateFailed,
                    detail: failure.clone(),
                });
            }
        }
        let winner = search.winner().clone();

        // Refit the winner on the full outer-training split.
        let x_train: Vec<Vec<f64>> = train_idx.iter().map(|&i| rows[i].clone()).collect();
        let y_train: Vec<f64> = train_idx.iter().map(|&i| targets[i]).collect();
        let refit_ctx = format!("{context}/refit");
        let fitted_scaler;
        let scaler = match &literal_scaler {
            Some(s) => s,
            None => {
                record_if(audit, AuditSite::ScalerFit, &refit_ctx, || {
                    train_idx
                        .iter()
                        .map(|&i| data.samples[i].source_id.clone())
                        .collect()
                });
                fitted_scaler = Scaler::fit(&x_train)?;
                &fitted_scaler
            }
        };
        record_if(audit, AuditSite::ModelFit, &refit_ctx, || {
            train_idx
                .iter()
                .map(|&i| data.samples[i].source_id.clone())
                .collect()
        });
        let model = fit_model(
            &winner,
            &scaler.apply(&x_train),
            &y_train,
            derive(fold_seed, Stream::Refit, 0),
        )?;
        let predictions: Vec<f64> = test_idx
            .iter()
            .map(|&i| model.predict_one(&scaler.apply_row(&rows[i])))
            .collect::<Result<_>>()?;
        let y_test: Vec<f64> = test_idx.iter().map(|&i| targets[i]).collect();
        let metrics = MetricSet::compute(&y_test, &predictions)?;
        if !metrics.r2.is_finite() || !metrics.r.is_finite() || !metrics.percent_error.is_finite() {
            diagnostics.push(Diagnostic {
                source: context.clone(),
                row: None,
                kind: DiagnosticKind::DegenerateMetric,
                detail: format!(
                    "fold {fold}: r={}, r2={}, percent_error={}",
                    metrics.r, metrics.r2, metrics.percent_error
                ),
            });
        }
        let warnings = model.warnings();
        for w in &warnings {
            diagnostics.push(Diagnostic {
                source: context.clone(),
                row: None,
                kind: DiagnosticKind::NonConvergence,
                detail: w.clone(),
            });
        }
        folds.push(FoldOutcome {
            fold,
            params: winner,
            metrics,
            n_test: test_idx.len(),
            warnings,
        });
    }

    let mean = MetricSet {
        mae: nan_mean(folds.iter().map(|f| f.metrics.mae)),
        percent_error: nan_mean(folds.iter().map(|f| f.metrics.percent_error)),
        r: nan_mean(folds.iter().map(|f| f.metrics.r)),
        r2: nan_mean(folds.iter().map(|f| f.metrics.r2)),
    };
    let std = MetricSet {
        mae: nan_std(folds.iter().map(|f| f.metrics.mae)),
        percent_error: nan_std(folds.iter().map(|f| f.metrics.percent_error)),
        r: nan_std(folds.iter().map(|f| f.metrics.r)),
        r2: nan_std(folds.iter().map(|f| f.metrics.r2)),
    };
    let best_fold = folds
        .iter()
        .filter(|f| f.metrics.r2.is_finite())
        .max_by(|a, b| a.metrics.r2.total_cmp(&b.metrics.r2))
        .map(|f| f.fold);

    Ok(CvReport {
        family,
        seed: cfg.seed,
        scaling: cfg.scaling,
        folds,
        mean,
        std,
        best_fold,
        diagnostics,
    })
}
