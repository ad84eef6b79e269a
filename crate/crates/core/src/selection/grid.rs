//! Grid search with inner k-fold cross-validation.
//!
//! Each candidate is scored by its mean validation MAE over the inner
//! folds; scalers are fit on the inner-training side of every fold (unless
//! a pre-fit scaler is supplied for the literal-scaling sensitivity mode).
//! Candidates whose fit fails on any fold score +∞ and stay in the result
//! with the failure logged. Ties resolve to the earliest candidate in grid
//! enumeration order.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::featurize::Dataset;
use crate::models::{fit_model, ModelParams};
use crate::seeding::{derive, Stream};
use crate::selection::audit::{record_if, AuditSite, TrainingAudit};
use crate::selection::folds::make_folds;
use crate::selection::scaler::Scaler;
use crate::stats;

#[derive(Debug, Clone)]
pub struct CandidateScore {
    pub params: ModelParams,
    /// Mean inner-CV MAE; `None` when no inner runs happened (single
    /// candidate) and +∞ when any fold failed.
    pub mean_mae: Option<f64>,
    pub fold_maes: Vec<f64>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub candidates: Vec<CandidateScore>,
    pub winner_index: usize,
}

impl GridResult {
    pub fn winner(&self) -> &ModelParams {
        &self.candidates[self.winner_index].params
    }
}

/// Scores every candidate in `grid` on `train` with `inner_k`-fold CV.
///
/// `scaler_override` injects a pre-fit scaler (literal-scaling mode);
/// otherwise each inner fold fits its own on the training side only.
pub fn grid_search(
    train: &Dataset,
    grid: &[ModelParams],
    inner_k: usize,
    seed: u64,
    scaler_override: Option<&Scaler>,
    audit: Option<&TrainingAudit>,
    context: &str,
) -> Result<GridResult> {
    if grid.is_empty() {
        return Err(Error::InvalidValue {
            field: "grid",
            reason: "candidate list is empty".into(),
        });
    }
    if grid.len() == 1 {
        // Trivial winner; zero inner CV runs.
        return Ok(GridResult {
            candidates: vec![CandidateScore {
                params: grid[0].clone(),
                mean_mae: None,
                fold_maes: Vec::new(),
                failures: Vec::new(),
            }],
            winner_index: 0,
        });
    }
    let n = train.len();
    if n < inner_k {
        return Err(Error::KExceedsN { k: inner_k, n });
    }

    let rows = train.feature_rows();
    let targets = train.targets();
    let plan = make_folds(n, inner_k, derive(seed, Stream::InnerFolds, 0))?;

    let candidates: Vec<CandidateScore> = grid
        .par_iter()
        .enumerate()
        .map(|(c, params)| {
            let cand_seed = derive(seed, Stream::Candidate, c as u64);
            let mut fold_maes = Vec::with_capacity(inner_k);
            let mut failures = Vec::new();
            for fold in 0..inner_k {
                let (train_idx, val_idx) = plan.split(fold);
                let fold_ctx = format!("{context}/cand{c}/inner{fold}");
                let x_train: Vec<Vec<f64>> = train_idx.iter().map(|&i| rows[i].clone()).collect();
                let y_train: Vec<f64> = train_idx.iter().map(|&i| targets[i]).collect();

                let fitted_scaler;
                let scaler = match scaler_override {
                    Some(s) => s,
                    None => {
                        record_if(audit, AuditSite::ScalerFit, &fold_ctx, || {
                            train_idx
                                .iter()
                                .map(|&i| train.samples[i].source_id.clone())
                                .collect()
                        });
                        match Scaler::fit(&x_train) {
                            Ok(s) => {
                                fitted_scaler = s;
                                &fitted_scaler
                            }
                            Err(e) => {
                                failures.push(format!("inner{fold}: {e}"));
                                continue;
                            }
                        }
                    }
                };
                let x_train_scaled = scaler.apply(&x_train);
                record_if(audit, AuditSite::ModelFit, &fold_ctx, || {
                    train_idx
                        .iter()
                        .map(|&i| train.samples[i].source_id.clone())
                        .collect()
                });
                let fit_seed = derive(cand_seed, Stream::InnerFit, fold as u64);
                let model = match fit_model(params, &x_train_scaled, &y_train, fit_seed) {
                    Ok(m) => m,
                    Err(e) => {
                        failures.push(format!("inner{fold}: {e}"));
                        continue;
                    }
                };
                let predictions: Result<Vec<f64>> = val_idx
                    .iter()
                    .map(|&i| model.predict_one(&scaler.apply_row(&rows[i])))
                    .collect();
                let y_val: Vec<f64> = val_idx.iter().map(|&i| targets[i]).collect();
                match predictions.and_then(|p| stats::mae(&y_val, &p)) {
                    Ok(m) => fold_maes.push(m),
                    Err(e) => failures.push(format!("inner{fold}: {e}")),
                }
            }
            let mean_mae = if failures.is_empty() && fold_maes.len() == inner_k {
                Some(fold_maes.iter().sum::<f64>() / inner_k as f64)
            } else {
                Some(f64::INFINITY)
            };
            CandidateScore {
                params: params.clone(),
                mean_mae,
                fold_maes,
                failures,
            }
        })
        .collect();

    let mut winner_index = 0;
    let mut best = f64::INFINITY;
    for (i, c) in candidates.iter().enumerate() {
        let score = c.mean_mae.unwrap_or(f64::INFINITY);
        if score < best {
            best = score;
            winner_index = i;
        }
    }
    Ok(GridResult {
        candidates,
        winner_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featurize::Sample;
    use crate::models::{standard_grid, ModelFamily, TreeParams};
    use crate::types::StateCode;

    fn dataset(n: usize) -> Dataset {
        let mut state = 17u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let samples = (0..n)
            .map(|i| {
                let jd = 100 + (i % 150) as u32;
                let dss = 300 + (i * 7 % 400) as u32;
                let solar = 1000.0 + next() * 2000.0;
                let rain = 5.0 + next() * 30.0;
                let temp = 50.0 + next() * 30.0;
                Sample {
                    julian_day: jd,
                    days_since_sown: dss,
                    cum_solar: solar,
                    cum_rain: rain,
                    temp,
                    target_yield: if rain > 20.0 { 4.0 } else { 1.0 },
                    state: StateCode::parse("AA").unwrap(),
                    source_id: format!("row{i}"),
                }
            })
            .collect();
        Dataset::new(samples)
    }

    #[test]
    fn single_candidate_wins_with_zero_runs() {
        let data = dataset(20);
        let grid = standard_grid(ModelFamily::Linear);
        let result = grid_search(&data, &grid, 5, 1, None, None, "t").unwrap();
        assert_eq!(result.winner_index, 0);
        assert_eq!(result.candidates.len(), 1);
        assert!(result.candidates[0].mean_mae.is_none());
        assert!(result.candidates[0].fold_maes.is_empty());
    }

    #[test]
    fn tied_tree_depths_resolve_to_the_first() {
        // A step function any depth ≥ 1 fits exactly: all depths tie at
        // zero-ish MAE and the depth-5 candidate (first) must win.
        let data = dataset(40);
        let grid = standard_grid(ModelFamily::Tree);
        let result = grid_search(&data, &grid, 5, 3, None, None, "t").unwrap();
        assert_eq!(result.winner_index, 0);
        match result.winner() {
            ModelParams::Tree(TreeParams { max_depth }) => assert_eq!(*max_depth, 5),
            other => panic!("unexpected winner {other:?}"),
        }
    }

    #[test]
    fn winner_attains_minimum_mean_mae() {
        let data = dataset(30);
        let grid = standard_grid(ModelFamily::Knn);
        let result = grid_search(&data, &grid, 5, 9, None, None, "t").unwrap();
        let best = result.candidates[result.winner_index].mean_mae.unwrap();
        for c in &result.candidates {
            assert!(best <= c.mean_mae.unwrap());
        }
    }

    #[test]
    fn failing_candidates_score_infinity_and_are_logged() {
        // k = 10 exceeds the inner-training size (12 · 4/5 ≈ 9), so those
        // candidates must fail while k = 2 and k = 5 survive.
        let data = dataset(12);
        let grid = standard_grid(ModelFamily::Knn);
        let result = grid_search(&data, &grid, 5, 2, None, None, "t").unwrap();
        let failed: Vec<&CandidateScore> = result
            .candidates
            .iter()
            .filter(|c| c.mean_mae == Some(f64::INFINITY))
            .collect();
        assert!(!failed.is_empty());
        assert!(failed.iter().all(|c| !c.failures.is_empty()));
        assert!(result.candidates[result.winner_index].mean_mae.unwrap().is_finite());
    }

    #[test]
    fn too_small_training_set_is_rejected() {
        let data = dataset(3);
        let grid = standard_grid(ModelFamily::Tree);
        assert!(matches!(
            grid_search(&data, &grid, 5, 0, None, None, "t"),
            Err(Error::KExceedsN { k: 5, n: 3 })
        ));
    }

    #[test]
    fn audit_sees_only_training_rows_per_fold() {
        let data = dataset(25);
        let grid = standard_grid(ModelFamily::Tree);
        let audit = TrainingAudit::new();
        grid_search(&data, &grid, 5, 11, None, Some(&audit), "g").unwrap();
        let events = audit.events();
        assert!(!events.is_empty());
        // Reconstruct the fold plan and check each event against it.
        let plan = make_folds(25, 5, derive(11, Stream::InnerFolds, 0)).unwrap();
        for e in events {
            let fold: usize = e.context.rsplit("inner").next().unwrap().parse().unwrap();
            let held_out: Vec<String> = plan.folds()[fold]
                .iter()
                .map(|&i| data.samples[i].source_id.clone())
                .collect();
            for id in &e.row_ids {
                assert!(!held_out.contains(id), "{id} leaked into {}", e.context);
            }
        }
    }
}
