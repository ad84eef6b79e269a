//! Experiment orchestration: pooled nested CV over several model families,
//! state-transfer evaluation, and leave-one-state-out sweeps, plus the
//! report files they emit.
//!
//! Transfer runs never touch target rows during preprocessing or training:
//! hyperparameters come from 5-fold CV on the source rows, the scaler and
//! final model are fit on the source rows only, and the target is scored
//! exactly once. The audit hooks make that checkable.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, DiagnosticKind, Error, Result};
use crate::featurize::Dataset;
use crate::models::{fit_model, standard_grid, ModelFamily, ModelParams};
use crate::seeding::{derive, Stream};
use crate::selection::{
    grid_search, nested_cv, AuditSite, CvReport, Scaler, ScalingMode, SelectionConfig,
    TrainingAudit,
};
use crate::stats::{ttest_unpaired, MetricSet, TTestKind, TTestResult};
use crate::types::StateCode;

/// Stable per-family index for seed derivation, independent of request order.
fn family_index(family: ModelFamily) -> u64 {
    ModelFamily::ALL
        .iter()
        .position(|f| *f == family)
        .expect("every family is listed") as u64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairwiseTest {
    pub a: ModelFamily,
    pub b: ModelFamily,
    /// Welch test over the two families' per-fold R² samples; `None` when a
    /// side has fewer than two finite values.
    pub result: Option<TTestResult>,
    pub note: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PooledOutcome {
    pub reports: Vec<CvReport>,
    pub ttests: Vec<PairwiseTest>,
}

impl PooledOutcome {
    pub fn report_for(&self, family: ModelFamily) -> Option<&CvReport> {
        self.reports.iter().find(|r| r.family == family)
    }
}

/// Nested CV for every requested family on the pooled dataset, plus the
/// pairwise t-test matrix over per-fold R² values.
pub fn run_pooled(
    data: &Dataset,
    families: &[ModelFamily],
    cfg: &SelectionConfig,
    audit: Option<&TrainingAudit>,
) -> Result<PooledOutcome> {
    if families.is_empty() {
        return Err(Error::InvalidValue {
            field: "families",
            reason: "at least one model family is required".into(),
        });
    }
    let mut reports = Vec::with_capacity(families.len());
    for &family in families {
        let grid = standard_grid(family);
        reports.push(nested_cv(data, family, &grid, cfg, audit)?);
    }
    let mut ttests = Vec::new();
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            let finite = |r: &CvReport| -> Vec<f64> {
                r.fold_r2_values()
                    .into_iter()
                    .filter(|v| v.is_finite())
                    .collect()
            };
            let (sa, sb) = (finite(&reports[i]), finite(&reports[j]));
            let (result, note) = match ttest_unpaired(&sa, &sb, TTestKind::Welch) {
                Ok(t) => (Some(t), String::new()),
                Err(e) => (None, e.to_string()),
            };
            ttests.push(PairwiseTest {
                a: reports[i].family,
                b: reports[j].family,
                result,
                note,
            });
        }
    }
    Ok(PooledOutcome { reports, ttests })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TdaFamilyResult {
    pub family: ModelFamily,
    pub params: ModelParams,
    pub metrics: MetricSet,
    pub warnings: Vec<String>,
}

/// One source-set → target evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TdaReport {
    pub sources: Vec<StateCode>,
    pub target: StateCode,
    pub train_rows: usize,
    pub test_rows: usize,
    pub per_state_counts: BTreeMap<StateCode, usize>,
    pub results: Vec<TdaFamilyResult>,
    pub seed: u64,
    pub diagnostics: Vec<Diagnostic>,
}

/// Trains on the source states' rows as-is and scores the target state.
pub fn run_tda(
    data: &Dataset,
    sources: &[StateCode],
    target: StateCode,
    families: &[ModelFamily],
    cfg: &SelectionConfig,
    audit: Option<&TrainingAudit>,
) -> Result<TdaReport> {
    if sources.is_empty() {
        return Err(Error::EmptySource);
    }
    if sources.contains(&target) {
        return Err(Error::TargetInSources {
            state: target.to_string(),
        });
    }
    let counts = data.state_counts();
    for s in sources.iter().chain(std::iter::once(&target)) {
        if !counts.contains_key(s) {
            return Err(Error::UnknownState {
                state: s.to_string(),
            });
        }
    }
    let source_data = Dataset::new(
        data.samples
            .iter()
            .filter(|s| sources.contains(&s.state))
            .cloned()
            .collect(),
    );
    let target_rows: Vec<&crate::featurize::Sample> = data
        .samples
        .iter()
        .filter(|s| s.state == target)
        .collect();
    if source_data.is_empty() {
        return Err(Error::EmptySource);
    }

    let x_train = source_data.feature_rows();
    let y_train = source_data.targets();
    let mut results = Vec::new();
    let mut diagnostics = Vec::new();
    for &family in families {
        let fam_seed = derive(cfg.seed, Stream::Candidate, 0x1000 + family_index(family));
        let context = format!("tda/{}", family.name());
        // Literal-scaling mode pre-fits on the source rows only; the target
        // stays untouched either way.
        let literal_scaler = match cfg.scaling {
            ScalingMode::PaperLiteral => {
                if let Some(a) = audit {
                    a.record(
                        AuditSite::ScalerFit,
                        &format!("{context}/literal_scaling"),
                        source_data.samples.iter().map(|s| s.source_id.clone()),
                    );
                }
                Some(Scaler::fit(&x_train)?)
            }
            ScalingMode::PerFold => None,
        };
        let grid = standard_grid(family);
        let search = grid_search(
            &source_data,
            &grid,
            cfg.inner_k,
            fam_seed,
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

        let refit_ctx = format!("{context}/refit");
        let fitted_scaler;
        let scaler = match &literal_scaler {
            Some(s) => s,
            None => {
                if let Some(a) = audit {
                    a.record(
                        AuditSite::ScalerFit,
                        &refit_ctx,
                        source_data.samples.iter().map(|s| s.source_id.clone()),
                    );
                }
                fitted_scaler = Scaler::fit(&x_train)?;
                &fitted_scaler
            }
        };
        if let Some(a) = audit {
            a.record(
                AuditSite::ModelFit,
                &refit_ctx,
                source_data.samples.iter().map(|s| s.source_id.clone()),
            );
        }
        let model = fit_model(
            &winner,
            &scaler.apply(&x_train),
            &y_train,
            derive(fam_seed, Stream::Refit, 0),
        )?;
        let predictions: Vec<f64> = target_rows
            .iter()
            .map(|s| model.predict_one(&scaler.apply_row(&s.features())))
            .collect::<Result<_>>()?;
        let y_target: Vec<f64> = target_rows.iter().map(|s| s.target_yield).collect();
        let metrics = MetricSet::compute(&y_target, &predictions)?;
        if !metrics.r2.is_finite() {
            diagnostics.push(Diagnostic {
                source: context.clone(),
                row: None,
                kind: DiagnosticKind::DegenerateMetric,
                detail: format!("target r2 = {}", metrics.r2),
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
        results.push(TdaFamilyResult {
            family,
            params: winner,
            metrics,
            warnings,
        });
    }

    let mut per_state_counts = BTreeMap::new();
    for s in sources {
        per_state_counts.insert(*s, counts[s]);
    }
    per_state_counts.insert(target, counts[&target]);
    Ok(TdaReport {
        sources: sources.to_vec(),
        target,
        train_rows: source_data.len(),
        test_rows: target_rows.len(),
        per_state_counts,
        results,
        seed: cfg.seed,
        diagnostics,
    })
}

/// One [`run_tda`] per state as the target, all other states as sources.
pub fn run_loso(
    data: &Dataset,
    families: &[ModelFamily],
    cfg: &SelectionConfig,
    audit: Option<&TrainingAudit>,
) -> Result<Vec<TdaReport>> {
    let states: Vec<StateCode> = data.state_counts().keys().copied().collect();
    if states.len() < 2 {
        return Err(Error::InvalidValue {
            field: "states",
            reason: format!(
                "leave-one-state-out needs at least 2 states, found {}",
                states.len()
            ),
        });
    }
    states
        .iter()
        .map(|&target| {
            let sources: Vec<StateCode> =
                states.iter().copied().filter(|s| *s != target).collect();
            run_tda(data, &sources, target, families, cfg, audit)
        })
        .collect()
}

/// Flags echoed into every report for auditability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunFlags {
    pub seed: u64,
    pub scaling: ScalingMode,
    pub granularity: String,
    pub svr_epsilon: f64,
    pub states: Vec<StateCode>,
    pub rows: usize,
}

/// Machine snapshot of a run, written next to the CSV tables so summaries
/// can be regenerated without recomputation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultsSnapshot {
    pub flags: RunFlags,
    pub pooled: Option<PooledOutcome>,
    pub tda: Vec<TdaReport>,
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v}")
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Writes `pooled_report.csv`: one row per fold per family plus aggregate
/// mean/std/best rows.
fn render_pooled_csv(outcome: &PooledOutcome) -> String {
    let mut out = String::from("family,row,fold,hyperparameters,mae,percent_error,r,r2,seed\n");
    for report in &outcome.reports {
        for f in &report.folds {
            out.push_str(&format!(
                "{},fold,{},{},{},{},{},{},{}\n",
                report.family,
                f.fold,
                f.params.describe(),
                fmt_f64(f.metrics.mae),
                fmt_f64(f.metrics.percent_error),
                fmt_f64(f.metrics.r),
                fmt_f64(f.metrics.r2),
                report.seed
            ));
        }
        for (label, m) in [("mean", &report.mean), ("std", &report.std)] {
            out.push_str(&format!(
                "{},{},,,{},{},{},{},{}\n",
                report.family,
                label,
                fmt_f64(m.mae),
                fmt_f64(m.percent_error),
                fmt_f64(m.r),
                fmt_f64(m.r2),
                report.seed
            ));
        }
        if let Some(best) = report.best() {
            out.push_str(&format!(
                "{},best,{},{},{},{},{},{},{}\n",
                report.family,
                best.fold,
                best.params.describe(),
                fmt_f64(best.metrics.mae),
                fmt_f64(best.metrics.percent_error),
                fmt_f64(best.metrics.r),
                fmt_f64(best.metrics.r2),
                report.seed
            ));
        }
    }
    out
}

fn render_ttest_csv(outcome: &PooledOutcome) -> String {
    let mut out = String::from("family_a,family_b,t,df,p,note\n");
    for t in &outcome.ttests {
        match &t.result {
            Some(r) => out.push_str(&format!(
                "{},{},{},{},{},\n",
                t.a,
                t.b,
                fmt_f64(r.t),
                fmt_f64(r.df),
                fmt_f64(r.p)
            )),
            None => out.push_str(&format!("{},{},,,,{}\n", t.a, t.b, t.note)),
        }
    }
    out
}

fn render_tda_csv(reports: &[TdaReport]) -> String {
    let mut out = String::from(
        "target,sources,family,hyperparameters,train_rows,test_rows,mae,percent_error,r,r2,seed\n",
    );
    for r in reports {
        let sources = r
            .sources
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join("+");
        for fam in &r.results {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                r.target,
                sources,
                fam.family,
                fam.params.describe(),
                r.train_rows,
                r.test_rows,
                fmt_f64(fam.metrics.mae),
                fmt_f64(fam.metrics.percent_error),
                fmt_f64(fam.metrics.r),
                fmt_f64(fam.metrics.r2),
                r.seed
            ));
        }
    }
    out
}

/// Deterministic human-readable summary of a snapshot.
pub fn render_summary(snapshot: &ResultsSnapshot) -> String {
    let f = &snapshot.flags;
    let mut out = String::new();
    out.push_str("fieldcast run summary\n");
    out.push_str("=====================\n");
    out.push_str(&format!(
        "seed={} scaling={} granularity={} svr_epsilon={} rows={}\n",
        f.seed,
        f.scaling.as_str(),
        f.granularity,
        f.svr_epsilon,
        f.rows
    ));
    out.push_str(&format!(
        "states: {}\n",
        f.states
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",")
    ));
    if let Some(pooled) = &snapshot.pooled {
        out.push_str("\npooled nested cross-validation (mean over outer folds | best fold)\n");
        out.push_str("family  mean_r2    best_r2    mean_mae   best_mae   mean_pct_err\n");
        for r in &pooled.reports {
            let (best_r2, best_mae) = r
                .best()
                .map(|b| (b.metrics.r2, b.metrics.mae))
                .unwrap_or((f64::NAN, f64::NAN));
            out.push_str(&format!(
                "{:<7} {:<10.4} {:<10.4} {:<10.4} {:<10.4} {:<10.4}\n",
                r.family.to_string(),
                r.mean.r2,
                best_r2,
                r.mean.mae,
                best_mae,
                r.mean.percent_error
            ));
        }
        if !pooled.ttests.is_empty() {
            out.push_str("\npairwise Welch t-tests on per-fold R² (two-tailed p)\n");
            for t in &pooled.ttests {
                match &t.result {
                    Some(r) => out.push_str(&format!(
                        "{} vs {}: t={:.4} df={:.2} p={:.4}\n",
                        t.a, t.b, r.t, r.df, r.p
                    )),
                    None => out.push_str(&format!("{} vs {}: unavailable ({})\n", t.a, t.b, t.note)),
                }
            }
        }
        let n_diag: usize = pooled.reports.iter().map(|r| r.diagnostics.len()).sum();
        if n_diag > 0 {
            out.push_str(&format!(
                "\n{n_diag} diagnostics recorded (see run.diagnostics.csv)\n"
            ));
        }
    }
    if !snapshot.tda.is_empty() {
        out.push_str("\nstate-transfer evaluation (train on sources, test on target)\n");
        for r in &snapshot.tda {
            let sources = r
                .sources
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join("+");
            out.push_str(&format!(
                "\ntarget {} | sources {} | train {} rows, test {} rows\n",
                r.target, sources, r.train_rows, r.test_rows
            ));
            out.push_str("family  r2         mae        pct_err\n");
            for fam in &r.results {
                out.push_str(&format!(
                    "{:<7} {:<10.4} {:<10.4} {:<10.4}\n",
                    fam.family.to_string(),
                    fam.metrics.r2,
                    fam.metrics.mae,
                    fam.metrics.percent_error
                ));
            }
        }
    }
    out
}

/// Writes every report artifact for a run into `dir`.
///
/// Report bodies are pure functions of the snapshot: re-running with the
/// same seed and inputs reproduces them byte for byte.
pub fn emit_report(dir: &Path, snapshot: &ResultsSnapshot) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    if let Some(pooled) = &snapshot.pooled {
        write_file(&dir.join("pooled_report.csv"), &render_pooled_csv(pooled))?;
        write_file(&dir.join("ttest_matrix.csv"), &render_ttest_csv(pooled))?;
    }
    if !snapshot.tda.is_empty() {
        write_file(&dir.join("tda_report.csv"), &render_tda_csv(&snapshot.tda))?;
    }
    let mut diagnostics: Vec<Diagnostic> = Vec::new();
    if let Some(pooled) = &snapshot.pooled {
        for r in &pooled.reports {
            diagnostics.extend(r.diagnostics.iter().cloned());
        }
    }
    for r in &snapshot.tda {
        diagnostics.extend(r.diagnostics.iter().cloned());
    }
    if !diagnostics.is_empty() {
        crate::ingest::write_diagnostics_sidecar(&dir.join("run.diagnostics.csv"), &diagnostics)?;
    }
    let json = serde_json::to_string_pretty(snapshot)?;
    write_file(&dir.join("results.json"), &json)?;
    write_file(&dir.join("summary.txt"), &render_summary(snapshot))
}

/// Reads a stored snapshot back (for summary regeneration).
pub fn load_snapshot(dir: &Path) -> Result<ResultsSnapshot> {
    let path = dir.join("results.json");
    let body =
        std::fs::read_to_string(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(serde_json::from_str(&body)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featurize::Sample;
    use crate::synth::{generate, oracle_eval, SynthConfig};

    fn synth_dataset(n_states: usize, per_state: usize, seed: u64) -> Dataset {
        // Build samples directly from the generator's oracle: deterministic
        // and much faster than round-tripping files for these tests.
        let mut samples = Vec::new();
        let mut rng_state = seed | 1;
        let mut next = move || {
            rng_state = rng_state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        for s in 0..n_states {
            let code = StateCode::parse(&format!(
                "{}{}",
                (b'A' + s as u8) as char,
                (b'A' + s as u8) as char
            ))
            .unwrap();
            for i in 0..per_state {
                let jd = 210.0 + (next() * 90.0).floor();
                let dss = 300.0 + (next() * 1000.0).floor();
                let solar = 3000.0 + next() * 2000.0;
                let rain = 10.0 + next() * 25.0;
                let temp = 55.0 + next() * 16.0;
                let features = [jd, dss, solar, rain, temp];
                samples.push(Sample {
                    julian_day: jd as u32,
                    days_since_sown: dss as u32,
                    cum_solar: solar,
                    cum_rain: rain,
                    temp,
                    target_yield: oracle_eval(&features).max(0.0),
                    state: code,
                    source_id: format!("{code}:{i}"),
                });
            }
        }
        Dataset::new(samples)
    }

    fn fast_families() -> Vec<ModelFamily> {
        vec![ModelFamily::Tree, ModelFamily::Linear]
    }

    #[test]
    fn single_family_gives_one_report_and_no_ttests() {
        let data = synth_dataset(1, 60, 3);
        let cfg = SelectionConfig::new(5);
        let outcome = run_pooled(&data, &[ModelFamily::Tree], &cfg, None).unwrap();
        assert_eq!(outcome.reports.len(), 1);
        assert!(outcome.ttests.is_empty());
    }

    #[test]
    fn pooled_runs_pair_every_family() {
        let data = synth_dataset(1, 60, 3);
        let cfg = SelectionConfig::new(5);
        let outcome = run_pooled(&data, &fast_families(), &cfg, None).unwrap();
        assert_eq!(outcome.reports.len(), 2);
        assert_eq!(outcome.ttests.len(), 1);
        let t = &outcome.ttests[0];
        assert_eq!((t.a, t.b), (ModelFamily::Tree, ModelFamily::Linear));
    }

    #[test]
    fn tda_rejects_bad_plans() {
        let data = synth_dataset(2, 30, 9);
        let cfg = SelectionConfig::new(1);
        let aa = StateCode::parse("AA").unwrap();
        let zz = StateCode::parse("ZZ").unwrap();
        assert!(matches!(
            run_tda(&data, &[aa], aa, &fast_families(), &cfg, None),
            Err(Error::TargetInSources { .. })
        ));
        assert!(matches!(
            run_tda(&data, &[zz], aa, &fast_families(), &cfg, None),
            Err(Error::UnknownState { .. })
        ));
        assert!(matches!(
            run_tda(&data, &[], aa, &fast_families(), &cfg, None),
            Err(Error::EmptySource)
        ));
    }

    #[test]
    fn tda_counts_match_the_state_grouping() {
        let data = synth_dataset(3, 25, 9);
        let cfg = SelectionConfig::new(1);
        let states: Vec<StateCode> = data.state_counts().keys().copied().collect();
        let report = run_tda(
            &data,
            &states[..2].to_vec(),
            states[2],
            &fast_families(),
            &cfg,
            None,
        )
        .unwrap();
        assert_eq!(report.train_rows, 50);
        assert_eq!(report.test_rows, 25);
        assert_eq!(report.per_state_counts.len(), 3);
        assert_eq!(report.results.len(), 2);
    }

    #[test]
    fn twin_states_transfer_without_a_gap() {
        // Identical distributions: transfer R² must land near pooled R².
        let data = synth_dataset(2, 250, 21);
        let cfg = SelectionConfig::new(4);
        let states: Vec<StateCode> = data.state_counts().keys().copied().collect();
        let pooled = run_pooled(&data, &[ModelFamily::Knn], &cfg, None).unwrap();
        let tda = run_tda(&data, &[states[0]], states[1], &[ModelFamily::Knn], &cfg, None).unwrap();
        let pooled_r2 = pooled.reports[0].mean.r2;
        let tda_r2 = tda.results[0].metrics.r2;
        assert!(
            (pooled_r2 - tda_r2).abs() < 0.05,
            "pooled {pooled_r2} vs tda {tda_r2}"
        );
    }

    #[test]
    fn loso_covers_every_state_once() {
        let data = synth_dataset(3, 25, 13);
        let cfg = SelectionConfig::new(2);
        let reports = run_loso(&data, &[ModelFamily::Tree], &cfg, None).unwrap();
        assert_eq!(reports.len(), 3);
        let total: usize = reports.iter().map(|r| r.test_rows).sum();
        assert_eq!(total, data.len());
        for r in &reports {
            assert_eq!(r.train_rows + r.test_rows, data.len());
            assert!(!r.sources.contains(&r.target));
        }
        let data_one = synth_dataset(1, 30, 13);
        assert!(run_loso(&data_one, &[ModelFamily::Tree], &cfg, None).is_err());
    }

    #[test]
    fn tda_audit_never_touches_target_rows() {
        let data = synth_dataset(2, 40, 31);
        let cfg = SelectionConfig::new(8);
        let states: Vec<StateCode> = data.state_counts().keys().copied().collect();
        let audit = TrainingAudit::new();
        run_tda(&data, &[states[0]], states[1], &fast_families(), &cfg, Some(&audit)).unwrap();
        let target_ids: Vec<String> = data
            .samples
            .iter()
            .filter(|s| s.state == states[1])
            .map(|s| s.source_id.clone())
            .collect();
        for event in audit.events() {
            for id in &event.row_ids {
                assert!(!target_ids.contains(id), "{id} leaked into {}", event.context);
            }
        }
    }

    #[test]
    fn reports_are_byte_deterministic() {
        let data = synth_dataset(2, 30, 7);
        let cfg = SelectionConfig::new(77);
        let states: Vec<StateCode> = data.state_counts().keys().copied().collect();
        let render = || {
            let pooled = run_pooled(&data, &fast_families(), &cfg, None).unwrap();
            let tda =
                run_tda(&data, &[states[0]], states[1], &fast_families(), &cfg, None).unwrap();
            let snapshot = ResultsSnapshot {
                flags: RunFlags {
                    seed: cfg.seed,
                    scaling: cfg.scaling,
                    granularity: "annual".into(),
                    svr_epsilon: 0.1,
                    states: states.clone(),
                    rows: data.len(),
                },
                pooled: Some(pooled),
                tda: vec![tda],
            };
            (
                render_pooled_csv(snapshot.pooled.as_ref().unwrap()),
                render_tda_csv(&snapshot.tda),
                render_summary(&snapshot),
            )
        };
        assert_eq!(render(), render());
    }

    #[test]
    fn emit_and_reload_roundtrip() {
        let data = synth_dataset(1, 40, 19);
        let cfg = SelectionConfig::new(12);
        let pooled = run_pooled(&data, &[ModelFamily::Tree], &cfg, None).unwrap();
        let snapshot = ResultsSnapshot {
            flags: RunFlags {
                seed: 12,
                scaling: ScalingMode::PerFold,
                granularity: "annual".into(),
                svr_epsilon: 0.1,
                states: data.state_counts().keys().copied().collect(),
                rows: data.len(),
            },
            pooled: Some(pooled),
            tda: Vec::new(),
        };
        let dir = tempfile::tempdir().unwrap();
        emit_report(dir.path(), &snapshot).unwrap();
        assert!(dir.path().join("pooled_report.csv").exists());
        assert!(dir.path().join("ttest_matrix.csv").exists());
        assert!(dir.path().join("summary.txt").exists());
        let reloaded = load_snapshot(dir.path()).unwrap();
        assert_eq!(render_summary(&reloaded), render_summary(&snapshot));
    }

    #[test]
    fn generated_corpus_feeds_the_experiments() {
        // End-to-end sanity: a real generated corpus runs pooled CV.
        let dir = tempfile::tempdir().unwrap();
        let config = SynthConfig {
            seed: 3,
            n_states: 2,
            samples_per_state: 25,
            noise_sd: 0.0,
            offsets: Vec::new(),
            truth: crate::synth::GroundTruth::Standard,
            first_year: 2012,
            n_years: 5,
        };
        let corpus = generate(&config, dir.path()).unwrap();
        assert_eq!(corpus.harvest_files.len(), 2);
        assert_eq!(corpus.weather_files.len(), 2);
    }
}
