//! The seven regressor families behind one fit/predict contract.
//!
//! Everything here is trained on plain `&[Vec<f64>]` feature rows (scaled
//! upstream by the selection layer) and predicts one yield value per
//! 5-vector. Fitted models are immutable, shareable across threads, and
//! serialize to a versioned JSON envelope for reproducibility audits.

mod bayes;
mod forest;
mod grids;
mod knn;
mod linear;
mod mlp;
mod svr;
mod tree;

pub use bayes::{BayesRidgeParams, BayesianRidge};
pub use forest::{ForestParams, RandomForest};
pub use grids::{standard_grid, ModelParams};
pub use knn::{KnnParams, KnnRegressor, KnnWeights};
pub use linear::LinearModel;
pub use mlp::{Layer, LearningRateSchedule, MlpParams, MlpRegressor, MlpSolver};
pub use svr::{resolve_gamma, solve_dual, DualSolution, GammaSpec, SvrKernel, SvrModel, SvrParams};
pub use tree::{RegressionTree, TreeNode, TreeParams};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The model families under comparison. Display uses the short report codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Tree,
    Forest,
    Knn,
    Svr,
    BayesRidge,
    Linear,
    Mlp,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 7] = [
        ModelFamily::Tree,
        ModelFamily::Forest,
        ModelFamily::Knn,
        ModelFamily::Svr,
        ModelFamily::BayesRidge,
        ModelFamily::Linear,
        ModelFamily::Mlp,
    ];

    /// Short code used in report tables.
    pub fn code(&self) -> &'static str {
        match self {
            ModelFamily::Tree => "DT",
            ModelFamily::Forest => "RF",
            ModelFamily::Knn => "KNN",
            ModelFamily::Svr => "SVM",
            ModelFamily::BayesRidge => "BRR",
            ModelFamily::Linear => "LR",
            ModelFamily::Mlp => "NN",
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelFamily::Tree => "tree",
            ModelFamily::Forest => "forest",
            ModelFamily::Knn => "knn",
            ModelFamily::Svr => "svr",
            ModelFamily::BayesRidge => "bayes_ridge",
            ModelFamily::Linear => "linear",
            ModelFamily::Mlp => "mlp",
        }
    }
}

impl std::fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

impl std::str::FromStr for ModelFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tree" | "dt" | "regression_tree" => Ok(ModelFamily::Tree),
            "forest" | "rf" | "random_forest" => Ok(ModelFamily::Forest),
            "knn" => Ok(ModelFamily::Knn),
            "svr" | "svm" => Ok(ModelFamily::Svr),
            "bayes_ridge" | "brr" | "bayesian_ridge" => Ok(ModelFamily::BayesRidge),
            "linear" | "lr" | "linear_regression" => Ok(ModelFamily::Linear),
            "mlp" | "nn" | "neural_network" => Ok(ModelFamily::Mlp),
            other => Err(Error::InvalidValue {
                field: "model family",
                reason: format!("unknown family {other:?}"),
            }),
        }
    }
}

/// A fitted model of any family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FittedModel {
    Tree(RegressionTree),
    Forest(RandomForest),
    Knn(KnnRegressor),
    Svr(SvrModel),
    BayesRidge(BayesianRidge),
    Linear(LinearModel),
    Mlp(MlpRegressor),
}

impl FittedModel {
    pub fn family(&self) -> ModelFamily {
        match self {
            FittedModel::Tree(_) => ModelFamily::Tree,
            FittedModel::Forest(_) => ModelFamily::Forest,
            FittedModel::Knn(_) => ModelFamily::Knn,
            FittedModel::Svr(_) => ModelFamily::Svr,
            FittedModel::BayesRidge(_) => ModelFamily::BayesRidge,
            FittedModel::Linear(_) => ModelFamily::Linear,
            FittedModel::Mlp(_) => ModelFamily::Mlp,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            FittedModel::Tree(m) => m.n_features(),
            FittedModel::Forest(m) => m.n_features(),
            FittedModel::Knn(m) => m.n_features(),
            FittedModel::Svr(m) => m.n_features(),
            FittedModel::BayesRidge(m) => m.n_features(),
            FittedModel::Linear(m) => m.n_features(),
            FittedModel::Mlp(m) => m.n_features(),
        }
    }

    pub fn predict_one(&self, q: &[f64]) -> Result<f64> {
        match self {
            FittedModel::Tree(m) => m.predict_one(q),
            FittedModel::Forest(m) => m.predict_one(q),
            FittedModel::Knn(m) => m.predict_one(q),
            FittedModel::Svr(m) => m.predict_one(q),
            FittedModel::BayesRidge(m) => m.predict_one(q),
            FittedModel::Linear(m) => m.predict_one(q),
            FittedModel::Mlp(m) => m.predict_one(q),
        }
    }

    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        rows.iter().map(|r| self.predict_one(r)).collect()
    }

    /// Fit-time conditions worth surfacing in reports; never fatal.
    pub fn warnings(&self) -> Vec<String> {
        match self {
            FittedModel::Svr(m) if !m.converged => vec![format!(
                "svr dual solver hit the iteration cap ({} iterations)",
                m.iterations
            )],
            FittedModel::Linear(m) if m.rank_deficient => {
                vec!["rank-deficient design; minimum-norm solution".into()]
            }
            _ => Vec::new(),
        }
    }
}

/// Fits one candidate. `seed` feeds the stochastic families (forest
/// bootstrap, network initialization and batching); the rest ignore it.
pub fn fit_model(params: &ModelParams, x: &[Vec<f64>], y: &[f64], seed: u64) -> Result<FittedModel> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(match params {
        ModelParams::Tree(p) => FittedModel::Tree(RegressionTree::fit(x, y, *p)?),
        ModelParams::Forest(p) => FittedModel::Forest(RandomForest::fit(x, y, *p, seed)?),
        ModelParams::Knn(p) => FittedModel::Knn(KnnRegressor::fit(x, y, *p)?),
        ModelParams::Svr(p) => FittedModel::Svr(SvrModel::fit(x, y, *p)?),
        ModelParams::BayesRidge(p) => FittedModel::BayesRidge(BayesianRidge::fit(x, y, *p)?),
        ModelParams::Linear => FittedModel::Linear(LinearModel::fit(x, y)?),
        ModelParams::Mlp(p) => FittedModel::Mlp(MlpRegressor::fit(x, y, p, seed)?),
    })
}

/// A model handle that may not have been fitted yet; predicting through it
/// before `fit` is the one place the `Unfitted` error can arise in-process.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Predictor {
    pub params: ModelParams,
    pub seed: u64,
    fitted: Option<FittedModel>,
}

impl Predictor {
    pub fn new(params: ModelParams, seed: u64) -> Self {
        Predictor {
            params,
            seed,
            fitted: None,
        }
    }

    pub fn fit(&mut self, x: &[Vec<f64>], y: &[f64]) -> Result<()> {
        self.fitted = Some(fit_model(&self.params, x, y, self.seed)?);
        Ok(())
    }

    pub fn predict_one(&self, q: &[f64]) -> Result<f64> {
        self.fitted
            .as_ref()
            .ok_or(Error::Unfitted)?
            .predict_one(q)
    }

    pub fn model(&self) -> Option<&FittedModel> {
        self.fitted.as_ref()
    }
}

pub const MODEL_FORMAT: &str = "fieldcast-model/1";

/// Versioned on-disk form of a fitted model.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub params: ModelParams,
    pub seed: u64,
    pub model: Option<FittedModel>,
}

impl ModelFile {
    pub fn save(path: &std::path::Path, params: &ModelParams, seed: u64, model: &FittedModel) -> Result<()> {
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            params: params.clone(),
            seed,
            model: Some(model.clone()),
        };
        let body = serde_json::to_string_pretty(&file)?;
        std::fs::write(path, body).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &std::path::Path) -> Result<ModelFile> {
        let body =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let file: ModelFile = serde_json::from_str(&body)?;
        if file.format != MODEL_FORMAT {
            return Err(Error::UnknownModelFormat { found: file.format });
        }
        Ok(file)
    }

    /// The fitted model, or `Unfitted` for a parameters-only file.
    pub fn into_model(self) -> Result<FittedModel> {
        self.model.ok_or(Error::Unfitted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> (Vec<Vec<f64>>, Vec<f64>) {
        let x: Vec<Vec<f64>> = (0..12)
            .map(|i| {
                let v = i as f64;
                vec![v, v * 0.5, 12.0 - v, (v * 0.77).sin(), 1.0 + v * v * 0.01]
            })
            .collect();
        let y: Vec<f64> = (0..12).map(|i| 0.5 + 0.25 * i as f64).collect();
        (x, y)
    }

    #[test]
    fn wrong_dimension_is_rejected_across_families() {
        let (x, y) = xy();
        for family in ModelFamily::ALL {
            let params = standard_grid(family).into_iter().next().unwrap();
            let model = fit_model(&params, &x, &y, 7).unwrap();
            let err = model.predict_one(&[1.0, 2.0, 3.0, 4.0]).unwrap_err();
            assert!(
                matches!(err, Error::WrongDimension { expected: 5, got: 4 }),
                "{family}: {err:?}"
            );
        }
    }

    #[test]
    fn unfitted_predictor_errors() {
        let p = Predictor::new(ModelParams::Linear, 0);
        assert!(matches!(p.predict_one(&[0.0; 5]), Err(Error::Unfitted)));
    }

    #[test]
    fn predictions_are_finite_for_every_family() {
        let (x, y) = xy();
        for family in ModelFamily::ALL {
            let params = standard_grid(family).into_iter().next().unwrap();
            let model = fit_model(&params, &x, &y, 7).unwrap();
            for q in &x {
                assert!(model.predict_one(q).unwrap().is_finite(), "{family}");
            }
        }
    }

    #[test]
    fn model_files_roundtrip() {
        let (x, y) = xy();
        let dir = tempfile::tempdir().unwrap();
        for family in ModelFamily::ALL {
            let params = standard_grid(family).into_iter().next().unwrap();
            let model = fit_model(&params, &x, &y, 7).unwrap();
            let path = dir.path().join(format!("{}.json", family.name()));
            ModelFile::save(&path, &params, 7, &model).unwrap();
            let loaded = ModelFile::load(&path).unwrap().into_model().unwrap();
            // Round-trip preserves predictions exactly.
            for q in &x {
                assert_eq!(
                    model.predict_one(q).unwrap(),
                    loaded.predict_one(q).unwrap(),
                    "{family}"
                );
            }
        }
    }

    #[test]
    fn family_parsing_accepts_codes_and_names() {
        assert_eq!("RF".parse::<ModelFamily>().unwrap(), ModelFamily::Forest);
        assert_eq!("tree".parse::<ModelFamily>().unwrap(), ModelFamily::Tree);
        assert_eq!("BRR".parse::<ModelFamily>().unwrap(), ModelFamily::BayesRidge);
        assert!("boosted".parse::<ModelFamily>().is_err());
    }
}
