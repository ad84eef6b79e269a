//! Hyperparameter grids for every model family.
//!
//! Enumeration order is part of the tie-break contract: candidates are
//! generated with the first parameter as the outermost loop and values in
//! their listed order, and grid search resolves equal scores to the
//! earliest candidate.

use serde::{Deserialize, Serialize};

use super::bayes::BayesRidgeParams;
use super::forest::ForestParams;
use super::knn::{KnnParams, KnnWeights};
use super::mlp::{LearningRateSchedule, MlpParams, MlpSolver};
use super::svr::{GammaSpec, SvrKernel, SvrParams};
use super::tree::TreeParams;
use super::ModelFamily;

/// A fully specified model candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelParams {
    Tree(TreeParams),
    Forest(ForestParams),
    Knn(KnnParams),
    Svr(SvrParams),
    BayesRidge(BayesRidgeParams),
    Linear,
    Mlp(MlpParams),
}

impl ModelParams {
    pub fn family(&self) -> ModelFamily {
        match self {
            ModelParams::Tree(_) => ModelFamily::Tree,
            ModelParams::Forest(_) => ModelFamily::Forest,
            ModelParams::Knn(_) => ModelFamily::Knn,
            ModelParams::Svr(_) => ModelFamily::Svr,
            ModelParams::BayesRidge(_) => ModelFamily::BayesRidge,
            ModelParams::Linear => ModelFamily::Linear,
            ModelParams::Mlp(_) => ModelFamily::Mlp,
        }
    }

    /// Compact `key=value;...` form for report rows.
    pub fn describe(&self) -> String {
        match self {
            ModelParams::Tree(p) => format!("criterion=mae;max_depth={}", p.max_depth),
            ModelParams::Forest(p) => format!(
                "n_estimators={};max_depth={};criterion=mae",
                p.n_estimators, p.max_depth
            ),
            ModelParams::Knn(p) => format!(
                "n_neighbors={};weights={};leaf_size={}",
                p.n_neighbors,
                match p.weights {
                    KnnWeights::Uniform => "uniform",
                    KnnWeights::Distance => "distance",
                },
                p.leaf_size
            ),
            ModelParams::Svr(p) => format!(
                "kernel={};C={};gamma={};degree={}",
                match p.kernel {
                    SvrKernel::Linear => "linear",
                    SvrKernel::Poly => "poly",
                    SvrKernel::Rbf => "rbf",
                    SvrKernel::Sigmoid => "sigmoid",
                },
                p.c,
                match p.gamma {
                    GammaSpec::Scale => "scale",
                    GammaSpec::Auto => "auto",
                },
                p.degree
            ),
            ModelParams::BayesRidge(p) => format!(
                "n_iter={};alpha_1={:e};lambda_1={:e}",
                p.n_iter, p.alpha_1, p.lambda_1
            ),
            ModelParams::Linear => "none".into(),
            ModelParams::Mlp(p) => format!(
                "hidden_layer_sizes={};solver={};learning_rate={};learning_rate_init={}",
                p.hidden_layer_sizes
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join("x"),
                match p.solver {
                    MlpSolver::Sgd => "sgd",
                    MlpSolver::Adam => "adam",
                },
                match p.learning_rate {
                    LearningRateSchedule::Constant => "constant",
                    LearningRateSchedule::InvScaling => "invscaling",
                    LearningRateSchedule::Adaptive => "adaptive",
                },
                p.learning_rate_init
            ),
        }
    }
}

/// The full tuning grid for a family. Linear regression has no
/// hyperparameters and yields its single trivial candidate.
pub fn standard_grid(family: ModelFamily) -> Vec<ModelParams> {
    match family {
        ModelFamily::Tree => [5usize, 10, 25, 50, 100]
            .iter()
            .map(|&max_depth| ModelParams::Tree(TreeParams { max_depth }))
            .collect(),
        ModelFamily::Forest => {
            let mut out = Vec::new();
            for &n_estimators in &[5usize, 10, 25, 50, 100] {
                for &max_depth in &[5usize, 10, 15, 20] {
                    out.push(ModelParams::Forest(ForestParams {
                        n_estimators,
                        max_depth,
                        bootstrap: true,
                    }));
                }
            }
            out
        }
        ModelFamily::Knn => {
            let mut out = Vec::new();
            for &n_neighbors in &[2usize, 5, 10] {
                for &weights in &[KnnWeights::Uniform, KnnWeights::Distance] {
                    for &leaf_size in &[5usize, 10, 30, 50] {
                        out.push(ModelParams::Knn(KnnParams {
                            n_neighbors,
                            weights,
                            leaf_size,
                        }));
                    }
                }
            }
            out
        }
        ModelFamily::Svr => {
            let mut out = Vec::new();
            for &kernel in &[
                SvrKernel::Linear,
                SvrKernel::Poly,
                SvrKernel::Rbf,
                SvrKernel::Sigmoid,
            ] {
                for &c in &[0.1, 1.0, 5.0, 10.0] {
                    for &gamma in &[GammaSpec::Scale, GammaSpec::Auto] {
                        for &degree in &[2u32, 3, 4, 5] {
                            out.push(ModelParams::Svr(SvrParams::new(kernel, c, gamma, degree)));
                        }
                    }
                }
            }
            out
        }
        ModelFamily::BayesRidge => {
            let mut out = Vec::new();
            for &n_iter in &[100usize, 300, 500] {
                for &alpha_1 in &[1e-6, 1e-4, 1e-2, 1.0, 10.0] {
                    for &lambda_1 in &[1e-6, 1e-4, 1e-2, 1.0, 10.0] {
                        out.push(ModelParams::BayesRidge(BayesRidgeParams {
                            n_iter,
                            alpha_1,
                            lambda_1,
                            ..BayesRidgeParams::default()
                        }));
                    }
                }
            }
            out
        }
        ModelFamily::Linear => vec![ModelParams::Linear],
        ModelFamily::Mlp => {
            let sizes: [&[usize]; 6] = [&[3], &[5], &[10], &[3, 3], &[5, 5], &[10, 10]];
            let mut out = Vec::new();
            for hidden in sizes {
                for &solver in &[MlpSolver::Sgd, MlpSolver::Adam] {
                    for &learning_rate in &[
                        LearningRateSchedule::Constant,
                        LearningRateSchedule::InvScaling,
                        LearningRateSchedule::Adaptive,
                    ] {
                        for &learning_rate_init in &[0.1, 0.01, 0.001] {
                            out.push(ModelParams::Mlp(MlpParams::new(
                                hidden.to_vec(),
                                solver,
                                learning_rate,
                                learning_rate_init,
                            )));
                        }
                    }
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        assert_eq!(standard_grid(ModelFamily::Tree).len(), 5);
        assert_eq!(standard_grid(ModelFamily::Forest).len(), 20);
        assert_eq!(standard_grid(ModelFamily::Knn).len(), 24);
        assert_eq!(standard_grid(ModelFamily::Svr).len(), 128);
        assert_eq!(standard_grid(ModelFamily::BayesRidge).len(), 75);
        assert_eq!(standard_grid(ModelFamily::Linear).len(), 1);
        assert_eq!(standard_grid(ModelFamily::Mlp).len(), 108);
    }

    #[test]
    fn tree_grid_enumerates_depths_in_listed_order() {
        let grid = standard_grid(ModelFamily::Tree);
        let depths: Vec<usize> = grid
            .iter()
            .map(|p| match p {
                ModelParams::Tree(t) => t.max_depth,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(depths, vec![5, 10, 25, 50, 100]);
    }

    #[test]
    fn first_parameter_is_the_outermost_loop() {
        let grid = standard_grid(ModelFamily::Forest);
        match (&grid[0], &grid[1], &grid[4]) {
            (ModelParams::Forest(a), ModelParams::Forest(b), ModelParams::Forest(c)) => {
                assert_eq!((a.n_estimators, a.max_depth), (5, 5));
                assert_eq!((b.n_estimators, b.max_depth), (5, 10));
                assert_eq!((c.n_estimators, c.max_depth), (10, 5));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn describe_is_compact_and_stable() {
        let grid = standard_grid(ModelFamily::Svr);
        assert_eq!(grid[0].describe(), "kernel=linear;C=0.1;gamma=scale;degree=2");
        assert_eq!(ModelParams::Linear.describe(), "none");
    }
}
