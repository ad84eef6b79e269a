//! Random forest: bootstrap-aggregated MAE regression trees.
//!
//! Each tree trains on a seeded bootstrap resample of size n (with
//! replacement); every feature is considered at every split. The forest
//! prediction is the arithmetic mean of its trees' predictions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::tree::{RegressionTree, TreeParams};
use crate::seeding::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub max_depth: usize,
    /// Testing hook: `false` trains every tree on the full sample, making a
    /// one-tree forest identical to a plain tree fit.
    pub bootstrap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<RegressionTree>,
    n_features: usize,
}

impl RandomForest {
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: ForestParams, seed: u64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        if params.n_estimators == 0 {
            return Err(Error::InvalidValue {
                field: "n_estimators",
                reason: "must be at least 1".into(),
            });
        }
        let n = x.len();
        let tree_params = TreeParams {
            max_depth: params.max_depth,
        };
        let mut trees = Vec::with_capacity(params.n_estimators);
        for t in 0..params.n_estimators {
            if params.bootstrap {
                let mut rng = seeding::rng(seeding::derive(seed, Stream::Bootstrap, t as u64));
                let mut xb = Vec::with_capacity(n);
                let mut yb = Vec::with_capacity(n);
                for _ in 0..n {
                    let i = rng.random_range(0..n);
                    xb.push(x[i].clone());
                    yb.push(y[i]);
                }
                trees.push(RegressionTree::fit(&xb, &yb, tree_params)?);
            } else {
                trees.push(RegressionTree::fit(x, y, tree_params)?);
            }
        }
        Ok(RandomForest {
            trees,
            n_features: x[0].len(),
        })
    }

    pub fn predict_one(&self, q: &[f64]) -> Result<f64> {
        if q.len() != self.n_features {
            return Err(Error::WrongDimension {
                expected: self.n_features,
                got: q.len(),
            });
        }
        let mut sum = 0.0;
        for tree in &self.trees {
            sum += tree.predict_one(q)?;
        }
        Ok(sum / self.trees.len() as f64)
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }
}
