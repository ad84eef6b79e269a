//! Bayesian ridge regression by iterative evidence maximization.
//!
//! Gaussian likelihood with noise precision α, isotropic Gaussian weight
//! prior with precision λ, and Gamma hyperpriors on both. Features and
//! targets are centered so the intercept drops out of the update loop.
//!
//! Updates are the EM form:
//!
//! ```text
//! α ← (n + 2·alpha_1) / (E‖y − Xw‖² + 2·alpha_2)
//! λ ← (d + 2·lambda_1) / (E‖w‖²     + 2·lambda_2)
//! ```
//!
//! with expectations under the current weight posterior N(m, S). Each pass
//! cannot decrease the tracked objective — the log marginal likelihood plus
//! the hyperprior terms `a·ln p − b·p` (a shape convention chosen so that
//! zero-valued hyperpriors recover plain evidence maximization exactly).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_inverse, cholesky_solve, Mat};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BayesRidgeParams {
    pub n_iter: usize,
    pub alpha_1: f64,
    pub alpha_2: f64,
    pub lambda_1: f64,
    pub lambda_2: f64,
    /// Testing hook: pin λ to a fixed value instead of updating it.
    pub fixed_lambda: Option<f64>,
}

impl Default for BayesRidgeParams {
    fn default() -> Self {
        BayesRidgeParams {
            n_iter: 300,
            alpha_1: 1e-6,
            alpha_2: 1e-6,
            lambda_1: 1e-6,
            lambda_2: 1e-6,
            fixed_lambda: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesianRidge {
    weights: Vec<f64>,
    intercept: f64,
    pub alpha: f64,
    pub lambda: f64,
    /// Tracked objective value per iteration, non-decreasing.
    pub evidence_path: Vec<f64>,
    n_features: usize,
}

struct Centered {
    x: Mat,
    y: Vec<f64>,
    x_means: Vec<f64>,
    y_mean: f64,
}

fn center(x: &[Vec<f64>], y: &[f64]) -> Centered {
    let n = x.len();
    let d = x[0].len();
    let mut x_means = vec![0.0; d];
    for row in x {
        for (m, v) in x_means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut x_means {
        *m /= n as f64;
    }
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let mut xc = Mat::zeros(n, d);
    for (i, row) in x.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            *xc.at_mut(i, j) = v - x_means[j];
        }
    }
    Centered {
        x: xc,
        y: y.iter().map(|v| v - y_mean).collect(),
        x_means,
        y_mean,
    }
}

impl BayesianRidge {
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: BayesRidgeParams) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let n = x.len();
        let d = x[0].len();
        let data = center(x, y);

        if params.n_iter == 0 {
            // Prior-initialized model: zero weights, intercept-only prediction.
            return Ok(BayesianRidge {
                weights: vec![0.0; d],
                intercept: data.y_mean,
                alpha: 1.0,
                lambda: params.fixed_lambda.unwrap_or(1.0),
                evidence_path: Vec::new(),
                n_features: d,
            });
        }

        let gram = data.x.gram();
        let xty = data.x.t_mul_vec(&data.y);
        let y_var = data.y.iter().map(|v| v * v).sum::<f64>() / n as f64;
        let mut alpha = if y_var > 0.0 { 1.0 / y_var } else { 1.0 };
        let mut lambda = params.fixed_lambda.unwrap_or(1.0);

        let mut mean = vec![0.0; d];
        let mut evidence_path = Vec::with_capacity(params.n_iter);
        for _ in 0..params.n_iter {
            // Posterior N(m, S) with precision A = α·XᵀX + λ·I.
            let mut a = gram.clone();
            for j in 0..d {
                for k in 0..d {
                    *a.at_mut(j, k) *= alpha;
                }
                *a.at_mut(j, j) += lambda;
            }
            let l = cholesky(&a).ok_or(Error::SingularDesign)?;
            let rhs: Vec<f64> = xty.iter().map(|v| alpha * v).collect();
            mean = cholesky_solve(&l, &rhs);
            let cov = cholesky_inverse(&l);

            let resid = {
                let fitted = data.x.mul_vec(&mean);
                data.y
                    .iter()
                    .zip(&fitted)
                    .map(|(yv, fv)| (yv - fv) * (yv - fv))
                    .sum::<f64>()
            };
            let mut tr_gram_cov = 0.0;
            let mut tr_cov = 0.0;
            for j in 0..d {
                tr_cov += cov.at(j, j);
                for k in 0..d {
                    tr_gram_cov += gram.at(j, k) * cov.at(k, j);
                }
            }
            let w_norm2: f64 = mean.iter().map(|v| v * v).sum();

            // log|A| from the Cholesky factor.
            let log_det_a: f64 = (0..d).map(|j| 2.0 * l.at(j, j).ln()).sum();
            let log_marginal = 0.5
                * (d as f64 * lambda.ln() + n as f64 * alpha.ln()
                    - alpha * resid
                    - lambda * w_norm2
                    - log_det_a
                    - n as f64 * (2.0 * std::f64::consts::PI).ln());
            let objective = log_marginal
                + params.alpha_1 * alpha.ln()
                - params.alpha_2 * alpha
                + params.lambda_1 * lambda.ln()
                - params.lambda_2 * lambda;
            evidence_path.push(objective);

            let e_resid = resid + tr_gram_cov;
            let e_w2 = w_norm2 + tr_cov;
            let new_alpha = (n as f64 + 2.0 * params.alpha_1) / (e_resid + 2.0 * params.alpha_2);
            let new_lambda = match params.fixed_lambda {
                Some(v) => v,
                None => (d as f64 + 2.0 * params.lambda_1) / (e_w2 + 2.0 * params.lambda_2),
            };
            let converged =
                (new_alpha - alpha).abs() < 1e-6 && (new_lambda - lambda).abs() < 1e-6;
            alpha = new_alpha;
            lambda = new_lambda;
            if converged {
                break;
            }
        }

        // Final posterior under the last (α, λ).
        let mut a = gram.clone();
        for j in 0..d {
            for k in 0..d {
                *a.at_mut(j, k) *= alpha;
            }
            *a.at_mut(j, j) += lambda;
        }
        let l = cholesky(&a).ok_or(Error::SingularDesign)?;
        let rhs: Vec<f64> = xty.iter().map(|v| alpha * v).collect();
        mean = cholesky_solve(&l, &rhs);

        let intercept = data.y_mean
            - mean
                .iter()
                .zip(&data.x_means)
                .map(|(w, m)| w * m)
                .sum::<f64>();
        Ok(BayesianRidge {
            weights: mean,
            intercept,
            alpha,
            lambda,
            evidence_path,
            n_features: d,
        })
    }

    pub fn predict_one(&self, q: &[f64]) -> Result<f64> {
        if q.len() != self.n_features {
            return Err(Error::WrongDimension {
                expected: self.n_features,
                got: q.len(),
            });
        }
        Ok(self.intercept + dot(&self.weights, q))
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
