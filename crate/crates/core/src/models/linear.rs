//! Ordinary least squares via Householder QR.
//!
//! A rank-deficient design falls back to the minimum-norm solution (through
//! an eigendecomposition of the Gram matrix) and flags the model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{min_norm_least_squares, qr_least_squares, Mat};

const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    coefficients: Vec<f64>,
    intercept: f64,
    pub rank_deficient: bool,
    n_features: usize,
}

impl LinearModel {
    pub fn fit(x: &[Vec<f64>], y: &[f64]) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        debug_assert_eq!(x.len(), y.len());
        let n = x.len();
        let d = x[0].len();
        // Design matrix with a leading intercept column.
        let mut design = Mat::zeros(n, d + 1);
        for (i, row) in x.iter().enumerate() {
            *design.at_mut(i, 0) = 1.0;
            for (j, v) in row.iter().enumerate() {
                *design.at_mut(i, j + 1) = *v;
            }
        }
        let (beta, rank_deficient) = if n >= d + 1 {
            match qr_least_squares(&design, y, RANK_TOL) {
                Some(beta) => (beta, false),
                None => (min_norm_least_squares(&design, y, RANK_TOL), true),
            }
        } else {
            // Underdetermined: minimum-norm directly.
            (min_norm_least_squares(&design, y, RANK_TOL), true)
        };
        Ok(LinearModel {
            intercept: beta[0],
            coefficients: beta[1..].to_vec(),
            rank_deficient,
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
        Ok(self.intercept
            + self
                .coefficients
                .iter()
                .zip(q)
                .map(|(c, v)| c * v)
                .sum::<f64>())
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn column(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&v| vec![v]).collect()
    }

    #[test]
    fn recovers_exact_line() {
        let x = column(&[0.0, 1.0, 2.0, 3.0]);
        let y = [1.0, 3.0, 5.0, 7.0];
        let model = LinearModel::fit(&x, &y).unwrap();
        assert_abs_diff_eq!(model.coefficients()[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(model.intercept(), 1.0, epsilon = 1e-12);
        assert!(!model.rank_deficient);
    }

    #[test]
    fn constant_targets_give_zero_slope() {
        let x = column(&[0.0, 1.0, 2.0]);
        let y = [4.0, 4.0, 4.0];
        let model = LinearModel::fit(&x, &y).unwrap();
        assert_abs_diff_eq!(model.coefficients()[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(model.intercept(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn residuals_are_orthogonal_to_the_design() {
        // Deterministic pseudo-random 20×3 instance.
        let mut state = 3u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let x: Vec<Vec<f64>> = (0..20).map(|_| (0..3).map(|_| next() * 4.0).collect()).collect();
        let y: Vec<f64> = x.iter().map(|r| 1.5 * r[0] - 2.0 * r[1] + 0.3 * r[2] + next()).collect();
        let model = LinearModel::fit(&x, &y).unwrap();
        let resid: Vec<f64> = x
            .iter()
            .zip(&y)
            .map(|(r, t)| t - model.predict_one(r).unwrap())
            .collect();
        let n = x.len() as f64;
        // Intercept column first.
        assert!(resid.iter().sum::<f64>().abs() < 1e-6 * n);
        for j in 0..3 {
            let dot: f64 = x.iter().zip(&resid).map(|(r, e)| r[j] * e).sum();
            assert!(dot.abs() < 1e-6 * n, "column {j}: {dot}");
        }
    }

    #[test]
    fn duplicate_column_flags_rank_deficiency() {
        let x: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, i as f64]).collect();
        let y: Vec<f64> = (0..5).map(|i| 2.0 * i as f64).collect();
        let model = LinearModel::fit(&x, &y).unwrap();
        assert!(model.rank_deficient);
        // Minimum-norm solution still reproduces the targets.
        for (r, t) in x.iter().zip(&y) {
            assert_abs_diff_eq!(model.predict_one(r).unwrap(), *t, epsilon = 1e-8);
        }
    }
}
