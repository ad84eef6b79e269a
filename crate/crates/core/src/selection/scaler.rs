//! Per-feature z-score scaling: `x_new = (x_old − x_mean) / x_sd`.
//!
//! Statistics come from training rows only (population standard deviation);
//! a constant feature maps to zero rather than dividing by zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    means: Vec<f64>,
    sds: Vec<f64>,
}

impl Scaler {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Scaler> {
        if rows.len() < 2 {
            return Err(Error::TooFewRows { n: rows.len() });
        }
        let n = rows.len() as f64;
        let d = rows[0].len();
        let mut means = vec![0.0; d];
        for row in rows {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut sds = vec![0.0; d];
        for row in rows {
            for ((s, v), m) in sds.iter_mut().zip(row).zip(&means) {
                let dev = v - m;
                *s += dev * dev;
            }
        }
        for s in &mut sds {
            *s = (*s / n).sqrt();
        }
        Ok(Scaler { means, sds })
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        debug_assert_eq!(row.len(), self.means.len());
        row.iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(v, (m, s))| if *s == 0.0 { 0.0 } else { (v - m) / s })
            .collect()
    }

    pub fn apply(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply_row(r)).collect()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn sds(&self) -> &[f64] {
        &self.sds
    }
}
