//! Small dense linear-algebra routines for the linear model family.
//!
//! Design matrices here are tiny (six columns), so everything is plain
//! row-major `Vec<f64>` with no acceleration.

/// Row-major dense matrix.
#[derive(Debug, Clone)]
pub(crate) struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[cfg(test)]
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            debug_assert_eq!(row.len(), c);
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }

    /// AᵀA (cols × cols), symmetric.
    pub fn gram(&self) -> Mat {
        let mut g = Mat::zeros(self.cols, self.cols);
        for j in 0..self.cols {
            for k in j..self.cols {
                let mut s = 0.0;
                for i in 0..self.rows {
                    s += self.at(i, j) * self.at(i, k);
                }
                *g.at_mut(j, k) = s;
                *g.at_mut(k, j) = s;
            }
        }
        g
    }

    /// Aᵀv for a column vector v of length `rows`.
    pub fn t_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let vi = v[i];
            for j in 0..self.cols {
                out[j] += self.at(i, j) * vi;
            }
        }
        out
    }

    /// A·w for a coefficient vector w of length `cols`.
    pub fn mul_vec(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut s = 0.0;
            for j in 0..self.cols {
                s += self.at(i, j) * w[j];
            }
            out[i] = s;
        }
        out
    }
}

/// Least squares via Householder QR. Returns `None` when R is numerically
/// rank-deficient (relative pivot below `rank_tol`).
pub(crate) fn qr_least_squares(a: &Mat, y: &[f64], rank_tol: f64) -> Option<Vec<f64>> {
    assert_eq!(a.rows, y.len());
    assert!(a.rows >= a.cols);
    let (m, n) = (a.rows, a.cols);
    let mut r = a.clone();
    let mut qty = y.to_vec();

    for k in 0..n {
        // Householder vector for column k below the diagonal.
        let mut norm = 0.0;
        for i in k..m {
            norm += r.at(i, k) * r.at(i, k);
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if r.at(k, k) >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; m - k];
        v[0] = r.at(k, k) - alpha;
        for i in k + 1..m {
            v[i - k] = r.at(i, k);
        }
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv == 0.0 {
            continue;
        }
        // Apply H = I - 2vvᵀ/vᵀv to the trailing columns and to y.
        for j in k..n {
            let mut dot = 0.0;
            for i in k..m {
                dot += v[i - k] * r.at(i, j);
            }
            let scale = 2.0 * dot / vtv;
            for i in k..m {
                *r.at_mut(i, j) -= scale * v[i - k];
            }
        }
        let mut dot = 0.0;
        for i in k..m {
            dot += v[i - k] * qty[i];
        }
        let scale = 2.0 * dot / vtv;
        for i in k..m {
            qty[i] -= scale * v[i - k];
        }
    }

    let max_diag = (0..n).map(|i| r.at(i, i).abs()).fold(0.0_f64, f64::max);
    if max_diag == 0.0 {
        return None;
    }
    for i in 0..n {
        if r.at(i, i).abs() < rank_tol * max_diag {
            return None;
        }
    }

    // Back-substitution on the upper-triangular system.
    let mut beta = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = qty[i];
        for j in i + 1..n {
            s -= r.at(i, j) * beta[j];
        }
        beta[i] = s / r.at(i, i);
    }
    Some(beta)
}

/// Minimum-norm least squares via eigendecomposition of AᵀA; used as the
/// rank-deficient fallback. Eigenvalues below `tol · λ_max` are treated
/// as null directions.
pub(crate) fn min_norm_least_squares(a: &Mat, y: &[f64], tol: f64) -> Vec<f64> {
    let g = a.gram();
    let aty = a.t_mul_vec(y);
    let (vals, vecs) = jacobi_eigh(&g);
    let lmax = vals.iter().cloned().fold(0.0_f64, f64::max);
    let n = g.cols;
    let mut beta = vec![0.0; n];
    for e in 0..n {
        if vals[e] <= tol * lmax {
            continue;
        }
        let mut proj = 0.0;
        for i in 0..n {
            proj += vecs.at(i, e) * aty[i];
        }
        let coef = proj / vals[e];
        for i in 0..n {
            beta[i] += coef * vecs.at(i, e);
        }
    }
    beta
}

/// Cyclic Jacobi eigendecomposition of a small symmetric matrix.
/// Returns (eigenvalues, eigenvector columns).
pub(crate) fn jacobi_eigh(m: &Mat) -> (Vec<f64>, Mat) {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let mut a = m.clone();
    let mut v = Mat::zeros(n, n);
    for i in 0..n {
        *v.at_mut(i, i) = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a.at(i, j) * a.at(i, j);
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.at(p, q);
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.at(k, p);
                    let akq = a.at(k, q);
                    *a.at_mut(k, p) = c * akp - s * akq;
                    *a.at_mut(k, q) = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a.at(p, k);
                    let aqk = a.at(q, k);
                    *a.at_mut(p, k) = c * apk - s * aqk;
                    *a.at_mut(q, k) = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v.at(k, p);
                    let vkq = v.at(k, q);
                    *v.at_mut(k, p) = c * vkp - s * vkq;
                    *v.at_mut(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| a.at(i, i)).collect();
    (vals, v)
}

/// Cholesky factor L (lower) of a symmetric positive-definite matrix.
pub(crate) fn cholesky(m: &Mat) -> Option<Mat> {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = m.at(i, j);
            for k in 0..j {
                s -= l.at(i, k) * l.at(j, k);
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                *l.at_mut(i, j) = s.sqrt();
            } else {
                *l.at_mut(i, j) = s / l.at(j, j);
            }
        }
    }
    Some(l)
}

/// Solves L Lᵀ x = b given the Cholesky factor L.
pub(crate) fn cholesky_solve(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l.at(i, k) * y[k];
        }
        y[i] = s / l.at(i, i);
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l.at(k, i) * x[k];
        }
        x[i] = s / l.at(i, i);
    }
    x
}

/// Inverse of a symmetric positive-definite matrix from its Cholesky factor.
pub(crate) fn cholesky_inverse(l: &Mat) -> Mat {
    let n = l.rows;
    let mut inv = Mat::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = cholesky_solve(l, &e);
        for i in 0..n {
            *inv.at_mut(i, j) = col[i];
        }
    }
    inv
}
