//! Epsilon-insensitive support vector regression.
//!
//! The dual problem is solved with maximal-violating-pair SMO over the 2n
//! variables (α, α*):
//!
//! ```text
//! min ½(α−α*)ᵀK(α−α*) + ε·Σ(αᵢ+α*ᵢ) − Σ yᵢ(αᵢ−α*ᵢ)
//! s.t. Σ(αᵢ−α*ᵢ) = 0,  0 ≤ αᵢ, α*ᵢ ≤ C
//! ```
//!
//! Iterations stop when the maximal KKT violation drops below `tol`.
//! Hitting the iteration cap is not an error: the best iterate is returned
//! with `converged = false` and surfaces as a run warning.
//!
//! Targets are standardized during fitting by default so the fixed epsilon
//! tube (0.1) is scale-meaningful; predictions are un-standardized.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SvrKernel {
    Linear,
    Poly,
    Rbf,
    Sigmoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaSpec {
    /// `1 / (d · var(X))` with the variance taken over every entry of the
    /// training feature matrix.
    Scale,
    /// `1 / d`.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    pub kernel: SvrKernel,
    pub c: f64,
    pub gamma: GammaSpec,
    /// Only the polynomial kernel reads this.
    pub degree: u32,
    pub epsilon: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Testing hook: disable target standardization so the epsilon tube
    /// applies to raw targets.
    pub standardize_targets: bool,
}

impl SvrParams {
    pub fn new(kernel: SvrKernel, c: f64, gamma: GammaSpec, degree: u32) -> Self {
        SvrParams {
            kernel,
            c,
            gamma,
            degree,
            epsilon: 0.1,
            tol: 1e-3,
            max_iter: 100_000,
            standardize_targets: true,
        }
    }
}

fn kernel_eval(kernel: SvrKernel, gamma: f64, degree: u32, a: &[f64], b: &[f64]) -> f64 {
    match kernel {
        SvrKernel::Linear => dot(a, b),
        SvrKernel::Poly => (gamma * dot(a, b)).powi(degree as i32),
        SvrKernel::Rbf => {
            let mut s = 0.0;
            for (x, y) in a.iter().zip(b) {
                let d = x - y;
                s += d * d;
            }
            (-gamma * s).exp()
        }
        SvrKernel::Sigmoid => (gamma * dot(a, b)).tanh(),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Resolves a gamma declaration against the training matrix.
pub fn resolve_gamma(spec: GammaSpec, x: &[Vec<f64>]) -> f64 {
    let d = x[0].len() as f64;
    match spec {
        GammaSpec::Auto => 1.0 / d,
        GammaSpec::Scale => {
            let count = (x.len() * x[0].len()) as f64;
            let mean: f64 = x.iter().flat_map(|r| r.iter()).sum::<f64>() / count;
            let var: f64 = x
                .iter()
                .flat_map(|r| r.iter())
                .map(|v| (v - mean) * (v - mean))
                .sum::<f64>()
                / count;
            if var > 0.0 {
                1.0 / (d * var)
            } else {
                1.0
            }
        }
    }
}

/// Outcome of the dual optimization, exposed for oracle comparisons.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub alpha_star: Vec<f64>,
    pub bias: f64,
    /// Value of the minimized dual objective at the final iterate.
    pub objective: f64,
    /// Final maximal violating-pair gap (m − M).
    pub kkt_gap: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl DualSolution {
    /// β = α − α*, the kernel expansion coefficients.
    pub fn beta(&self) -> Vec<f64> {
        self.alpha
            .iter()
            .zip(&self.alpha_star)
            .map(|(a, s)| a - s)
            .collect()
    }
}

/// Solves the ε-SVR dual for a precomputed kernel matrix.
pub fn solve_dual(
    k: &[Vec<f64>],
    y: &[f64],
    c: f64,
    epsilon: f64,
    tol: f64,
    max_iter: usize,
) -> DualSolution {
    let n = y.len();
    let two_n = 2 * n;
    // z = (α, α*); u = +1 on the α block, −1 on the α* block.
    let mut z = vec![0.0_f64; two_n];
    let mut g: Vec<f64> = (0..two_n)
        .map(|t| {
            if t < n {
                epsilon - y[t]
            } else {
                epsilon + y[t - n]
            }
        })
        .collect();
    let u = |t: usize| if t < n { 1.0 } else { -1.0 };
    let base = |t: usize| if t < n { t } else { t - n };

    let mut iterations = 0;
    let mut converged = false;
    let mut final_gap = f64::INFINITY;
    while iterations < max_iter {
        // Maximal violating pair over −u_t·g_t.
        let mut m_val = f64::NEG_INFINITY;
        let mut m_idx = usize::MAX;
        let mut w_val = f64::INFINITY;
        let mut w_idx = usize::MAX;
        for t in 0..two_n {
            let score = -u(t) * g[t];
            let up = if t < n { z[t] < c } else { z[t] > 0.0 };
            let low = if t < n { z[t] > 0.0 } else { z[t] < c };
            if up && score > m_val {
                m_val = score;
                m_idx = t;
            }
            if low && score < w_val {
                w_val = score;
                w_idx = t;
            }
        }
        final_gap = m_val - w_val;
        if final_gap <= tol {
            converged = true;
            break;
        }
        let (i, j) = (m_idx, w_idx);
        let (bi, bj) = (base(i), base(j));
        let eta = (k[bi][bi] + k[bj][bj] - 2.0 * k[bi][bj]).max(1e-12);
        let mut step = final_gap / eta;
        // Box caps along the feasible direction.
        let cap_i = if i < n { c - z[i] } else { z[i] };
        let cap_j = if j < n { z[j] } else { c - z[j] };
        step = step.min(cap_i).min(cap_j);
        if step <= 0.0 {
            break;
        }
        z[i] = (z[i] + u(i) * step).clamp(0.0, c);
        z[j] = (z[j] - u(j) * step).clamp(0.0, c);
        for (t, gt) in g.iter_mut().enumerate() {
            *gt += u(t) * (k[base(t)][bi] - k[base(t)][bj]) * step;
        }
        iterations += 1;
    }

    let alpha = z[..n].to_vec();
    let alpha_star = z[n..].to_vec();
    let beta: Vec<f64> = alpha.iter().zip(&alpha_star).map(|(a, s)| a - s).collect();

    // Bias from the final violating-pair interval: free variables satisfy
    // −u_t·g_t = b exactly, bounded ones bracket it.
    let mut m_val = f64::NEG_INFINITY;
    let mut w_val = f64::INFINITY;
    for t in 0..two_n {
        let score = -u(t) * g[t];
        let up = if t < n { z[t] < c } else { z[t] > 0.0 };
        let low = if t < n { z[t] > 0.0 } else { z[t] < c };
        if up && score > m_val {
            m_val = score;
        }
        if low && score < w_val {
            w_val = score;
        }
    }
    let bias = (m_val + w_val) / 2.0;

    let mut quad = 0.0;
    for (i, bi_val) in beta.iter().enumerate() {
        let mut row = 0.0;
        for (j, bj_val) in beta.iter().enumerate() {
            row += k[i][j] * bj_val;
        }
        quad += bi_val * row;
    }
    let linear: f64 = (0..n)
        .map(|i| epsilon * (alpha[i] + alpha_star[i]) - y[i] * beta[i])
        .sum();
    DualSolution {
        alpha,
        alpha_star,
        bias,
        objective: 0.5 * quad + linear,
        kkt_gap: final_gap,
        converged,
        iterations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    support_x: Vec<Vec<f64>>,
    support_beta: Vec<f64>,
    bias: f64,
    kernel: SvrKernel,
    gamma: f64,
    degree: u32,
    y_mean: f64,
    y_scale: f64,
    pub converged: bool,
    pub iterations: usize,
    n_features: usize,
}

impl SvrModel {
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: SvrParams) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        if params.c <= 0.0 {
            return Err(Error::InvalidValue {
                field: "C",
                reason: format!("must be positive, got {}", params.c),
            });
        }
        if params.epsilon < 0.0 {
            return Err(Error::InvalidValue {
                field: "epsilon",
                reason: format!("must be non-negative, got {}", params.epsilon),
            });
        }
        let n = x.len();
        let gamma = resolve_gamma(params.gamma, x);
        let (y_mean, y_scale) = if params.standardize_targets {
            let mean = y.iter().sum::<f64>() / n as f64;
            let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            let sd = var.sqrt();
            (mean, if sd > 0.0 { sd } else { 1.0 })
        } else {
            (0.0, 1.0)
        };
        let ty: Vec<f64> = y.iter().map(|v| (v - y_mean) / y_scale).collect();

        let mut k = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let v = kernel_eval(params.kernel, gamma, params.degree, &x[i], &x[j]);
                k[i][j] = v;
                k[j][i] = v;
            }
        }
        let solution = solve_dual(&k, &ty, params.c, params.epsilon, params.tol, params.max_iter);
        let beta = solution.beta();
        let mut support_x = Vec::new();
        let mut support_beta = Vec::new();
        for (i, b) in beta.iter().enumerate() {
            if *b != 0.0 {
                support_x.push(x[i].clone());
                support_beta.push(*b);
            }
        }
        Ok(SvrModel {
            support_x,
            support_beta,
            bias: solution.bias,
            kernel: params.kernel,
            gamma,
            degree: params.degree,
            y_mean,
            y_scale,
            converged: solution.converged,
            iterations: solution.iterations,
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
        let mut f = self.bias;
        for (sv, b) in self.support_x.iter().zip(&self.support_beta) {
            f += b * kernel_eval(self.kernel, self.gamma, self.degree, sv, q);
        }
        Ok(f * self.y_scale + self.y_mean)
    }

    pub fn n_support(&self) -> usize {
        self.support_x.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }
}
