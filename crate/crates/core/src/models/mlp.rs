//! Fully connected feed-forward regressor.
//!
//! Rectified-linear hidden layers, identity output, squared-error loss
//! `Σ(ŷ−y)²/(2m)` per minibatch. Trained by seeded minibatch SGD with
//! momentum 0.9 or Adam (β₁ 0.9, β₂ 0.999, ε 1e-8), at most 500 epochs on
//! minibatches of `min(200, n)`.
//!
//! Learning-rate schedules apply to SGD: `constant`; `invscaling` with
//! rate = init/√t per optimizer step; `adaptive`, which divides the rate by
//! 5 after two consecutive epochs without a 1e-4 loss improvement and stops
//! once the rate falls below 1e-6. Adam always runs at the initial rate.
//! Non-adaptive runs stop early after ten stagnant epochs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::{self, Stream};

const MOMENTUM: f64 = 0.9;
const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
const LOSS_TOL: f64 = 1e-4;
const ADAPTIVE_DIVISOR: f64 = 5.0;
const MIN_ADAPTIVE_RATE: f64 = 1e-6;
const STAGNANT_EPOCH_LIMIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MlpSolver {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearningRateSchedule {
    Constant,
    InvScaling,
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden_layer_sizes: Vec<usize>,
    pub solver: MlpSolver,
    pub learning_rate: LearningRateSchedule,
    pub learning_rate_init: f64,
    pub max_epochs: usize,
}

impl MlpParams {
    pub fn new(
        hidden_layer_sizes: Vec<usize>,
        solver: MlpSolver,
        learning_rate: LearningRateSchedule,
        learning_rate_init: f64,
    ) -> Self {
        MlpParams {
            hidden_layer_sizes,
            solver,
            learning_rate,
            learning_rate_init,
            max_epochs: 500,
        }
    }
}

/// One dense layer: `w` is row-major `n_out × n_in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub n_in: usize,
    pub n_out: usize,
}

impl Layer {
    fn zeros(n_in: usize, n_out: usize) -> Self {
        Layer {
            w: vec![0.0; n_in * n_out],
            b: vec![0.0; n_out],
            n_in,
            n_out,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpRegressor {
    pub layers: Vec<Layer>,
    n_features: usize,
    pub epochs_run: usize,
    pub final_loss: f64,
}

impl MlpRegressor {
    /// Glorot-initialized network: symmetric uniform with bound
    /// √(6/(fan_in + fan_out)), weights row-major then biases, per layer.
    fn initialized(n_features: usize, hidden: &[usize], seed: u64) -> Self {
        let mut rng = seeding::rng(seeding::derive(seed, Stream::WeightInit, 0));
        let mut sizes = vec![n_features];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let layers = sizes
            .windows(2)
            .map(|pair| {
                let (n_in, n_out) = (pair[0], pair[1]);
                let bound = (6.0 / (n_in + n_out) as f64).sqrt();
                let mut layer = Layer::zeros(n_in, n_out);
                for w in &mut layer.w {
                    *w = rng.random_range(-bound..bound);
                }
                for b in &mut layer.b {
                    *b = rng.random_range(-bound..bound);
                }
                layer
            })
            .collect();
        MlpRegressor {
            layers,
            n_features,
            epochs_run: 0,
            final_loss: f64::NAN,
        }
    }

    /// Testing hook: all-zero weights and biases.
    pub fn zeroed(n_features: usize, hidden: &[usize]) -> Self {
        let mut model = MlpRegressor::initialized(n_features, hidden, 0);
        for layer in &mut model.layers {
            layer.w.fill(0.0);
            layer.b.fill(0.0);
        }
        model
    }

    fn forward(&self, q: &[f64]) -> Vec<Vec<f64>> {
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(q.to_vec());
        for (li, layer) in self.layers.iter().enumerate() {
            let input = &activations[li];
            let mut out = vec![0.0; layer.n_out];
            for o in 0..layer.n_out {
                let mut s = layer.b[o];
                let row = &layer.w[o * layer.n_in..(o + 1) * layer.n_in];
                for (w, v) in row.iter().zip(input) {
                    s += w * v;
                }
                if li + 1 < self.layers.len() {
                    s = s.max(0.0);
                }
                out[o] = s;
            }
            activations.push(out);
        }
        activations
    }

    /// Batch loss `Σ(ŷ−y)²/(2m)` and its gradient for every parameter.
    pub fn loss_and_gradient(&self, x: &[Vec<f64>], y: &[f64]) -> (f64, Vec<Layer>) {
        let m = x.len() as f64;
        let mut grads: Vec<Layer> = self
            .layers
            .iter()
            .map(|l| Layer::zeros(l.n_in, l.n_out))
            .collect();
        let mut loss = 0.0;
        for (row, &target) in x.iter().zip(y) {
            let activations = self.forward(row);
            let out = activations.last().unwrap()[0];
            let err = out - target;
            loss += err * err / (2.0 * m);
            // Output delta for squared error over the batch mean.
            let mut delta = vec![err / m];
            for li in (0..self.layers.len()).rev() {
                let layer = &self.layers[li];
                let input = &activations[li];
                let grad = &mut grads[li];
                for o in 0..layer.n_out {
                    grad.b[o] += delta[o];
                    let row = &mut grad.w[o * layer.n_in..(o + 1) * layer.n_in];
                    for (g, v) in row.iter_mut().zip(input) {
                        *g += delta[o] * v;
                    }
                }
                if li == 0 {
                    break;
                }
                // Propagate through the ReLU of the previous layer.
                let mut prev_delta = vec![0.0; layer.n_in];
                for o in 0..layer.n_out {
                    let row = &layer.w[o * layer.n_in..(o + 1) * layer.n_in];
                    for (pd, w) in prev_delta.iter_mut().zip(row) {
                        *pd += delta[o] * w;
                    }
                }
                for (pd, a) in prev_delta.iter_mut().zip(&activations[li]) {
                    if *a <= 0.0 {
                        *pd = 0.0;
                    }
                }
                delta = prev_delta;
            }
        }
        (loss, grads)
    }

    pub fn fit(x: &[Vec<f64>], y: &[f64], params: &MlpParams, seed: u64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        if params.learning_rate_init <= 0.0 {
            return Err(Error::InvalidValue {
                field: "learning_rate_init",
                reason: "must be positive".into(),
            });
        }
        let n = x.len();
        let d = x[0].len();
        let mut model = MlpRegressor::initialized(d, &params.hidden_layer_sizes, seed);
        let batch_size = n.min(200);

        let mut velocity: Vec<Layer> = model
            .layers
            .iter()
            .map(|l| Layer::zeros(l.n_in, l.n_out))
            .collect();
        let mut adam_m = velocity.clone();
        let mut adam_v = velocity.clone();
        let mut adam_t = 0u32;
        let mut sgd_step = 0u64;
        let mut rate = params.learning_rate_init;
        let mut best_loss = f64::INFINITY;
        let mut stagnant = 0usize;

        for epoch in 1..=params.max_epochs {
            let mut order: Vec<usize> = (0..n).collect();
            let mut rng = seeding::rng(seeding::derive(seed, Stream::Shuffle, epoch as u64));
            // Fisher–Yates.
            for i in (1..n).rev() {
                let j = rng.random_range(0..=i);
                order.swap(i, j);
            }
            let mut epoch_loss = 0.0;
            for chunk in order.chunks(batch_size) {
                let xb: Vec<Vec<f64>> = chunk.iter().map(|&i| x[i].clone()).collect();
                let yb: Vec<f64> = chunk.iter().map(|&i| y[i]).collect();
                let (loss, grads) = model.loss_and_gradient(&xb, &yb);
                epoch_loss += loss * chunk.len() as f64;
                match params.solver {
                    MlpSolver::Sgd => {
                        sgd_step += 1;
                        let lr = match params.learning_rate {
                            LearningRateSchedule::InvScaling => {
                                params.learning_rate_init / (sgd_step as f64).sqrt()
                            }
                            _ => rate,
                        };
                        for (layer, (vel, grad)) in model
                            .layers
                            .iter_mut()
                            .zip(velocity.iter_mut().zip(&grads))
                        {
                            for ((w, v), g) in
                                layer.w.iter_mut().zip(&mut vel.w).zip(&grad.w)
                            {
                                *v = MOMENTUM * *v - lr * g;
                                *w += *v;
                            }
                            for ((b, v), g) in
                                layer.b.iter_mut().zip(&mut vel.b).zip(&grad.b)
                            {
                                *v = MOMENTUM * *v - lr * g;
                                *b += *v;
                            }
                        }
                    }
                    MlpSolver::Adam => {
                        adam_t += 1;
                        let c1 = 1.0 - ADAM_BETA1.powi(adam_t as i32);
                        let c2 = 1.0 - ADAM_BETA2.powi(adam_t as i32);
                        let lr = params.learning_rate_init;
                        for (layer, ((m1, m2), grad)) in model.layers.iter_mut().zip(
                            adam_m.iter_mut().zip(adam_v.iter_mut()).zip(&grads),
                        ) {
                            for (((w, m), v), g) in layer
                                .w
                                .iter_mut()
                                .zip(&mut m1.w)
                                .zip(&mut m2.w)
                                .zip(&grad.w)
                            {
                                *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                                *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                                *w -= lr * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
                            }
                            for (((b, m), v), g) in layer
                                .b
                                .iter_mut()
                                .zip(&mut m1.b)
                                .zip(&mut m2.b)
                                .zip(&grad.b)
                            {
                                *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                                *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                                *b -= lr * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
                            }
                        }
                    }
                }
            }
            epoch_loss /= n as f64;
            if !epoch_loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            model.epochs_run = epoch;
            model.final_loss = epoch_loss;

            if epoch_loss < best_loss - LOSS_TOL {
                best_loss = epoch_loss;
                stagnant = 0;
            } else {
                best_loss = best_loss.min(epoch_loss);
                stagnant += 1;
            }
            if params.learning_rate == LearningRateSchedule::Adaptive
                && params.solver == MlpSolver::Sgd
            {
                if stagnant >= 2 {
                    rate /= ADAPTIVE_DIVISOR;
                    stagnant = 0;
                }
                if rate < MIN_ADAPTIVE_RATE {
                    break;
                }
            } else if stagnant >= STAGNANT_EPOCH_LIMIT {
                break;
            }
        }
        Ok(model)
    }

    pub fn predict_one(&self, q: &[f64]) -> Result<f64> {
        if q.len() != self.n_features {
            return Err(Error::WrongDimension {
                expected: self.n_features,
                got: q.len(),
            });
        }
        Ok(self.forward(q).last().unwrap()[0])
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weight_network_predicts_the_output_bias() {
        let mut model = MlpRegressor::zeroed(3, &[5, 5]);
        model.layers.last_mut().unwrap().b[0] = 2.5;
        assert_eq!(model.predict_one(&[1.0, -4.0, 9.0]).unwrap(), 2.5);
        assert_eq!(model.predict_one(&[0.0, 0.0, 0.0]).unwrap(), 2.5);
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        let x = vec![
            vec![0.2, -0.4, 0.9],
            vec![1.0, 0.3, -0.2],
            vec![-0.6, 0.8, 0.1],
            vec![0.4, 0.4, 0.4],
            vec![-0.9, -0.1, 0.7],
        ];
        let y = [0.5, -1.0, 0.3, 0.9, -0.2];
        let model = MlpRegressor::initialized(3, &[4, 3], 11);
        let (_, grads) = model.loss_and_gradient(&x, &y);
        let h = 1e-5;
        let mut max_rel = 0.0_f64;
        for li in 0..model.layers.len() {
            for wi in 0..model.layers[li].w.len() {
                let mut plus = model.clone();
                plus.layers[li].w[wi] += h;
                let mut minus = model.clone();
                minus.layers[li].w[wi] -= h;
                let numeric =
                    (plus.loss_and_gradient(&x, &y).0 - minus.loss_and_gradient(&x, &y).0) / (2.0 * h);
                let analytic = grads[li].w[wi];
                let rel = (analytic - numeric).abs() / numeric.abs().max(1e-6);
                max_rel = max_rel.max(rel);
            }
            for bi in 0..model.layers[li].b.len() {
                let mut plus = model.clone();
                plus.layers[li].b[bi] += h;
                let mut minus = model.clone();
                minus.layers[li].b[bi] -= h;
                let numeric =
                    (plus.loss_and_gradient(&x, &y).0 - minus.loss_and_gradient(&x, &y).0) / (2.0 * h);
                let rel = (grads[li].b[bi] - numeric).abs() / numeric.abs().max(1e-6);
                max_rel = max_rel.max(rel);
            }
        }
        assert!(max_rel < 1e-4, "max relative gradient error {max_rel}");
    }

    #[test]
    fn same_seed_gives_bitwise_identical_first_epoch() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64 / 10.0]).collect();
        let y: Vec<f64> = x.iter().map(|r| r[0] * 2.0 - 1.0).collect();
        let params = MlpParams {
            max_epochs: 1,
            ..MlpParams::new(vec![5], MlpSolver::Sgd, LearningRateSchedule::Constant, 0.01)
        };
        let a = MlpRegressor::fit(&x, &y, &params, 99).unwrap();
        let b = MlpRegressor::fit(&x, &y, &params, 99).unwrap();
        assert_eq!(a.layers, b.layers);
        let c = MlpRegressor::fit(&x, &y, &params, 100).unwrap();
        assert_ne!(a.layers, c.layers);
    }

    #[test]
    fn learns_a_noiseless_line_with_adam() {
        let x: Vec<Vec<f64>> = (0..80).map(|i| vec![i as f64 / 40.0 - 1.0]).collect();
        let y: Vec<f64> = x.iter().map(|r| 0.7 * r[0] + 0.2).collect();
        let params = MlpParams::new(vec![10], MlpSolver::Adam, LearningRateSchedule::Constant, 0.01);
        let model = MlpRegressor::fit(&x, &y, &params, 3).unwrap();
        let mae: f64 = x
            .iter()
            .zip(&y)
            .map(|(r, t)| (model.predict_one(r).unwrap() - t).abs())
            .sum::<f64>()
            / y.len() as f64;
        assert!(mae < 0.08, "mae {mae}");
    }

    #[test]
    fn adaptive_schedule_decays_and_terminates() {
        // Constant targets converge immediately; the adaptive rate should
        // decay to the floor and stop well before max_epochs.
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let y = vec![1.0; 20];
        let params =
            MlpParams::new(vec![3], MlpSolver::Sgd, LearningRateSchedule::Adaptive, 0.001);
        let model = MlpRegressor::fit(&x, &y, &params, 5).unwrap();
        assert!(model.epochs_run < 500);
    }
}
