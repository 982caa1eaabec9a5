//! A small fully connected regressor `N -> y` (1 -> 64 -> 32 -> 1, ReLU hidden
//! layers, linear output) trained full-batch with Adam on a mean squared error.
//!
//! Inputs are min-max scaled over the training range and targets are
//! standardized; both transforms are stored in the model so predictions come
//! back in the original units.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrology::Parity;
use crate::rng::seeded;

pub const LAYER_SIZES: [usize; 4] = [1, 64, 32, 1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Dn,
    Qfi,
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dn" => Ok(Target::Dn),
            "qfi" => Ok(Target::Qfi),
            other => Err(Error::InvalidParameter(format!("unknown target `{other}`"))),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Dn => "dn",
            Target::Qfi => "qfi",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs x inputs`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        DenseLayer {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.outputs {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            let mut acc = self.biases[o];
            for (w, xi) in row.iter().zip(x) {
                acc += w * xi;
            }
            out.push(acc);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub x_min: f64,
    pub x_max: f64,
    pub y_mean: f64,
    pub y_std: f64,
}

impl Default for Normalization {
    fn default() -> Self {
        Normalization {
            x_min: 0.0,
            x_max: 1.0,
            y_mean: 0.0,
            y_std: 1.0,
        }
    }
}

impl Normalization {
    pub fn fit(data: &[(f64, f64)]) -> Self {
        let x_min = data.iter().map(|d| d.0).fold(f64::INFINITY, f64::min);
        let x_max = data.iter().map(|d| d.0).fold(f64::NEG_INFINITY, f64::max);
        let m = data.len() as f64;
        let y_mean = data.iter().map(|d| d.1).sum::<f64>() / m;
        let var = data.iter().map(|d| (d.1 - y_mean).powi(2)).sum::<f64>() / m;
        let y_std = var.sqrt();
        Normalization {
            x_min,
            x_max: if x_max > x_min { x_max } else { x_min + 1.0 },
            y_mean,
            y_std: if y_std > 0.0 { y_std } else { 1.0 },
        }
    }

    pub fn scale_x(&self, x: f64) -> f64 {
        (x - self.x_min) / (self.x_max - self.x_min)
    }

    pub fn scale_y(&self, y: f64) -> f64 {
        (y - self.y_mean) / self.y_std
    }

    pub fn unscale_y(&self, y: f64) -> f64 {
        y * self.y_std + self.y_mean
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub step: u64,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    pub layers: Vec<DenseLayer>,
    pub parity: Parity,
    pub target: Target,
    pub normalization: Normalization,
    pub seed: u64,
    #[serde(default)]
    pub optimizer: Option<AdamState>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(seed: u64) -> Self {
        TrainConfig {
            epochs: 4000,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed,
        }
    }
}

/// Weights uniform in `+-sqrt(1 / fan_in)`, zero biases.
pub fn init_model(parity: Parity, target: Target, seed: u64) -> MlpModel {
    let mut rng = seeded(seed);
    let layers = LAYER_SIZES
        .windows(2)
        .map(|w| {
            let mut layer = DenseLayer::zeros(w[0], w[1]);
            let bound = (1.0 / w[0] as f64).sqrt();
            for x in &mut layer.weights {
                *x = rng.random_range(-bound..=bound);
            }
            layer
        })
        .collect();
    MlpModel {
        layer_sizes: LAYER_SIZES.to_vec(),
        layers,
        parity,
        target,
        normalization: Normalization::default(),
        seed,
        optimizer: None,
    }
}

/// Pre-activations and activations of one forward pass in normalized units.
struct Trace {
    pre: Vec<Vec<f64>>,
    act: Vec<Vec<f64>>,
}

impl MlpModel {
    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Flat parameters: per layer, weights then biases.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::DimensionMismatch {
                expected: self.parameter_count(),
                got: params.len(),
            });
        }
        let mut k = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&params[k..k + nw]);
            k += nw;
            let nb = l.biases.len();
            l.biases.copy_from_slice(&params[k..k + nb]);
            k += nb;
        }
        Ok(())
    }

    fn trace(&self, x_scaled: f64) -> Trace {
        let mut act = vec![vec![x_scaled]];
        let mut pre = Vec::with_capacity(self.layers.len());
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::with_capacity(layer.outputs);
            layer.apply(&act[i], &mut z);
            let a = if i == last {
                z.clone()
            } else {
                z.iter().map(|v| v.max(0.0)).collect()
            };
            pre.push(z);
            act.push(a);
        }
        Trace { pre, act }
    }

    /// Prediction in normalized target units for a normalized input.
    pub fn forward_scaled(&self, x_scaled: f64) -> f64 {
        self.trace(x_scaled).act.last().expect("output layer")[0]
    }

    pub fn forward(&self, x: f64) -> f64 {
        let nrm = &self.normalization;
        nrm.unscale_y(self.forward_scaled(nrm.scale_x(x)))
    }

    fn check_shapes(&self) -> Result<()> {
        let ok = self.layer_sizes.len() == self.layers.len() + 1
            && self.layers.iter().enumerate().all(|(i, l)| {
                l.inputs == self.layer_sizes[i]
                    && l.outputs == self.layer_sizes[i + 1]
                    && l.weights.len() == l.inputs * l.outputs
                    && l.biases.len() == l.outputs
            });
        if !ok {
            return Err(Error::InvalidParameter("inconsistent layer shapes".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: MlpModel = serde_json::from_str(s)
            .map_err(|e| Error::InvalidParameter(format!("model JSON: {e}")))?;
        m.check_shapes()?;
        Ok(m)
    }
}

/// Mean squared error over normalized samples and its flat gradient.
pub fn loss_and_gradient(model: &MlpModel, samples: &[(f64, f64)]) -> (f64, Vec<f64>) {
    let mut grads: Vec<DenseLayer> = model
        .layers
        .iter()
        .map(|l| DenseLayer::zeros(l.inputs, l.outputs))
        .collect();
    let m = samples.len() as f64;
    let mut loss = 0.0;
    let last = model.layers.len() - 1;
    for &(x, y) in samples {
        let tr = model.trace(x);
        let err = tr.act[last + 1][0] - y;
        loss += err * err / m;
        let mut delta = vec![2.0 * err / m];
        for i in (0..=last).rev() {
            let layer = &model.layers[i];
            let g = &mut grads[i];
            let input = &tr.act[i];
            for o in 0..layer.outputs {
                g.biases[o] += delta[o];
                for (k, xi) in input.iter().enumerate() {
                    g.weights[o * layer.inputs + k] += delta[o] * xi;
                }
            }
            if i == 0 {
                break;
            }
            let below = &tr.pre[i - 1];
            delta = (0..layer.inputs)
                .map(|k| {
                    if below[k] <= 0.0 {
                        return 0.0;
                    }
                    (0..layer.outputs)
                        .map(|o| layer.weights[o * layer.inputs + k] * delta[o])
                        .sum()
                })
                .collect();
        }
    }
    let mut flat = Vec::with_capacity(model.parameter_count());
    for g in &grads {
        flat.extend_from_slice(&g.weights);
        flat.extend_from_slice(&g.biases);
    }
    (loss, flat)
}

fn validate_data(data: &[(f64, f64)], parity: Parity) -> Result<()> {
    if data.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "training needs at least 2 points, got {}",
            data.len()
        )));
    }
    for &(n, y) in data {
        if !n.is_finite() || !y.is_finite() {
            return Err(Error::InvalidParameter("non-finite training data".into()));
        }
        let integral = n.fract() == 0.0 && n >= 0.0;
        if parity != Parity::All && !(integral && parity.accepts(n as usize)) {
            return Err(Error::InvalidParameter(format!(
                "N = {n} does not match parity {parity}"
            )));
        }
    }
    Ok(())
}

/// Keeps the points whose size matches `parity`.
pub fn split_by_parity(data: &[(f64, f64)], parity: Parity) -> Vec<(f64, f64)> {
    data.iter()
        .copied()
        .filter(|&(n, _)| n.fract() == 0.0 && n >= 0.0 && parity.accepts(n as usize))
        .collect()
}

/// Full-batch Adam for exactly `cfg.epochs` epochs. The loss history holds
/// the normalized-unit loss evaluated before each update.
pub fn train(
    data: &[(f64, f64)],
    cfg: &TrainConfig,
    parity: Parity,
    target: Target,
) -> Result<(MlpModel, Vec<f64>)> {
    validate_data(data, parity)?;
    if cfg.epochs == 0 {
        return Err(Error::InvalidParameter("epochs must be at least 1".into()));
    }
    if !(cfg.learning_rate > 0.0) {
        return Err(Error::InvalidParameter("learning rate must be positive".into()));
    }
    let mut model = init_model(parity, target, cfg.seed);
    model.normalization = Normalization::fit(data);
    let nrm = model.normalization;
    let samples: Vec<(f64, f64)> = data
        .iter()
        .map(|&(x, y)| (nrm.scale_x(x), nrm.scale_y(y)))
        .collect();

    let count = model.parameter_count();
    let mut state = AdamState {
        step: 0,
        first_moment: vec![0.0; count],
        second_moment: vec![0.0; count],
    };
    let mut params = model.parameters();
    let mut history = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        let (loss, grad) = loss_and_gradient(&model, &samples);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numeric(format!(
                "training diverged at epoch {}",
                history.len()
            )));
        }
        history.push(loss);
        state.step += 1;
        let t = state.step as i32;
        let c1 = 1.0 - cfg.beta1.powi(t);
        let c2 = 1.0 - cfg.beta2.powi(t);
        for (k, g) in grad.iter().enumerate() {
            let m = &mut state.first_moment[k];
            let v = &mut state.second_moment[k];
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            params[k] -= cfg.learning_rate * (*m / c1) / ((*v / c2).sqrt() + cfg.epsilon);
        }
        model.set_parameters(&params)?;
    }
    model.optimizer = Some(state);
    Ok((model, history))
}

/// Mean squared error in original units.
pub fn mse(model: &MlpModel, data: &[(f64, f64)]) -> f64 {
    data.iter()
        .map(|&(x, y)| (model.forward(x) - y).powi(2))
        .sum::<f64>()
        / data.len().max(1) as f64
}

pub fn predict_series(model: &MlpModel, ns: &[f64]) -> Vec<(f64, f64)> {
    ns.iter().map(|&n| (n, model.forward(n))).collect()
}
