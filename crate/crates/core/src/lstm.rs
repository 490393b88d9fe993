//! A from-scratch LSTM for one-step volatility forecasting.
//!
//! Single LSTM layer over a window of `lag` feature rows, followed by a
//! linear head on the final hidden state. Training minimizes mean
//! absolute percentage error with hand-written backpropagation through
//! time ([`bptt`]) and Adam ([`AdamState`]); no autodiff anywhere.
//!
//! Weight layout: each gate matrix has `input_dim + hidden_dim` rows and
//! `hidden_dim` columns, multiplying the concatenated `[x, h_prev]` row
//! vector from the left.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{row_vec_mat, Mat};
use crate::preprocess::NormMeta;
use crate::rng::SeedRng;

mod bptt;
mod serial;
mod train;

pub use bptt::bptt;
pub use serial::{deserialize_model, serialize_model, MODEL_FORMAT_VERSION};
pub use train::{predict, train, AdamState, LstmPredictions};

/// Training samples whose normalized target is closer to zero than this
/// are dropped: MAPE against a vanishing denominator is meaningless.
/// Evaluation never drops samples.
pub const TRAIN_TARGET_FLOOR: f64 = 1e-6;

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

// Named so it can be passed as a fn pointer in both std and no_std
// builds (the inherent f64 method only exists with std).
fn tanh(x: f64) -> f64 {
    x.tanh()
}

/// All trainable parameters. Gate order everywhere is forget, input,
/// candidate, output.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub w_f: Mat,
    pub w_i: Mat,
    pub w_g: Mat,
    pub w_o: Mat,
    pub b_f: Vec<f64>,
    pub b_i: Vec<f64>,
    pub b_g: Vec<f64>,
    pub b_o: Vec<f64>,
    pub w_out: Vec<f64>,
    pub b_out: f64,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        let rows = input_dim + hidden_dim;
        LstmParams {
            input_dim,
            hidden_dim,
            w_f: Mat::zeros(rows, hidden_dim),
            w_i: Mat::zeros(rows, hidden_dim),
            w_g: Mat::zeros(rows, hidden_dim),
            w_o: Mat::zeros(rows, hidden_dim),
            b_f: vec![0.0; hidden_dim],
            b_i: vec![0.0; hidden_dim],
            b_g: vec![0.0; hidden_dim],
            b_o: vec![0.0; hidden_dim],
            w_out: vec![0.0; hidden_dim],
            b_out: 0.0,
        }
    }

    /// Glorot-uniform initialization, biases zero except the forget bias
    /// at 1 so early training retains cell state. Draw order is fixed
    /// (gate matrices in gate order, row-major, then the head), making
    /// initialization reproducible per seed.
    pub fn seeded_init(input_dim: usize, hidden_dim: usize, rng: &mut SeedRng) -> Self {
        let mut p = LstmParams::zeros(input_dim, hidden_dim);
        let fan_in = (input_dim + hidden_dim) as f64;
        let bound = (6.0 / (fan_in + hidden_dim as f64)).sqrt();
        for w in [&mut p.w_f, &mut p.w_i, &mut p.w_g, &mut p.w_o] {
            for v in w.data_mut() {
                *v = rng.uniform_in(-bound, bound);
            }
        }
        let head_bound = (6.0 / (hidden_dim as f64 + 1.0)).sqrt();
        for v in p.w_out.iter_mut() {
            *v = rng.uniform_in(-head_bound, head_bound);
        }
        for v in p.b_f.iter_mut() {
            *v = 1.0;
        }
        p
    }

    pub fn zeros_like(&self) -> Self {
        LstmParams::zeros(self.input_dim, self.hidden_dim)
    }

    /// Named views over every trainable tensor, in a fixed order shared
    /// by the optimizer, the serializer, and gradient verification.
    pub fn tensors(&self) -> [(&'static str, &[f64]); 10] {
        [
            ("w_f", self.w_f.data()),
            ("w_i", self.w_i.data()),
            ("w_g", self.w_g.data()),
            ("w_o", self.w_o.data()),
            ("b_f", &self.b_f),
            ("b_i", &self.b_i),
            ("b_g", &self.b_g),
            ("b_o", &self.b_o),
            ("w_out", &self.w_out),
            ("b_out", core::slice::from_ref(&self.b_out)),
        ]
    }

    pub fn tensors_mut(&mut self) -> [(&'static str, &mut [f64]); 10] {
        [
            ("w_f", self.w_f.data_mut()),
            ("w_i", self.w_i.data_mut()),
            ("w_g", self.w_g.data_mut()),
            ("w_o", self.w_o.data_mut()),
            ("b_f", &mut self.b_f),
            ("b_i", &mut self.b_i),
            ("b_g", &mut self.b_g),
            ("b_o", &mut self.b_o),
            ("w_out", &mut self.w_out),
            ("b_out", core::slice::from_mut(&mut self.b_out)),
        ]
    }

    /// Tensor shape by name, for serialization checks. Associated rather
    /// than a method so it stays callable while `tensors_mut` borrows.
    pub(crate) fn tensor_shape(name: &str, input_dim: usize, hidden_dim: usize) -> Vec<usize> {
        let rows = input_dim + hidden_dim;
        match name {
            "w_f" | "w_i" | "w_g" | "w_o" => vec![rows, hidden_dim],
            "b_f" | "b_i" | "b_g" | "b_o" | "w_out" => vec![hidden_dim],
            "b_out" => vec![1],
            _ => unreachable!("unknown tensor {name}"),
        }
    }

    pub fn validate_finite(&self) -> Result<()> {
        for (name, data) in self.tensors() {
            if data.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(alloc::format!("lstm tensor {name}")));
            }
        }
        Ok(())
    }
}

/// The recurrent state carried between steps.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmState {
    pub cell: Vec<f64>,
    pub hidden: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden_dim: usize) -> Self {
        LstmState { cell: vec![0.0; hidden_dim], hidden: vec![0.0; hidden_dim] }
    }
}

/// Everything the backward pass needs about one forward step.
#[derive(Clone, Debug)]
pub struct StepCache {
    /// Concatenated `[x, h_prev]`.
    pub z: Vec<f64>,
    pub f: Vec<f64>,
    pub i: Vec<f64>,
    pub g: Vec<f64>,
    pub o: Vec<f64>,
    pub cell_prev: Vec<f64>,
    pub cell: Vec<f64>,
    pub tanh_cell: Vec<f64>,
    pub hidden: Vec<f64>,
}

/// One LSTM step:
/// gates `f, i, o = sigmoid([x, h] W + b)`, candidate `g = tanh(...)`,
/// `cell = f * cell_prev + i * g`, `hidden = o * tanh(cell)`.
pub fn cell_forward(
    x: &[f64],
    prev: &LstmState,
    params: &LstmParams,
) -> Result<(LstmState, StepCache)> {
    let (input_dim, hidden_dim) = (params.input_dim, params.hidden_dim);
    if x.len() != input_dim {
        return Err(Error::DimensionMismatch { expected: input_dim, got: x.len() });
    }
    if prev.hidden.len() != hidden_dim || prev.cell.len() != hidden_dim {
        return Err(Error::DimensionMismatch { expected: hidden_dim, got: prev.hidden.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("lstm input".into()));
    }

    let mut z = Vec::with_capacity(input_dim + hidden_dim);
    z.extend_from_slice(x);
    z.extend_from_slice(&prev.hidden);

    let mut pre = vec![0.0; hidden_dim];
    let mut gate = |w: &Mat, b: &[f64], squash: fn(f64) -> f64| -> Vec<f64> {
        row_vec_mat(&z, w, &mut pre);
        pre.iter().zip(b).map(|(a, bias)| squash(a + bias)).collect()
    };
    let f = gate(&params.w_f, &params.b_f, sigmoid);
    let i = gate(&params.w_i, &params.b_i, sigmoid);
    let g = gate(&params.w_g, &params.b_g, tanh);
    let o = gate(&params.w_o, &params.b_o, sigmoid);

    let cell: Vec<f64> = (0..hidden_dim)
        .map(|idx| f[idx] * prev.cell[idx] + i[idx] * g[idx])
        .collect();
    let tanh_cell: Vec<f64> = cell.iter().map(|&c| c.tanh()).collect();
    let hidden: Vec<f64> = (0..hidden_dim).map(|idx| o[idx] * tanh_cell[idx]).collect();

    let state = LstmState { cell: cell.clone(), hidden: hidden.clone() };
    let cache = StepCache {
        z,
        f,
        i,
        g,
        o,
        cell_prev: prev.cell.clone(),
        cell,
        tanh_cell,
        hidden,
    };
    Ok((state, cache))
}

/// Runs a window of feature rows from zero state through the cell and
/// the linear head, returning the scalar prediction and per-step caches.
pub fn sequence_forward(window: &[Vec<f64>], params: &LstmParams) -> Result<(f64, Vec<StepCache>)> {
    if window.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut state = LstmState::zeros(params.hidden_dim);
    let mut caches = Vec::with_capacity(window.len());
    for x in window {
        let (next, cache) = cell_forward(x, &state, params)?;
        state = next;
        caches.push(cache);
    }
    let pred = state.hidden.iter().zip(&params.w_out).map(|(h, w)| h * w).sum::<f64>()
        + params.b_out;
    Ok((pred, caches))
}

/// Mean absolute percentage error with the actual's magnitude floored at
/// `epsilon`, as a fraction.
pub fn mape_loss(pred: &[f64], actual: &[f64], epsilon: f64) -> Result<f64> {
    if pred.len() != actual.len() {
        return Err(Error::LengthMismatch { left: pred.len(), right: actual.len() });
    }
    if pred.is_empty() {
        return Err(Error::EmptySeries);
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput("mape epsilon must be positive".into()));
    }
    let sum: f64 = pred
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a).abs() / a.abs().max(epsilon))
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Training hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Window length in dataset rows.
    pub lag: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub mape_epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lag: 50,
            batch_size: 5,
            epochs: 200,
            hidden_dim: 32,
            learning_rate: 1e-3,
            mape_epsilon: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lag < 1 {
            return Err(Error::InvalidInput("lag must be at least 1".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::InvalidInput("batch_size must be at least 1".into()));
        }
        if self.hidden_dim < 1 {
            return Err(Error::InvalidInput("hidden_dim must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidInput("learning_rate must be positive".into()));
        }
        if !(self.mape_epsilon > 0.0) {
            return Err(Error::InvalidInput("mape_epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// Per-epoch losses on the normalized target scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_mape: f64,
    pub test_mape: f64,
}

/// A trained network plus everything needed to reuse it: config, loss
/// history, and the per-row normalization statistics of its training
/// dataset for mapping predictions back to the volatility scale.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub params: LstmParams,
    pub config: TrainConfig,
    pub history: Vec<EpochStats>,
    pub norm_meta: Vec<NormMeta>,
}
