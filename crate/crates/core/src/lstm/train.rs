//! Adam optimization, the training loop, and prediction.

use alloc::format;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::preprocess::{split_80_20, SchemeDataset};
use crate::rng::SeedRng;

use super::{
    bptt, mape_loss, sequence_forward, EpochStats, LstmParams, TrainConfig, TrainedModel,
    TRAIN_TARGET_FLOOR,
};

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Adam first/second moment accumulators, shaped like the parameters.
pub struct AdamState {
    m: LstmParams,
    v: LstmParams,
    step: u32,
}

impl AdamState {
    pub fn new(shape: &LstmParams) -> Self {
        AdamState { m: shape.zeros_like(), v: shape.zeros_like(), step: 0 }
    }

    /// One bias-corrected Adam update in place.
    pub fn apply(&mut self, params: &mut LstmParams, grads: &LstmParams, learning_rate: f64) {
        self.step += 1;
        let bc1 = 1.0 - ADAM_BETA1.powi(self.step as i32);
        let bc2 = 1.0 - ADAM_BETA2.powi(self.step as i32);
        let ps = params.tensors_mut();
        let ms = self.m.tensors_mut();
        let vs = self.v.tensors_mut();
        let gs = grads.tensors();
        for (((p, m), v), g) in ps.into_iter().zip(ms).zip(vs).zip(gs) {
            for idx in 0..p.1.len() {
                let grad = g.1[idx];
                m.1[idx] = ADAM_BETA1 * m.1[idx] + (1.0 - ADAM_BETA1) * grad;
                v.1[idx] = ADAM_BETA2 * v.1[idx] + (1.0 - ADAM_BETA2) * grad * grad;
                let m_hat = m.1[idx] / bc1;
                let v_hat = v.1[idx] / bc2;
                p.1[idx] -= learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPS);
            }
        }
    }
}

/// Mean MAPE over the windows ending at rows `range` (inclusive start,
/// exclusive end), never dropping samples.
fn eval_mape(
    params: &LstmParams,
    dataset: &SchemeDataset,
    range: core::ops::Range<usize>,
    lag: usize,
    epsilon: f64,
) -> Result<f64> {
    let mut preds = Vec::with_capacity(range.len());
    let mut actuals = Vec::with_capacity(range.len());
    for t in range {
        let window = &dataset.features[t + 1 - lag..=t];
        preds.push(sequence_forward(window, params)?.0);
        actuals.push(dataset.target[t]);
    }
    mape_loss(&preds, &actuals, epsilon)
}

/// Trains on the chronological first 80% of the dataset with stride-1
/// windows in order (no shuffling), recording train and test MAPE after
/// every epoch. Training samples with near-zero normalized targets are
/// dropped; divergence (non-finite loss) aborts with the failing epoch
/// named.
pub fn train(dataset: &SchemeDataset, config: &TrainConfig) -> Result<TrainedModel> {
    config.validate()?;
    let rows = dataset.len();
    let lag = config.lag;
    if rows < lag + 2 {
        return Err(Error::SeriesTooShort { needed: lag + 2, got: rows });
    }
    let split = split_80_20(rows);
    if split < lag {
        return Err(Error::InvalidInput(format!(
            "training segment ({split} rows) shorter than lag {lag}"
        )));
    }

    // Window end rows, chronological. Training additionally drops rows
    // whose normalized target sits below the MAPE floor.
    let train_rows: Vec<usize> = (lag - 1..split)
        .filter(|&t| dataset.target[t].abs() >= TRAIN_TARGET_FLOOR)
        .collect();
    if train_rows.is_empty() {
        return Err(Error::InvalidInput(
            "no training samples: every normalized target is near zero".into(),
        ));
    }
    let test_start = split.max(lag - 1);

    let mut rng = SeedRng::new(config.seed);
    let mut params = LstmParams::seeded_init(dataset.input_dim(), config.hidden_dim, &mut rng);
    let mut adam = AdamState::new(&params);
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        for chunk in train_rows.chunks(config.batch_size) {
            let windows: Vec<&[alloc::vec::Vec<f64>]> =
                chunk.iter().map(|&t| &dataset.features[t + 1 - lag..=t]).collect();
            let targets: Vec<f64> = chunk.iter().map(|&t| dataset.target[t]).collect();
            let grads = bptt(&windows, &targets, &params, config.mape_epsilon)?;
            adam.apply(&mut params, &grads, config.learning_rate);
        }
        let train_mape = eval_mape(&params, dataset, lag - 1..split, lag, config.mape_epsilon)?;
        let test_mape = eval_mape(&params, dataset, test_start..rows, lag, config.mape_epsilon)?;
        if !train_mape.is_finite() || !test_mape.is_finite() {
            return Err(Error::NonFinite(format!(
                "training diverged at epoch {epoch}; last finite epoch {}",
                epoch.checked_sub(1).map(|e| format!("{e}")).unwrap_or_else(|| "none".into())
            )));
        }
        history.push(EpochStats { epoch, train_mape, test_mape });
    }

    params.validate_finite()?;
    Ok(TrainedModel {
        params,
        config: *config,
        history,
        norm_meta: dataset.norm_meta.clone(),
    })
}

/// Predictions for every row with a full window behind it.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmPredictions {
    /// Dataset row of the first prediction (`lag - 1`).
    pub first_row: usize,
    /// On the normalized target scale.
    pub normalized: Vec<f64>,
    /// Mapped back to the volatility scale via the per-row normalization
    /// statistics and floored at zero.
    pub denormalized: Vec<f64>,
}

/// Runs the model over a dataset built with the same feature layout.
pub fn predict(model: &TrainedModel, dataset: &SchemeDataset) -> Result<LstmPredictions> {
    if dataset.input_dim() != model.params.input_dim {
        return Err(Error::DimensionMismatch {
            expected: model.params.input_dim,
            got: dataset.input_dim(),
        });
    }
    let lag = model.config.lag;
    if dataset.len() < lag {
        return Err(Error::SeriesTooShort { needed: lag, got: dataset.len() });
    }
    if dataset.norm_meta.len() != dataset.len() {
        return Err(Error::LengthMismatch {
            left: dataset.norm_meta.len(),
            right: dataset.len(),
        });
    }
    let mut normalized = Vec::with_capacity(dataset.len() - lag + 1);
    let mut denormalized = Vec::with_capacity(dataset.len() - lag + 1);
    for t in lag - 1..dataset.len() {
        let window = &dataset.features[t + 1 - lag..=t];
        let pred = sequence_forward(window, &model.params)?.0;
        let meta = dataset.norm_meta[t];
        normalized.push(pred);
        denormalized.push((pred * meta.std + meta.mean).max(0.0));
    }
    Ok(LstmPredictions { first_row: lag - 1, normalized, denormalized })
}
