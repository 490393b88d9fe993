//! Hand-written backpropagation through time for the MAPE objective.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{mat_vec_transposed, outer_add};

use super::{sequence_forward, LstmParams};

/// Gradient of the batch-mean MAPE loss with respect to every parameter.
///
/// `windows[b]` is a window of feature rows predicting `targets[b]`. The
/// MAPE derivative at a sample is `sign(pred - y) / max(|y|, epsilon)`;
/// the exact tie `pred == y` takes the zero subgradient.
pub fn bptt(
    windows: &[&[Vec<f64>]],
    targets: &[f64],
    params: &LstmParams,
    epsilon: f64,
) -> Result<LstmParams> {
    if windows.len() != targets.len() {
        return Err(Error::LengthMismatch { left: windows.len(), right: targets.len() });
    }
    if windows.is_empty() {
        return Err(Error::EmptySeries);
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput("mape epsilon must be positive".into()));
    }

    let hidden_dim = params.hidden_dim;
    let input_dim = params.input_dim;
    let batch = windows.len() as f64;
    let mut grads = params.zeros_like();

    for (&window, &y) in windows.iter().zip(targets) {
        let (pred, caches) = sequence_forward(window, params)?;
        let dpred = if pred == y {
            0.0
        } else {
            let sign = if pred > y { 1.0 } else { -1.0 };
            sign / (y.abs().max(epsilon) * batch)
        };

        // Head gradients and the hidden-state gradient entering the top
        // of the unrolled sequence.
        let last_hidden = &caches.last().unwrap().hidden;
        for (gw, &h) in grads.w_out.iter_mut().zip(last_hidden) {
            *gw += dpred * h;
        }
        grads.b_out += dpred;
        let mut dh: Vec<f64> = params.w_out.iter().map(|w| dpred * w).collect();
        let mut ds = vec![0.0; hidden_dim];

        let mut da_f = vec![0.0; hidden_dim];
        let mut da_i = vec![0.0; hidden_dim];
        let mut da_g = vec![0.0; hidden_dim];
        let mut da_o = vec![0.0; hidden_dim];
        let mut dz_part = vec![0.0; input_dim + hidden_dim];
        let mut dz = vec![0.0; input_dim + hidden_dim];

        for cache in caches.iter().rev() {
            for idx in 0..hidden_dim {
                let o = cache.o[idx];
                let tc = cache.tanh_cell[idx];
                // Cell gradient: from the hidden output this step plus
                // whatever flowed back through the next step's forget gate.
                let ds_total = ds[idx] + dh[idx] * o * (1.0 - tc * tc);
                let f = cache.f[idx];
                let i = cache.i[idx];
                let g = cache.g[idx];
                da_o[idx] = dh[idx] * tc * o * (1.0 - o);
                da_f[idx] = ds_total * cache.cell_prev[idx] * f * (1.0 - f);
                da_i[idx] = ds_total * g * i * (1.0 - i);
                da_g[idx] = ds_total * i * (1.0 - g * g);
                ds[idx] = ds_total * f;
            }

            outer_add(&mut grads.w_f, &cache.z, &da_f);
            outer_add(&mut grads.w_i, &cache.z, &da_i);
            outer_add(&mut grads.w_g, &cache.z, &da_g);
            outer_add(&mut grads.w_o, &cache.z, &da_o);
            for idx in 0..hidden_dim {
                grads.b_f[idx] += da_f[idx];
                grads.b_i[idx] += da_i[idx];
                grads.b_g[idx] += da_g[idx];
                grads.b_o[idx] += da_o[idx];
            }

            dz.fill(0.0);
            for (w, da) in [
                (&params.w_f, &da_f),
                (&params.w_i, &da_i),
                (&params.w_g, &da_g),
                (&params.w_o, &da_o),
            ] {
                mat_vec_transposed(w, da, &mut dz_part);
                for (acc, &v) in dz.iter_mut().zip(&dz_part) {
                    *acc += v;
                }
            }
            // The input part of dz stops here; the hidden part becomes
            // the next (earlier) step's dh.
            dh.copy_from_slice(&dz[input_dim..]);
        }
    }

    for (name, data) in grads.tensors() {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(alloc::format!("gradient of {name}")));
        }
    }
    Ok(grads)
}
