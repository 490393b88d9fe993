//! Forecast evaluation: MSE, autocorrelations, and the per-model report.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;


use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean squared error of predictions against actuals.
pub fn mse(pred: &[f64], actual: &[f64]) -> Result<f64> {
    if pred.len() != actual.len() {
        return Err(Error::LengthMismatch { left: pred.len(), right: actual.len() });
    }
    if pred.is_empty() {
        return Err(Error::EmptySeries);
    }
    let sum: f64 = pred.iter().zip(actual).map(|(p, a)| (p - a) * (p - a)).sum();
    Ok(sum / pred.len() as f64)
}

/// Sample autocorrelation function at lags `0..=max_lag`; `acf[0]` is 1.
pub fn acf(z: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if z.len() < max_lag + 2 {
        return Err(Error::SeriesTooShort { needed: max_lag + 2, got: z.len() });
    }
    let n = z.len();
    let mean = z.iter().sum::<f64>() / n as f64;
    let denom: f64 = z.iter().map(|&v| (v - mean) * (v - mean)).sum();
    if denom <= 0.0 || !denom.is_finite() {
        return Err(Error::InvalidInput("zero-variance series has no autocorrelation".into()));
    }
    let mut out = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        let mut num = 0.0;
        for t in lag..n {
            num += (z[t] - mean) * (z[t - lag] - mean);
        }
        out.push(num / denom);
    }
    Ok(out)
}

/// Partial autocorrelation function at lags `0..=max_lag` via the
/// Durbin-Levinson recursion; `pacf[0]` is 1.
pub fn pacf(z: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let rho = acf(z, max_lag)?;
    let mut out = vec![1.0];
    if max_lag == 0 {
        return Ok(out);
    }
    let mut phi_prev = vec![rho[1]];
    out.push(rho[1]);
    for m in 2..=max_lag {
        let num = rho[m] - phi_prev.iter().enumerate().map(|(j, p)| p * rho[m - 1 - j]).sum::<f64>();
        let den = 1.0 - phi_prev.iter().enumerate().map(|(j, p)| p * rho[j + 1]).sum::<f64>();
        if !den.is_finite() || den.abs() < 1e-14 {
            return Err(Error::NonFinite("pacf recursion denominator".into()));
        }
        let phi_mm = num / den;
        let mut phi = Vec::with_capacity(m);
        for j in 0..m - 1 {
            phi.push(phi_prev[j] - phi_mm * phi_prev[m - 2 - j]);
        }
        phi.push(phi_mm);
        out.push(phi_mm);
        phi_prev = phi;
    }
    Ok(out)
}

/// Test-segment evaluation of one model's volatility forecasts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model_name: String,
    /// MSE on the volatility scale (denormalized).
    pub mse: f64,
    /// Mean absolute percentage error as a fraction (0.2 = 20%).
    pub mape: f64,
    pub n_test: usize,
    pub residual_acf: Vec<f64>,
    pub residual_pacf: Vec<f64>,
}
