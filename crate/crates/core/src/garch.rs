//! GARCH(1,1) benchmark: filtering, Gaussian quasi-likelihood fitting by
//! Nelder-Mead, one-step forecasting, and simulation.
//!
//! The variance recursion is
//! `h2[t] = omega + h2[t-1] * (alpha + beta * eps[t-1]^2)` with
//! `eps = r / h`, which expands to
//! `h2[t] = omega + alpha * h2[t-1] + beta * r[t-1]^2`: `alpha` multiplies
//! the lagged variance and `beta` the squared innovation. The recursion
//! starts from the unconditional variance `omega / (1 - alpha - beta)`,
//! so `h2[t]` only ever depends on returns strictly before `t`.

use alloc::format;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::NelderMead;
use crate::rng::SeedRng;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const SIM_BURN_IN: usize = 500;
/// Upper bound on fitted persistence, keeping the optimum strictly
/// stationary.
const MAX_PERSISTENCE: f64 = 0.999;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl GarchParams {
    pub fn new(omega: f64, alpha: f64, beta: f64) -> Result<Self> {
        let p = GarchParams { omega, alpha, beta };
        p.validate()?;
        Ok(p)
    }

    /// Requires `omega > 0`, `alpha, beta >= 0`, `alpha + beta < 1`.
    pub fn validate(&self) -> Result<()> {
        let GarchParams { omega, alpha, beta } = *self;
        if !omega.is_finite() || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParams("garch parameters must be finite".into()));
        }
        if omega <= 0.0 {
            return Err(Error::InvalidParams(format!("omega must be positive, got {omega}")));
        }
        if alpha < 0.0 || beta < 0.0 {
            return Err(Error::InvalidParams("alpha and beta must be non-negative".into()));
        }
        if alpha + beta >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "alpha + beta must be below 1, got {}",
                alpha + beta
            )));
        }
        Ok(())
    }

    pub fn unconditional_variance(&self) -> f64 {
        self.omega / (1.0 - self.alpha - self.beta)
    }
}

/// Which period's innovation enters the variance recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarianceTiming {
    /// `h2[t]` uses the innovation of period `t-1`. Causal; the default
    /// everywhere.
    Lagged,
    /// `h2[t]` uses the innovation of period `t` itself, making the
    /// recursion implicit; solved via its positive root. Kept for
    /// comparison, never used in fitting or forecasting.
    Contemporaneous,
}

/// Conditional variance series `h2[t]` for each return, causal timing.
pub fn garch_filter(returns: &[f64], params: &GarchParams) -> Result<Vec<f64>> {
    garch_filter_with_timing(returns, params, VarianceTiming::Lagged)
}

pub fn garch_filter_with_timing(
    returns: &[f64],
    params: &GarchParams,
    timing: VarianceTiming,
) -> Result<Vec<f64>> {
    params.validate()?;
    if returns.is_empty() {
        return Err(Error::EmptySeries);
    }
    let GarchParams { omega, alpha, beta } = *params;
    let mut h2 = Vec::with_capacity(returns.len());
    h2.push(params.unconditional_variance());
    match timing {
        VarianceTiming::Lagged => {
            for t in 1..returns.len() {
                let prev = h2[t - 1];
                let r_prev = returns[t - 1];
                h2.push(omega + alpha * prev + beta * r_prev * r_prev);
            }
        }
        VarianceTiming::Contemporaneous => {
            // h2 = omega + alpha h2_prev + beta h2_prev r^2 / h2 is a
            // quadratic in h2; the positive root keeps the variance above
            // omega + alpha h2_prev.
            for t in 1..returns.len() {
                let prev = h2[t - 1];
                let r = returns[t];
                let a = omega + alpha * prev;
                let c = beta * prev * r * r;
                h2.push(0.5 * (a + (a * a + 4.0 * c).sqrt()));
            }
        }
    }
    Ok(h2)
}

/// Gaussian log-likelihood of the return series under the filtered
/// variances.
pub fn garch_loglik(returns: &[f64], params: &GarchParams) -> Result<f64> {
    let h2 = garch_filter(returns, params)?;
    let mut ll = 0.0;
    for (r, v) in returns.iter().zip(&h2) {
        ll += -0.5 * (LN_2PI + v.ln() + r * r / v);
    }
    Ok(ll)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GarchFit {
    pub params: GarchParams,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Free 3-vector to constrained parameters: `omega = exp(x0)`, total
/// persistence `0.999 * sigmoid(x1)` split between `alpha` and `beta` by
/// `sigmoid(x2)`. Every free point maps to a strictly valid parameter
/// set.
fn params_from_free(x: &[f64]) -> GarchParams {
    let omega = x[0].exp();
    let persistence = MAX_PERSISTENCE * sigmoid(x[1]);
    let share = sigmoid(x[2]);
    GarchParams { omega, alpha: persistence * share, beta: persistence * (1.0 - share) }
}

fn free_from_params(p: &GarchParams) -> [f64; 3] {
    let persistence = p.alpha + p.beta;
    [p.omega.ln(), logit(persistence / MAX_PERSISTENCE), logit(p.alpha / persistence)]
}

/// The three fixed multi-start parameter sets, scaled to the sample
/// mean square `v`: variance-persistent, balanced, and innovation-heavy.
fn multi_starts(v: f64) -> [GarchParams; 3] {
    [
        GarchParams { omega: 0.05 * v, alpha: 0.85, beta: 0.10 },
        GarchParams { omega: 0.50 * v, alpha: 0.25, beta: 0.25 },
        GarchParams { omega: 0.05 * v, alpha: 0.10, beta: 0.85 },
    ]
}

/// Fits by maximizing the Gaussian quasi-likelihood with Nelder-Mead in
/// the free parameterization, keeping the best of three fixed starts.
pub fn fit_garch(returns: &[f64]) -> Result<GarchFit> {
    if returns.len() < 50 {
        return Err(Error::SeriesTooShort { needed: 50, got: returns.len() });
    }
    if returns.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite("returns".into()));
    }
    let v = returns.iter().map(|r| r * r).sum::<f64>() / returns.len() as f64;
    if v <= 0.0 {
        return Err(Error::InvalidInput(
            "returns are identically zero; the likelihood is degenerate".into(),
        ));
    }

    let objective = |x: &[f64]| {
        let params = params_from_free(x);
        match garch_loglik(returns, &params) {
            Ok(ll) if ll.is_finite() => -ll,
            _ => f64::INFINITY,
        }
    };

    let nm = NelderMead { max_iters: 2000, tol: 1e-8, initial_step: 0.5 };
    let mut best: Option<crate::optim::OptimResult> = None;
    for start in multi_starts(v) {
        let x0 = free_from_params(&start);
        let res = nm.minimize(objective, &x0)?;
        let replace = match &best {
            None => true,
            Some(b) => res.fx < b.fx,
        };
        if replace {
            best = Some(res);
        }
    }
    let best = best.unwrap();
    if !best.fx.is_finite() {
        return Err(Error::NoConvergence("non-finite likelihood at every start".into()));
    }
    let params = params_from_free(&best.x);
    params.validate()?;
    Ok(GarchFit {
        params,
        log_likelihood: -best.fx,
        converged: best.converged,
        iterations: best.iterations,
    })
}

/// One-step-ahead volatility forecast `sqrt(h2[T+1])` after filtering the
/// whole return series.
pub fn garch_forecast(fit: &GarchFit, returns: &[f64]) -> Result<f64> {
    let h2 = garch_filter(returns, &fit.params)?;
    let last_h2 = *h2.last().unwrap();
    let last_r = *returns.last().unwrap();
    let GarchParams { omega, alpha, beta } = fit.params;
    Ok((omega + alpha * last_h2 + beta * last_r * last_r).sqrt())
}

/// A simulated path: returns and the conditional variances that
/// generated them.
#[derive(Clone, Debug, PartialEq)]
pub struct GarchSim {
    pub returns: Vec<f64>,
    pub variance: Vec<f64>,
}

/// Simulates `length` steps after a 500-step burn-in from the
/// unconditional variance, with standard normal innovations.
pub fn simulate_garch_path(params: &GarchParams, length: usize, seed: u64) -> Result<GarchSim> {
    params.validate()?;
    if length == 0 {
        return Err(Error::EmptySeries);
    }
    let GarchParams { omega, alpha, beta } = *params;
    let mut rng = SeedRng::new(seed);
    let mut h2 = params.unconditional_variance();
    let mut returns = Vec::with_capacity(length);
    let mut variance = Vec::with_capacity(length);
    for step in 0..SIM_BURN_IN + length {
        let eps = rng.standard_normal();
        let r = h2.sqrt() * eps;
        if step >= SIM_BURN_IN {
            returns.push(r);
            variance.push(h2);
        }
        h2 = omega + h2 * (alpha + beta * eps * eps);
    }
    Ok(GarchSim { returns, variance })
}

/// Simulated returns only.
pub fn simulate_garch(params: &GarchParams, length: usize, seed: u64) -> Result<Vec<f64>> {
    Ok(simulate_garch_path(params, length, seed)?.returns)
}
