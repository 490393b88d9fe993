//! Derivative-free minimization with the Nelder-Mead simplex.

use alloc::vec::Vec;

use crate::error::{Error, Result};

const ALPHA: f64 = 1.0; // reflection
const GAMMA: f64 = 2.0; // expansion
const RHO: f64 = 0.5; // contraction
const SIGMA: f64 = 0.5; // shrink

#[derive(Clone, Copy, Debug)]
pub struct NelderMead {
    pub max_iters: usize,
    /// Converged when the simplex diameter (max coordinate spread to the
    /// best vertex) falls below this.
    pub tol: f64,
    /// Offset added per coordinate to build the initial simplex.
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead { max_iters: 2000, tol: 1e-8, initial_step: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn sanitize(fx: f64) -> f64 {
    if fx.is_nan() {
        f64::INFINITY
    } else {
        fx
    }
}

impl NelderMead {
    /// Minimizes `f` from `x0`. Non-finite objective values are treated
    /// as infinitely bad, so the simplex retreats from them.
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> Result<OptimResult> {
        let n = x0.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty starting point".into()));
        }
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for i in 0..n {
            let mut v = x0.to_vec();
            v[i] += self.initial_step;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| sanitize(f(v))).collect();

        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iters {
            // Order vertices best-first.
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| {
                values[a].partial_cmp(&values[b]).unwrap_or(core::cmp::Ordering::Equal)
            });
            let reordered: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
            let revalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
            simplex = reordered;
            values = revalues;

            let diameter = simplex[1..]
                .iter()
                .map(|v| {
                    v.iter()
                        .zip(&simplex[0])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0f64, f64::max)
                })
                .fold(0.0f64, f64::max);
            if diameter < self.tol {
                converged = true;
                break;
            }
            iterations += 1;

            // Centroid of all but the worst vertex.
            let mut centroid = alloc::vec![0.0; n];
            for v in &simplex[..n] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x;
                }
            }
            for c in centroid.iter_mut() {
                *c /= n as f64;
            }

            let worst = values[n];
            let second_worst = values[n - 1];
            let best = values[0];

            let reflect: Vec<f64> =
                centroid.iter().zip(&simplex[n]).map(|(c, w)| c + ALPHA * (c - w)).collect();
            let f_reflect = sanitize(f(&reflect));

            if f_reflect < best {
                let expand: Vec<f64> =
                    centroid.iter().zip(&reflect).map(|(c, r)| c + GAMMA * (r - c)).collect();
                let f_expand = sanitize(f(&expand));
                if f_expand < f_reflect {
                    simplex[n] = expand;
                    values[n] = f_expand;
                } else {
                    simplex[n] = reflect;
                    values[n] = f_reflect;
                }
                continue;
            }
            if f_reflect < second_worst {
                simplex[n] = reflect;
                values[n] = f_reflect;
                continue;
            }
            let contract: Vec<f64> = if f_reflect < worst {
                centroid.iter().zip(&reflect).map(|(c, r)| c + RHO * (r - c)).collect()
            } else {
                centroid.iter().zip(&simplex[n]).map(|(c, w)| c + RHO * (w - c)).collect()
            };
            let f_contract = sanitize(f(&contract));
            if f_contract < worst.min(f_reflect) {
                simplex[n] = contract;
                values[n] = f_contract;
                continue;
            }
            // Shrink everything toward the best vertex.
            for i in 1..=n {
                let shrunk: Vec<f64> = simplex[0]
                    .iter()
                    .zip(&simplex[i])
                    .map(|(b, v)| b + SIGMA * (v - b))
                    .collect();
                values[i] = sanitize(f(&shrunk));
                simplex[i] = shrunk;
            }
        }

        let mut best_idx = 0;
        for i in 1..=n {
            if values[i] < values[best_idx] {
                best_idx = i;
            }
        }
        Ok(OptimResult {
            x: simplex[best_idx].clone(),
            fx: values[best_idx],
            iterations,
            converged,
        })
    }
}
