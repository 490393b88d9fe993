//! Multi-day aggregation, rolling normalization, and supervised dataset
//! construction, plus an augmented Dickey-Fuller stationarity test.
//!
//! A [`Scheme`] is the pair `(delta_t, k)`: returns, trends, and
//! volatility are aggregated into non-overlapping `delta_t`-day periods,
//! then each aggregated column is normalized against a trailing window of
//! `k + 1` periods. Every statistic at row `t` only reads data at or
//! before that row's own period, so the features are usable for
//! forecasting; the target is the next period's aggregated volatility.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::marketdata::AlignedPanel;

/// Sample standard deviations below this are treated as degenerate.
pub const DEGENERATE_STD_TOL: f64 = 1e-12;

/// 5% critical value of the Dickey-Fuller t-distribution with intercept,
/// large-sample.
pub const ADF_CRIT_5PCT: f64 = -2.86;

/// Aggregation period length and normalization window, the pair the
/// mutual-information grid search optimizes over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scheme {
    pub delta_t: usize,
    pub k: usize,
}

impl Scheme {
    /// Requires `delta_t >= 1` and `k >= 2`.
    pub fn new(delta_t: usize, k: usize) -> Result<Self> {
        if delta_t < 1 {
            return Err(Error::InvalidInput("delta_t must be at least 1".into()));
        }
        if k < 2 {
            return Err(Error::InvalidInput("k must be at least 2".into()));
        }
        Ok(Scheme { delta_t, k })
    }
}

impl core::fmt::Display for Scheme {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "dt={} k={}", self.delta_t, self.k)
    }
}

fn check_aggregate_args(len: usize, delta_t: usize) -> Result<()> {
    if delta_t < 1 {
        return Err(Error::InvalidInput("delta_t must be at least 1".into()));
    }
    if len < delta_t {
        return Err(Error::SeriesTooShort { needed: delta_t, got: len });
    }
    Ok(())
}

/// Period log returns: block sums of daily log returns. A trailing
/// partial block is dropped.
pub fn aggregate_returns(r: &[f64], delta_t: usize) -> Result<Vec<f64>> {
    check_aggregate_args(r.len(), delta_t)?;
    Ok(r.chunks_exact(delta_t).map(|c| c.iter().sum()).collect())
}

/// Period trend level: block means.
pub fn aggregate_trend(d: &[f64], delta_t: usize) -> Result<Vec<f64>> {
    check_aggregate_args(d.len(), delta_t)?;
    Ok(d.chunks_exact(delta_t).map(|c| c.iter().sum::<f64>() / delta_t as f64).collect())
}

/// Period volatility: root of the block sum of squared daily values, the
/// aggregation under which independent per-day variances add.
pub fn aggregate_vol(h: &[f64], delta_t: usize) -> Result<Vec<f64>> {
    check_aggregate_args(h.len(), delta_t)?;
    Ok(h.chunks_exact(delta_t).map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect())
}

/// Output of [`rolling_normalize`]: one value per window position plus a
/// flag marking windows whose standard deviation collapsed.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedSeries {
    pub values: Vec<f64>,
    pub degenerate: Vec<bool>,
}

fn window_mean_std(window: &[f64]) -> (f64, f64) {
    let k = window.len() - 1;
    let mean = window.iter().sum::<f64>() / window.len() as f64;
    let ss: f64 = window.iter().map(|&v| (v - mean) * (v - mean)).sum();
    (mean, (ss / k as f64).sqrt())
}

/// Standardizes `z[i]` against the trailing window `z[i-k..=i]` (`k + 1`
/// points, sample standard deviation with divisor `k`). The first `k`
/// positions have no full window and are trimmed, so the output has
/// `z.len() - k` values. Degenerate windows emit 0 and are flagged.
pub fn rolling_normalize(z: &[f64], k: usize) -> Result<NormalizedSeries> {
    if k < 1 {
        return Err(Error::InvalidInput("window k must be at least 1".into()));
    }
    if z.len() < k + 1 {
        return Err(Error::SeriesTooShort { needed: k + 1, got: z.len() });
    }
    let n_out = z.len() - k;
    let mut values = Vec::with_capacity(n_out);
    let mut degenerate = Vec::with_capacity(n_out);
    for i in k..z.len() {
        let (mean, std) = window_mean_std(&z[i - k..=i]);
        if std < DEGENERATE_STD_TOL {
            values.push(0.0);
            degenerate.push(true);
        } else {
            values.push((z[i] - mean) / std);
            degenerate.push(false);
        }
    }
    Ok(NormalizedSeries { values, degenerate })
}

/// Normalization statistics stored per dataset row so predictions can be
/// mapped back to the volatility scale. `std` is strictly positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormMeta {
    pub mean: f64,
    pub std: f64,
}

/// Supervised dataset for one scheme. Row `t` corresponds to aggregation
/// period `k + t`; its features summarize data up to that period and its
/// target is the next period's aggregated volatility, normalized with the
/// same trailing window statistics recorded in `norm_meta`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeDataset {
    pub scheme: Scheme,
    pub feature_names: Vec<String>,
    /// Row-major: `features[t]` has one entry per feature column.
    pub features: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    pub raw_target: Vec<f64>,
    pub norm_meta: Vec<NormMeta>,
    /// Rows where any normalization window (feature or target) collapsed.
    pub degenerate_rows: Vec<bool>,
}

impl SchemeDataset {
    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.feature_names.len()
    }

    /// Copies one feature column out of the row-major storage.
    pub fn column(&self, idx: usize) -> Vec<f64> {
        self.features.iter().map(|row| row[idx]).collect()
    }
}

/// Chronological 80/20 boundary: the first `floor(0.8 n)` rows train.
pub fn split_80_20(n: usize) -> usize {
    n * 4 / 5
}

/// Builds the supervised dataset for `scheme` from a daily panel.
///
/// With `p = floor(len / delta_t)` full periods the dataset has
/// `p - k - 1` rows: `k` leading periods lack a normalization window and
/// the final period lacks a successor to predict.
pub fn build_scheme_dataset(panel: &AlignedPanel, scheme: Scheme) -> Result<SchemeDataset> {
    let days = panel.len();
    let Scheme { delta_t, k } = scheme;
    let needed = (k + 2) * delta_t;
    if days < needed {
        return Err(Error::SeriesTooShort { needed, got: days });
    }
    let periods = days / delta_t;
    let rows = periods - k - 1;

    let mut feature_names = Vec::with_capacity(panel.trends.len() + 2);
    feature_names.push("r".to_string());
    feature_names.push("h".to_string());
    for col in &panel.trends {
        feature_names.push(col.keyword.clone());
    }

    let h_agg = aggregate_vol(&panel.volatility, delta_t)?;
    let mut normalized = Vec::with_capacity(feature_names.len());
    normalized.push(rolling_normalize(&aggregate_returns(&panel.returns, delta_t)?, k)?);
    normalized.push(rolling_normalize(&h_agg, k)?);
    for col in &panel.trends {
        normalized.push(rolling_normalize(&aggregate_trend(&col.values, delta_t)?, k)?);
    }

    let mut features = Vec::with_capacity(rows);
    let mut target = Vec::with_capacity(rows);
    let mut raw_target = Vec::with_capacity(rows);
    let mut norm_meta = Vec::with_capacity(rows);
    let mut degenerate_rows = Vec::with_capacity(rows);
    for t in 0..rows {
        let row: Vec<f64> = normalized.iter().map(|series| series.values[t]).collect();
        let mut degenerate = normalized.iter().any(|series| series.degenerate[t]);

        // Target window: the same k + 1 periods that normalized the h
        // feature at this row, so nothing beyond the row's own period
        // leaks into the statistics.
        let (mean, std) = window_mean_std(&h_agg[t..=t + k]);
        let raw = h_agg[t + k + 1];
        let std = if std < DEGENERATE_STD_TOL {
            degenerate = true;
            1.0
        } else {
            std
        };
        features.push(row);
        target.push((raw - mean) / std);
        raw_target.push(raw);
        norm_meta.push(NormMeta { mean, std });
        degenerate_rows.push(degenerate);
    }

    Ok(SchemeDataset {
        scheme,
        feature_names,
        features,
        target,
        raw_target,
        norm_meta,
        degenerate_rows,
    })
}

/// Augmented Dickey-Fuller test result for one named series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub series_name: String,
    pub adf_statistic: f64,
    pub lags: usize,
    /// Statistic below the 5% critical value, rejecting a unit root.
    pub reject_unit_root_5pct: bool,
}

/// Augmented Dickey-Fuller regression with intercept and `lags` lagged
/// differences; the statistic is the t-ratio on the lagged level.
pub fn adf_test(series_name: &str, z: &[f64], lags: usize) -> Result<StationarityReport> {
    let n = z.len();
    let n_params = lags + 2;
    // Enough rows for the regression to have positive residual degrees of
    // freedom with a margin.
    let needed = core::cmp::max(lags + 10, 2 * lags + 6);
    if n < needed {
        return Err(Error::SeriesTooShort { needed, got: n });
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("adf input series".into()));
    }

    // dz[i] = z[i+1] - z[i]; the regression row at time t explains dz at t
    // from the level at t-1 and the previous `lags` differences.
    let dz: Vec<f64> = z.windows(2).map(|w| w[1] - w[0]).collect();
    let m = n - 1 - lags;
    let mut xtx = Mat::zeros(n_params, n_params);
    let mut xty = vec![0.0; n_params];
    let mut row = vec![0.0; n_params];
    let mut rows_cache: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut ys = Vec::with_capacity(m);
    for t in lags + 1..n {
        row[0] = 1.0;
        row[1] = z[t - 1];
        for j in 1..=lags {
            row[1 + j] = dz[t - j - 1];
        }
        let y = dz[t - 1];
        for a in 0..n_params {
            for b in 0..n_params {
                xtx[(a, b)] += row[a] * row[b];
            }
            xty[a] += row[a] * y;
        }
        rows_cache.push(row.clone());
        ys.push(y);
    }

    let coef = linalg::solve(xtx.clone(), xty)?;
    // Diagonal entry of (X'X)^-1 for the level coefficient, via one more
    // solve against the matching unit vector.
    let mut e1 = vec![0.0; n_params];
    e1[1] = 1.0;
    let inv_col = linalg::solve(xtx, e1)?;
    let inv_11 = inv_col[1];

    let mut rss = 0.0;
    for (row, &y) in rows_cache.iter().zip(&ys) {
        let fit: f64 = row.iter().zip(&coef).map(|(a, b)| a * b).sum();
        let resid = y - fit;
        rss += resid * resid;
    }
    let dof = m - n_params;
    let s2 = rss / dof as f64;
    let var = s2 * inv_11;
    if !var.is_finite() || var <= 0.0 {
        return Err(Error::SingularMatrix);
    }
    let stat = coef[1] / var.sqrt();
    if !stat.is_finite() {
        return Err(Error::NonFinite("adf statistic".into()));
    }
    Ok(StationarityReport {
        series_name: series_name.to_string(),
        adf_statistic: stat,
        lags,
        reject_unit_root_5pct: stat < ADF_CRIT_5PCT,
    })
}

/// Convenience: panel columns in dataset order (`r`, `h`, trends), each
/// paired with its name. Used for stationarity screening.
pub fn panel_columns(panel: &AlignedPanel) -> Vec<(String, Vec<f64>)> {
    let mut cols = Vec::with_capacity(panel.trends.len() + 2);
    cols.push(("r".to_string(), panel.returns.clone()));
    cols.push(("h".to_string(), panel.volatility.clone()));
    for col in &panel.trends {
        cols.push((col.keyword.clone(), col.values.clone()));
    }
    cols
}
