//! Deterministic synthetic market data.
//!
//! A latent conditional-variance process drives each day's price path as
//! 20 Gaussian sub-steps; the day's high and low come from exact
//! Brownian-bridge extreme sampling over each sub-step, so the range
//! statistics match the continuous process the range-based estimator
//! assumes (naive discrete extremes understate the range badly). Trend
//! columns mix standardized lagged volatility with seeded noise, so the
//! panel carries real volatility information at positive coupling and
//! none at zero.
//!
//! All draws happen in a fixed order (per day: 20 increments, then a
//! high/low uniform pair per sub-step; afterwards trend noise column by
//! column), so output is a pure function of the config.

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use volcast_core::garch::GarchParams;
use volcast_core::marketdata::{OhlcBar, TrendSeries};
use volcast_core::rng::SeedRng;
use volcast_core::Date;

use crate::error::{CliError, CliResult};

pub const SUBSTEPS_PER_DAY: usize = 20;
const BASE_PRICE: f64 = 100.0;
const VOLUME_BASE: f64 = 100.0;
const VOLUME_SPREAD: f64 = 0.35;

/// Generator settings. Defaults are the benchmark panel: ten years of
/// weekdays, 28 trend columns, persistent but stationary variance, and
/// strong trend coupling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub n_days: usize,
    pub n_trends: usize,
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Weight in [0, 1] of lagged volatility in each trend column.
    pub trend_coupling: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_days: 2500,
            n_trends: 28,
            omega: 4e-6,
            alpha: 0.90,
            beta: 0.08,
            trend_coupling: 0.8,
            seed: 7,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.n_days < 200 {
            return Err(CliError::Config(format!(
                "synth n_days must be at least 200, got {}",
                self.n_days
            )));
        }
        if self.n_trends < 1 {
            return Err(CliError::Config("synth n_trends must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.trend_coupling) {
            return Err(CliError::Config(format!(
                "trend_coupling must be in [0, 1], got {}",
                self.trend_coupling
            )));
        }
        self.garch_params().map(|_| ())
    }

    pub fn garch_params(&self) -> CliResult<GarchParams> {
        GarchParams::new(self.omega, self.alpha, self.beta)
            .map_err(|e| CliError::from_core("synth config", e))
    }
}

pub struct SynthData {
    pub bars: Vec<OhlcBar>,
    pub trends: Vec<TrendSeries>,
}

/// One day's log-price path relative to the open.
struct DayShape {
    ret: f64,
    high: f64,
    low: f64,
}

/// Simulates 20 sub-steps at the given daily variance and samples the
/// exact running extremes. For a bridge from `a` to `b` with variance
/// `v`, the maximum M satisfies P(M ≥ m) = exp(-2 m (m - (a+b) + ab/m)...)
/// which inverts to M = ((a+b) + sqrt((a-b)^2 - 2 v ln U)) / 2 for
/// uniform U in (0, 1]; the minimum is symmetric.
fn day_path(rng: &mut SeedRng, variance: f64) -> DayShape {
    let step_var = variance / SUBSTEPS_PER_DAY as f64;
    let step_std = step_var.sqrt();
    let mut increments = [0.0; SUBSTEPS_PER_DAY];
    for inc in increments.iter_mut() {
        *inc = step_std * rng.standard_normal();
    }
    let mut high = 0.0f64;
    let mut low = 0.0f64;
    let mut level = 0.0;
    for inc in increments {
        let a = level;
        let b = level + inc;
        let u_hi = 1.0 - rng.uniform();
        let u_lo = 1.0 - rng.uniform();
        let d = a - b;
        let max = 0.5 * ((a + b) + (d * d - 2.0 * step_var * u_hi.ln()).sqrt());
        let min = 0.5 * ((a + b) - (d * d - 2.0 * step_var * u_lo.ln()).sqrt());
        high = high.max(max);
        low = low.min(min);
        level = b;
    }
    DayShape { ret: level, high, low }
}

/// Trading dates: consecutive weekdays from 2010-01-04.
fn trading_dates(n_days: usize) -> Vec<Date> {
    let mut dates = Vec::with_capacity(n_days);
    let mut day = NaiveDate::from_ymd_opt(2010, 1, 4).unwrap();
    while dates.len() < n_days {
        if !matches!(day.weekday(), Weekday::Sat | Weekday::Sun) {
            let date = Date::new(day.year() as u16, day.month() as u8, day.day() as u8)
                .expect("calendar date is valid");
            dates.push(date);
        }
        day = day.succ_opt().expect("date range stays well inside chrono bounds");
    }
    dates
}

pub fn synth_generate(config: &SynthConfig) -> CliResult<SynthData> {
    config.validate()?;
    let params = config.garch_params()?;
    let n = config.n_days;
    let dates = trading_dates(n);
    let mut rng = SeedRng::new(config.seed);

    // Latent variance recursion, started at its stationary level; each
    // day's realized return feeds the next day's variance.
    let mut variances = Vec::with_capacity(n);
    let mut bars = Vec::with_capacity(n);
    let mut h2 = params.unconditional_variance();
    let mut close = BASE_PRICE;
    for date in &dates {
        let shape = day_path(&mut rng, h2);
        let open = close;
        close = open * shape.ret.exp();
        let bar = OhlcBar::new(
            *date,
            open,
            open * shape.high.exp(),
            open * shape.low.exp(),
            close,
        )
        .expect("bridge extremes bracket open and close by construction");
        bars.push(bar);
        variances.push(h2);
        h2 = params.omega + params.alpha * h2 + params.beta * shape.ret * shape.ret;
    }

    // Standardized lagged volatility: day t carries day t-1's latent
    // level (day 0 reuses its own, avoiding a hole).
    let lagged: Vec<f64> = (0..n)
        .map(|t| variances[t.saturating_sub(1)].sqrt())
        .collect();
    let mean = lagged.iter().sum::<f64>() / n as f64;
    let var = lagged.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let std = var.sqrt();
    let standardized: Vec<f64> = if std < 1e-12 {
        vec![0.0; n]
    } else {
        lagged.iter().map(|v| (v - mean) / std).collect()
    };

    let coupling = config.trend_coupling;
    let mut trends = Vec::with_capacity(config.n_trends);
    for j in 0..config.n_trends {
        let keyword = format!("kw{:02}", j + 1);
        let observations: Vec<(Date, f64)> = (0..n)
            .map(|t| {
                let x = coupling * standardized[t] + (1.0 - coupling) * rng.standard_normal();
                (dates[t], VOLUME_BASE * (VOLUME_SPREAD * x).exp())
            })
            .collect();
        trends.push(TrendSeries { keyword, observations });
    }

    Ok(SynthData { bars, trends })
}
