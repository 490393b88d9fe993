//! OHLC bars, search-trend series, and their alignment into a daily panel.
//!
//! The panel is the common starting point for everything downstream: one
//! row per trading date carrying the daily log return, the Garman-Klass
//! volatility, and each trend column forward-filled onto trading dates.

use alloc::string::String;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::date::Date;
use crate::error::{Error, Result};

/// One daily bar. `new` is the validating constructor; the fields stay
/// public so serializers can read them directly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OhlcBar {
    pub date: Date,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
}

impl OhlcBar {
    /// Requires finite positive prices with `low <= open, close <= high`.
    pub fn new(date: Date, open: f64, high: f64, low: f64, close: f64) -> Result<Self> {
        let prices = [open, high, low, close];
        if prices.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidBar { date, reason: "non-finite price".into() });
        }
        if prices.iter().any(|&p| p <= 0.0) {
            return Err(Error::InvalidBar { date, reason: "non-positive price".into() });
        }
        if low > high {
            return Err(Error::InvalidBar {
                date,
                reason: alloc::format!("inverted range: low {low} > high {high}"),
            });
        }
        if open < low || open > high {
            return Err(Error::InvalidBar {
                date,
                reason: alloc::format!("open {open} outside range [{low}, {high}]"),
            });
        }
        if close < low || close > high {
            return Err(Error::InvalidBar {
                date,
                reason: alloc::format!("close {close} outside range [{low}, {high}]"),
            });
        }
        Ok(OhlcBar { date, open, high, low, close })
    }
}

/// A search-volume series for one keyword. Observations are sparse:
/// `(date, value)` pairs sorted by date, with gaps simply absent.
#[derive(Clone, Debug, PartialEq)]
pub struct TrendSeries {
    pub keyword: String,
    pub observations: Vec<(Date, f64)>,
}

/// One dense, forward-filled trend column of an [`AlignedPanel`].
#[derive(Clone, Debug, PartialEq)]
pub struct TrendColumn {
    pub keyword: String,
    pub values: Vec<f64>,
}

/// Daily panel over trading dates: log returns, Garman-Klass volatility,
/// and trend columns, all the same length.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignedPanel {
    pub dates: Vec<Date>,
    pub returns: Vec<f64>,
    pub volatility: Vec<f64>,
    pub trends: Vec<TrendColumn>,
    /// Bars whose raw Garman-Klass value came out negative and was clamped.
    pub gk_clamped: usize,
}

impl AlignedPanel {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

/// Daily log returns `ln(close_t / close_{t-1})`; output is one shorter
/// than the input.
pub fn log_return(bars: &[OhlcBar]) -> Result<Vec<f64>> {
    if bars.len() < 2 {
        return Err(Error::SeriesTooShort { needed: 2, got: bars.len() });
    }
    Ok(bars.windows(2).map(|w| (w[1].close / w[0].close).ln()).collect())
}

/// Garman-Klass volatility with the small negative estimates clamped to 0.
pub fn gk_volatility(bar: &OhlcBar) -> f64 {
    gk_volatility_raw(bar).max(0.0)
}

/// The unclamped Garman-Klass quadratic form,
/// `0.511 (u-d)^2 - 0.019 (c (u+d) - 2 u d) - 0.383 c^2`
/// with `u`, `d`, `c` the high, low, and close log ratios to the open.
pub fn gk_volatility_raw(bar: &OhlcBar) -> f64 {
    let u = (bar.high / bar.open).ln();
    let d = (bar.low / bar.open).ln();
    let c = (bar.close / bar.open).ln();
    0.511 * (u - d) * (u - d) - 0.019 * (c * (u + d) - 2.0 * u * d) - 0.383 * c * c
}

fn check_sorted_bars(bars: &[OhlcBar]) -> Result<()> {
    for w in bars.windows(2) {
        if w[1].date == w[0].date {
            return Err(Error::DuplicateDate { date: w[1].date });
        }
        if w[1].date < w[0].date {
            return Err(Error::NonMonotonicDates { date: w[1].date });
        }
    }
    Ok(())
}

/// Joins bars and trend series into a daily panel.
///
/// Returns start at the second bar (the first has no previous close), and
/// the panel is trimmed to the first trading date on which every trend
/// already has an observation; from there each trend is forward-filled
/// from its most recent value at or before the trading date.
pub fn align(bars: &[OhlcBar], trends: &[TrendSeries]) -> Result<AlignedPanel> {
    if bars.len() < 2 {
        return Err(Error::SeriesTooShort { needed: 2, got: bars.len() });
    }
    check_sorted_bars(bars)?;
    for series in trends {
        if series.observations.is_empty() {
            return Err(Error::NoOverlap { keyword: series.keyword.clone() });
        }
        for w in series.observations.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::NonMonotonicDates { date: w[1].0 });
            }
        }
        if series.observations.iter().any(|&(_, v)| !v.is_finite() || v < 0.0) {
            return Err(Error::InvalidInput(alloc::format!(
                "trend {:?} has a negative or non-finite value",
                series.keyword
            )));
        }
    }

    // First bar index (>= 1) whose date every trend can forward-fill.
    let mut start = 1;
    for series in trends {
        let first_obs = series.observations[0].0;
        while start < bars.len() && bars[start].date < first_obs {
            start += 1;
        }
        if start == bars.len() {
            return Err(Error::NoOverlap { keyword: series.keyword.clone() });
        }
    }

    let returns: Vec<f64> =
        bars[start - 1..].windows(2).map(|w| (w[1].close / w[0].close).ln()).collect();
    let dates: Vec<Date> = bars[start..].iter().map(|b| b.date).collect();
    let mut gk_clamped = 0;
    let volatility: Vec<f64> = bars[start..]
        .iter()
        .map(|b| {
            let raw = gk_volatility_raw(b);
            if raw < 0.0 {
                gk_clamped += 1;
            }
            raw.max(0.0)
        })
        .collect();

    let mut columns = Vec::with_capacity(trends.len());
    for series in trends {
        let mut values = Vec::with_capacity(dates.len());
        let mut idx = 0;
        let mut current = f64::NAN;
        for &date in &dates {
            while idx < series.observations.len() && series.observations[idx].0 <= date {
                current = series.observations[idx].1;
                idx += 1;
            }
            // `start` guarantees an observation at or before every date.
            debug_assert!(current.is_finite());
            values.push(current);
        }
        columns.push(TrendColumn { keyword: series.keyword.clone(), values });
    }

    Ok(AlignedPanel { dates, returns, volatility, trends: columns, gk_clamped })
}
