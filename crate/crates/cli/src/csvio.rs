//! Hand-rolled CSV codecs for the small fixed formats this tool speaks.
//!
//! No quoting or escaping: dates are ISO-8601, numbers are plain
//! decimals, keywords may not contain commas. Floats are written with
//! the shortest representation that parses back to the same bits, so
//! write-then-parse round trips are exact.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use volcast_core::infometrics::MiSurface;
use volcast_core::lstm::EpochStats;
use volcast_core::marketdata::{AlignedPanel, OhlcBar, TrendSeries};
use volcast_core::preprocess::SchemeDataset;
use volcast_core::Date;

use crate::error::{CliError, CliResult};

pub const OHLC_HEADER: &str = "date,open,high,low,close";
pub const PREDICTIONS_HEADER: &str = "date,actual,lstm,garch";
pub const MI_SURFACE_HEADER: &str = "delta_t,k,mi_score,skipped";
pub const HISTORY_HEADER: &str = "epoch,train_mape,test_mape";
pub const GK_HEADER: &str = "date,log_return,gk_volatility";

/// One line of `predictions.csv`: the test-segment comparison on the
/// volatility scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PredictionRow {
    pub date: Date,
    pub actual: f64,
    pub lstm: f64,
    pub garch: f64,
}

fn data_err(line_no: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("line {line_no}: {msg}"))
}

fn parse_field_f64(line_no: usize, name: &str, field: &str) -> CliResult<f64> {
    field
        .parse::<f64>()
        .map_err(|_| data_err(line_no, format!("{name} value '{field}' is not a number")))
}

fn parse_date_field(line_no: usize, field: &str) -> CliResult<Date> {
    Date::parse_iso(field).map_err(|e| data_err(line_no, e))
}

/// Lines with their 1-based numbers, tolerating CRLF endings.
fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .map(|line| line.strip_suffix('\r').unwrap_or(line))
        .enumerate()
        .map(|(idx, line)| (idx + 1, line))
}

pub fn parse_ohlc_csv(text: &str) -> CliResult<Vec<OhlcBar>> {
    let mut lines = numbered_lines(text);
    match lines.next() {
        Some((_, header)) if header == OHLC_HEADER => {}
        Some((_, header)) => {
            return Err(data_err(1, format!("expected header `{OHLC_HEADER}`, got `{header}`")))
        }
        None => return Err(CliError::Data("empty price file".into())),
    }
    let mut bars: Vec<OhlcBar> = Vec::new();
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(data_err(line_no, format!("expected 5 fields, got {}", fields.len())));
        }
        let date = parse_date_field(line_no, fields[0])?;
        let open = parse_field_f64(line_no, "open", fields[1])?;
        let high = parse_field_f64(line_no, "high", fields[2])?;
        let low = parse_field_f64(line_no, "low", fields[3])?;
        let close = parse_field_f64(line_no, "close", fields[4])?;
        let bar = OhlcBar::new(date, open, high, low, close)
            .map_err(|e| data_err(line_no, e))?;
        if let Some(prev) = bars.last() {
            if bar.date == prev.date {
                return Err(data_err(line_no, format!("duplicate date {}", bar.date)));
            }
            if bar.date < prev.date {
                return Err(data_err(
                    line_no,
                    format!("dates not increasing: {} after {}", bar.date, prev.date),
                ));
            }
        }
        bars.push(bar);
    }
    if bars.is_empty() {
        return Err(CliError::Data("no data rows in price file".into()));
    }
    Ok(bars)
}

pub fn parse_trends_csv(text: &str) -> CliResult<Vec<TrendSeries>> {
    let mut lines = numbered_lines(text);
    let keywords: Vec<String> = match lines.next() {
        Some((_, header)) => {
            let fields: Vec<&str> = header.split(',').collect();
            if fields.first() != Some(&"date") {
                return Err(data_err(1, "header must start with `date`"));
            }
            if fields.len() < 2 {
                return Err(data_err(1, "header needs at least one keyword column"));
            }
            if fields[1..].iter().any(|k| k.is_empty()) {
                return Err(data_err(1, "empty keyword in header"));
            }
            let unique: BTreeSet<&str> = fields[1..].iter().copied().collect();
            if unique.len() != fields.len() - 1 {
                return Err(data_err(1, "duplicate keyword in header"));
            }
            fields[1..].iter().map(|k| k.to_string()).collect()
        }
        None => return Err(CliError::Data("empty trends file".into())),
    };
    let mut series: Vec<TrendSeries> = keywords
        .iter()
        .map(|k| TrendSeries { keyword: k.clone(), observations: Vec::new() })
        .collect();
    let mut last_date: Option<Date> = None;
    let mut rows = 0usize;
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != keywords.len() + 1 {
            return Err(data_err(
                line_no,
                format!("expected {} fields, got {}", keywords.len() + 1, fields.len()),
            ));
        }
        let date = parse_date_field(line_no, fields[0])?;
        if let Some(prev) = last_date {
            if date == prev {
                return Err(data_err(line_no, format!("duplicate date {date}")));
            }
            if date < prev {
                return Err(data_err(
                    line_no,
                    format!("dates not increasing: {date} after {prev}"),
                ));
            }
        }
        last_date = Some(date);
        rows += 1;
        for (idx, field) in fields[1..].iter().enumerate() {
            if field.is_empty() {
                continue; // gap: no observation that day
            }
            let value = parse_field_f64(line_no, &keywords[idx], field)?;
            if !value.is_finite() {
                return Err(data_err(line_no, format!("{} value is not finite", keywords[idx])));
            }
            if value < 0.0 {
                return Err(data_err(line_no, format!("negative volume {value}")));
            }
            series[idx].observations.push((date, value));
        }
    }
    if rows == 0 {
        return Err(CliError::Data("no data rows in trends file".into()));
    }
    Ok(series)
}

pub fn write_ohlc_csv(bars: &[OhlcBar]) -> String {
    let mut out = String::with_capacity(bars.len() * 48 + 32);
    out.push_str(OHLC_HEADER);
    out.push('\n');
    for bar in bars {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            bar.date, bar.open, bar.high, bar.low, bar.close
        );
    }
    out
}

pub fn write_trends_csv(trends: &[TrendSeries]) -> String {
    let mut out = String::from("date");
    for t in trends {
        out.push(',');
        out.push_str(&t.keyword);
    }
    out.push('\n');
    let dates: BTreeSet<Date> = trends
        .iter()
        .flat_map(|t| t.observations.iter().map(|(d, _)| *d))
        .collect();
    // Walk every series with a cursor; observations are date-sorted.
    let mut cursors = vec![0usize; trends.len()];
    for date in dates {
        let _ = write!(out, "{date}");
        for (t, cursor) in trends.iter().zip(cursors.iter_mut()) {
            out.push(',');
            if let Some((d, v)) = t.observations.get(*cursor) {
                if *d == date {
                    let _ = write!(out, "{v}");
                    *cursor += 1;
                }
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_gk_csv(panel: &AlignedPanel) -> String {
    let mut out = String::from(GK_HEADER);
    out.push('\n');
    for idx in 0..panel.len() {
        let _ = writeln!(
            out,
            "{},{},{}",
            panel.dates[idx], panel.returns[idx], panel.volatility[idx]
        );
    }
    out
}

pub fn write_mi_surface_csv(surface: &MiSurface) -> String {
    let mut out = String::from(MI_SURFACE_HEADER);
    out.push('\n');
    for entry in &surface.entries {
        match entry.mi {
            Some(score) => {
                let _ = writeln!(
                    out,
                    "{},{},{},false",
                    entry.scheme.delta_t, entry.scheme.k, score
                );
            }
            None => {
                let _ = writeln!(out, "{},{},,true", entry.scheme.delta_t, entry.scheme.k);
            }
        }
    }
    out
}

pub fn write_history_csv(history: &[EpochStats]) -> String {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    for e in history {
        let _ = writeln!(out, "{},{},{}", e.epoch, e.train_mape, e.test_mape);
    }
    out
}

pub fn write_predictions_csv(rows: &[PredictionRow]) -> String {
    let mut out = String::from(PREDICTIONS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.date, r.actual, r.lstm, r.garch);
    }
    out
}

/// Inspection dump of a supervised dataset: feature columns by name,
/// then the normalized target, the raw next-period volatility, and the
/// per-row normalization statistics.
pub fn write_dataset_csv(ds: &SchemeDataset) -> String {
    let mut out = String::new();
    for name in &ds.feature_names {
        out.push_str(name);
        out.push(',');
    }
    out.push_str("target,raw_target,norm_mean,norm_std\n");
    for t in 0..ds.len() {
        for v in &ds.features[t] {
            let _ = write!(out, "{v},");
        }
        let meta = ds.norm_meta[t];
        let _ = writeln!(
            out,
            "{},{},{},{}",
            ds.target[t], ds.raw_target[t], meta.mean, meta.std
        );
    }
    out
}
