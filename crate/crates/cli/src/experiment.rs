//! The end-to-end comparison pipeline: ingest or generate data, align,
//! optional stationarity report, scheme selection, dataset construction,
//! recurrent-model training, conditional-variance benchmark, and
//! test-segment metrics for both models on the same volatility scale.
//!
//! Everything is a pure function of (config, seed); reports carry no
//! timestamps, so identical runs produce identical bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use volcast_core::garch::{fit_garch, garch_forecast, GarchFit};
use volcast_core::infometrics::{grid_search, scheme_mi, MiSurface};
use volcast_core::lstm::{mape_loss, predict, train, TrainedModel};
use volcast_core::marketdata::{align, AlignedPanel, OhlcBar, TrendSeries};
use volcast_core::metrics::{acf, mse, pacf, MetricsReport};
use volcast_core::preprocess::{
    adf_test, aggregate_returns, build_scheme_dataset, panel_columns, split_80_20, Scheme,
    StationarityReport,
};

use crate::config::{ExperimentConfig, SchemeMode};
use crate::csvio::{self, PredictionRow};
use crate::error::{CliError, CliResult};
use crate::synth::synth_generate;

/// Decorrelates the training stream from the data-generation stream.
pub const TRAIN_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Residual diagnostics go this deep unless the test segment is shorter.
pub const MAX_RESIDUAL_LAG: usize = 20;

pub struct LoadedData {
    pub bars: Vec<OhlcBar>,
    pub trends: Vec<TrendSeries>,
    pub description: String,
}

/// Reads the configured CSV pair, or generates the synthetic panel with
/// the experiment seed.
pub fn load_data(config: &ExperimentConfig, seed: u64) -> CliResult<LoadedData> {
    if let Some(data) = &config.data {
        let ohlc_text = std::fs::read_to_string(Path::new(&data.ohlc)).map_err(|e| {
            CliError::Data(format!("reading {}: {e}", data.ohlc))
        })?;
        let trends_text = std::fs::read_to_string(Path::new(&data.trends)).map_err(|e| {
            CliError::Data(format!("reading {}: {e}", data.trends))
        })?;
        let bars = csvio::parse_ohlc_csv(&ohlc_text)
            .map_err(|e| e.prefixed(&data.ohlc))?;
        let trends = csvio::parse_trends_csv(&trends_text)
            .map_err(|e| e.prefixed(&data.trends))?;
        let description = format!("files ({}, {})", data.ohlc, data.trends);
        Ok(LoadedData { bars, trends, description })
    } else {
        let synth_config = config.synth.clone().unwrap_or_default().with_seed(seed);
        let data = synth_generate(&synth_config)?;
        let description = format!(
            "synthetic ({} days, {} trends, coupling {}, seed {seed})",
            synth_config.n_days, synth_config.n_trends, synth_config.trend_coupling
        );
        Ok(LoadedData { bars: data.bars, trends: data.trends, description })
    }
}

pub fn build_panel(data: &LoadedData) -> CliResult<AlignedPanel> {
    align(&data.bars, &data.trends).map_err(|e| CliError::from_core("align", e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PanelSummary {
    pub days: usize,
    pub trend_columns: usize,
    pub clamped_volatility_estimates: usize,
    pub first_date: String,
    pub last_date: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeReport {
    pub delta_t: usize,
    pub k: usize,
    /// "fixed" from config, or "grid" when selected by the search.
    pub source: String,
    pub mi_score: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub rows: usize,
    pub feature_columns: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub degenerate_rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GarchSummary {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    pub fitted_on: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub epochs: usize,
    pub hidden_dim: usize,
    pub lag: usize,
    pub final_train_mape: Option<f64>,
    pub final_test_mape: Option<f64>,
}

/// The whole experiment, serialized as `report.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub data_source: String,
    pub panel: PanelSummary,
    pub stationarity: Option<Vec<StationarityReport>>,
    pub scheme: SchemeReport,
    pub dataset: DatasetSummary,
    pub garch: GarchSummary,
    pub training: TrainingSummary,
    /// Exactly two entries: `lstm`, then `garch`.
    pub metrics: Vec<MetricsReport>,
}

/// Everything `run` writes, rendered but not yet on disk.
pub struct ExperimentOutput {
    pub report: ExperimentReport,
    pub report_json: String,
    pub predictions_csv: String,
    pub history_csv: String,
    pub mi_surface_csv: Option<String>,
    pub model: TrainedModel,
}

/// Picks the scheme per config: the fixed pair, or the grid winner.
pub fn resolve_scheme(
    config: &ExperimentConfig,
    panel: &AlignedPanel,
) -> CliResult<(Scheme, Option<MiSurface>)> {
    match config.scheme.mode {
        SchemeMode::Fixed => Ok((config.scheme.fixed_scheme()?, None)),
        SchemeMode::Auto => {
            let [d_lo, d_hi] = config.scheme.delta_t_range;
            let [k_lo, k_hi] = config.scheme.k_range;
            let surface = grid_search(panel, d_lo..=d_hi, k_lo..=k_hi, config.mi.n_bins)
                .map_err(|e| CliError::from_core("scheme grid search", e))?;
            Ok((surface.best, Some(surface)))
        }
    }
}

fn stationarity_reports(
    panel: &AlignedPanel,
    lags: usize,
) -> CliResult<Vec<StationarityReport>> {
    panel_columns(panel)
        .into_iter()
        .map(|(name, series)| {
            adf_test(&name, &series, lags)
                .map_err(|e| CliError::from_core(&format!("stationarity ({name})"), e))
        })
        .collect()
}

/// Per-row one-step volatility forecasts from the variance benchmark.
/// Row `t`'s forecast conditions on aggregated returns through period
/// `k + t`, the same information horizon the features have.
fn garch_test_forecasts(
    fit: &GarchFit,
    r_agg: &[f64],
    k: usize,
    rows: std::ops::Range<usize>,
) -> CliResult<Vec<f64>> {
    rows.map(|t| {
        garch_forecast(fit, &r_agg[..=k + t])
            .map_err(|e| CliError::from_core("garch forecast", e))
    })
    .collect()
}

fn model_metrics(
    name: &str,
    predicted: &[f64],
    actual: &[f64],
    mape_epsilon: f64,
) -> CliResult<MetricsReport> {
    let stage = format!("metrics ({name})");
    let mse_value =
        mse(predicted, actual).map_err(|e| CliError::from_core(&stage, e))?;
    let mape_value = mape_loss(predicted, actual, mape_epsilon)
        .map_err(|e| CliError::from_core(&stage, e))?;
    let residuals: Vec<f64> = actual.iter().zip(predicted).map(|(a, p)| a - p).collect();
    let max_lag = MAX_RESIDUAL_LAG.min(residuals.len().saturating_sub(2));
    let residual_acf =
        acf(&residuals, max_lag).map_err(|e| CliError::from_core(&stage, e))?;
    let residual_pacf =
        pacf(&residuals, max_lag).map_err(|e| CliError::from_core(&stage, e))?;
    Ok(MetricsReport {
        model_name: name.to_string(),
        mse: mse_value,
        mape: mape_value,
        n_test: actual.len(),
        residual_acf,
        residual_pacf,
    })
}

pub fn run_experiment(config: &ExperimentConfig, cli_seed: Option<u64>) -> CliResult<ExperimentOutput> {
    config.validate()?;
    let seed = config.effective_seed(cli_seed);

    let data = load_data(config, seed)?;
    let panel = build_panel(&data)?;
    let panel_summary = PanelSummary {
        days: panel.len(),
        trend_columns: panel.trends.len(),
        clamped_volatility_estimates: panel.gk_clamped,
        first_date: panel.dates.first().map(|d| d.to_string()).unwrap_or_default(),
        last_date: panel.dates.last().map(|d| d.to_string()).unwrap_or_default(),
    };

    let stationarity = if config.adf.enabled {
        Some(stationarity_reports(&panel, config.adf.lags)?)
    } else {
        None
    };

    let (scheme, surface) = resolve_scheme(config, &panel)?;
    let dataset = build_scheme_dataset(&panel, scheme)
        .map_err(|e| CliError::from_core("dataset", e))?;
    let mi_score = match &surface {
        Some(s) => s
            .entries
            .iter()
            .find(|e| e.scheme == scheme)
            .and_then(|e| e.mi),
        None => Some(
            scheme_mi(&dataset, config.mi.n_bins)
                .map_err(|e| CliError::from_core("scheme score", e))?,
        ),
    };
    let scheme_report = SchemeReport {
        delta_t: scheme.delta_t,
        k: scheme.k,
        source: match config.scheme.mode {
            SchemeMode::Fixed => "fixed".into(),
            SchemeMode::Auto => "grid".into(),
        },
        mi_score,
    };

    let rows = dataset.len();
    let split = split_80_20(rows);
    let train_config = config.train.with_seed(seed ^ TRAIN_SEED_SALT);
    let test_start = split.max(train_config.lag.saturating_sub(1));
    if rows.saturating_sub(test_start) < 3 {
        return Err(CliError::Data(format!(
            "test segment has {} rows; need at least 3",
            rows.saturating_sub(test_start)
        )));
    }
    let dataset_summary = DatasetSummary {
        rows,
        feature_columns: dataset.input_dim(),
        train_rows: split,
        test_rows: rows - test_start,
        degenerate_rows: dataset.degenerate_rows.iter().filter(|&&d| d).count(),
    };

    let model = train(&dataset, &train_config)
        .map_err(|e| CliError::from_core("train", e))?;
    let predictions = predict(&model, &dataset)
        .map_err(|e| CliError::from_core("predict", e))?;

    // The benchmark sees the same aggregated return series the dataset
    // was built from, fitted strictly on pre-test periods.
    let r_agg = aggregate_returns(&panel.returns, scheme.delta_t)
        .map_err(|e| CliError::from_core("aggregate returns", e))?;
    let fit_len = scheme.k + split;
    let garch_fit = fit_garch(&r_agg[..fit_len])
        .map_err(|e| CliError::from_core("garch fit", e))?;
    let garch_preds =
        garch_test_forecasts(&garch_fit, &r_agg, scheme.k, test_start..rows)?;

    let actual: Vec<f64> = dataset.raw_target[test_start..rows].to_vec();
    let lstm_preds: Vec<f64> = (test_start..rows)
        .map(|t| predictions.denormalized[t - predictions.first_row])
        .collect();

    let metrics = vec![
        model_metrics("lstm", &lstm_preds, &actual, train_config.mape_epsilon)?,
        model_metrics("garch", &garch_preds, &actual, train_config.mape_epsilon)?,
    ];

    // Each dataset row's target is the next aggregated period; stamp the
    // prediction with that period's last trading day.
    let prediction_rows: Vec<PredictionRow> = (test_start..rows)
        .enumerate()
        .map(|(idx, t)| {
            let day = (scheme.k + t + 2) * scheme.delta_t - 1;
            PredictionRow {
                date: panel.dates[day],
                actual: actual[idx],
                lstm: lstm_preds[idx],
                garch: garch_preds[idx],
            }
        })
        .collect();

    let garch_summary = GarchSummary {
        omega: garch_fit.params.omega,
        alpha: garch_fit.params.alpha,
        beta: garch_fit.params.beta,
        log_likelihood: garch_fit.log_likelihood,
        converged: garch_fit.converged,
        iterations: garch_fit.iterations,
        fitted_on: fit_len,
    };
    let training_summary = TrainingSummary {
        epochs: train_config.epochs,
        hidden_dim: train_config.hidden_dim,
        lag: train_config.lag,
        final_train_mape: model.history.last().map(|e| e.train_mape),
        final_test_mape: model.history.last().map(|e| e.test_mape),
    };

    let report = ExperimentReport {
        seed,
        data_source: data.description,
        panel: panel_summary,
        stationarity,
        scheme: scheme_report,
        dataset: dataset_summary,
        garch: garch_summary,
        training: training_summary,
        metrics,
    };
    let report_json = render_report_json(&report)?;
    let predictions_csv = csvio::write_predictions_csv(&prediction_rows);
    let history_csv = csvio::write_history_csv(&model.history);
    let mi_surface_csv = surface.as_ref().map(csvio::write_mi_surface_csv);

    Ok(ExperimentOutput {
        report,
        report_json,
        predictions_csv,
        history_csv,
        mi_surface_csv,
        model,
    })
}

pub fn render_report_json(report: &ExperimentReport) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::Data(format!("report encode: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn parse_report_json(text: &str) -> CliResult<ExperimentReport> {
    serde_json::from_str(text).map_err(|e| CliError::Data(format!("report parse: {e}")))
}
