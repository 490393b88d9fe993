//! Command-line interface over the experiment harness.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use volcast::config::ExperimentConfig;
use volcast::csvio;
use volcast::error::{CliError, CliResult};
use volcast::experiment::{
    self, build_panel, load_data, resolve_scheme, ExperimentReport, TRAIN_SEED_SALT,
};
use volcast::synth::synth_generate;

use volcast_core::garch::fit_garch;
use volcast_core::lstm::{serialize_model, train};
use volcast_core::preprocess::build_scheme_dataset;

#[derive(Parser)]
#[command(
    name = "volcast",
    version,
    about = "Volatility forecasting toolkit: OHLC + search-trend ingest, \
             information-driven scheme selection, and a recurrent-network vs \
             conditional-variance benchmark comparison."
)]
struct Cli {
    /// TOML experiment config; built-in defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the experiment seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for generated files.
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic ohlc.csv + trends.csv pair.
    Synth,
    /// Parse and align the configured data; report the panel shape.
    IngestCheck,
    /// Write the daily return and volatility series as gk.csv.
    Gk,
    /// Score every scheme in the configured grid; write mi-surface.csv.
    MiGrid,
    /// Train the forecaster; write model.json and history.csv.
    Train,
    /// Fit the variance benchmark to the full daily return series; write
    /// garch.json. (The `run` comparison instead fits only the training
    /// segment of the aggregated series.)
    FitGarch,
    /// Full comparison; write report.json, predictions.csv, history.csv,
    /// and mi-surface.csv when the scheme comes from the grid.
    Run,
    /// Pretty-print a previously written report.json.
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let config = load_config(cli)?;
    config.validate()?;
    let seed = config.effective_seed(cli.seed);
    match cli.command {
        Command::Synth => cmd_synth(&config, seed, &cli.out),
        Command::IngestCheck => cmd_ingest_check(&config, seed),
        Command::Gk => cmd_gk(&config, seed, &cli.out),
        Command::MiGrid => cmd_mi_grid(&config, seed, &cli.out),
        Command::Train => cmd_train(&config, seed, &cli.out),
        Command::FitGarch => cmd_fit_garch(&config, seed, &cli.out),
        Command::Run => cmd_run(&config, cli.seed, &cli.out),
        Command::Report => cmd_report(&cli.out),
    }
}

fn load_config(cli: &Cli) -> CliResult<ExperimentConfig> {
    match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
            ExperimentConfig::parse(&text)
        }
        None => Ok(ExperimentConfig::default()),
    }
}

fn write_file(dir: &Path, name: &str, content: &str) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), content)?;
    println!("wrote {}", dir.join(name).display());
    Ok(())
}

fn cmd_synth(config: &ExperimentConfig, seed: u64, out: &Path) -> CliResult<()> {
    let synth_config = config.synth.clone().unwrap_or_default().with_seed(seed);
    let data = synth_generate(&synth_config)?;
    println!(
        "generated {} days, {} trend columns (seed {seed})",
        synth_config.n_days, synth_config.n_trends
    );
    write_file(out, "ohlc.csv", &csvio::write_ohlc_csv(&data.bars))?;
    write_file(out, "trends.csv", &csvio::write_trends_csv(&data.trends))?;
    Ok(())
}

fn cmd_ingest_check(config: &ExperimentConfig, seed: u64) -> CliResult<()> {
    let data = load_data(config, seed)?;
    let panel = build_panel(&data)?;
    println!("source: {}", data.description);
    println!(
        "bars: {}, trend series: {}",
        data.bars.len(),
        data.trends.len()
    );
    println!(
        "panel: {} days from {} to {}, {} trend columns, {} clamped volatility estimates",
        panel.len(),
        panel.dates.first().map(|d| d.to_string()).unwrap_or_default(),
        panel.dates.last().map(|d| d.to_string()).unwrap_or_default(),
        panel.trends.len(),
        panel.gk_clamped
    );
    Ok(())
}

fn cmd_gk(config: &ExperimentConfig, seed: u64, out: &Path) -> CliResult<()> {
    let data = load_data(config, seed)?;
    let panel = build_panel(&data)?;
    write_file(out, "gk.csv", &csvio::write_gk_csv(&panel))
}

fn cmd_mi_grid(config: &ExperimentConfig, seed: u64, out: &Path) -> CliResult<()> {
    let data = load_data(config, seed)?;
    let panel = build_panel(&data)?;
    let [d_lo, d_hi] = config.scheme.delta_t_range;
    let [k_lo, k_hi] = config.scheme.k_range;
    let surface =
        volcast_core::infometrics::grid_search(&panel, d_lo..=d_hi, k_lo..=k_hi, config.mi.n_bins)
            .map_err(|e| CliError::from_core("scheme grid search", e))?;
    let scored = surface.entries.iter().filter(|e| e.mi.is_some()).count();
    println!(
        "scored {scored} of {} schemes; best dt={} k={}",
        surface.entries.len(),
        surface.best.delta_t,
        surface.best.k
    );
    write_file(out, "mi-surface.csv", &csvio::write_mi_surface_csv(&surface))
}

fn cmd_train(config: &ExperimentConfig, seed: u64, out: &Path) -> CliResult<()> {
    let data = load_data(config, seed)?;
    let panel = build_panel(&data)?;
    let (scheme, _) = resolve_scheme(config, &panel)?;
    let dataset = build_scheme_dataset(&panel, scheme)
        .map_err(|e| CliError::from_core("dataset", e))?;
    let train_config = config.train.with_seed(seed ^ TRAIN_SEED_SALT);
    let model =
        train(&dataset, &train_config).map_err(|e| CliError::from_core("train", e))?;
    println!(
        "trained on {} rows at dt={} k={} for {} epochs",
        dataset.len(),
        scheme.delta_t,
        scheme.k,
        train_config.epochs
    );
    if let Some(last) = model.history.last() {
        println!(
            "final train mape {}, test mape {}",
            last.train_mape, last.test_mape
        );
    }
    let model_json = serialize_model(&model).map_err(|e| CliError::from_core("model encode", e))?;
    write_file(out, "model.json", &model_json)?;
    write_file(out, "history.csv", &csvio::write_history_csv(&model.history))?;
    Ok(())
}

fn cmd_fit_garch(config: &ExperimentConfig, seed: u64, out: &Path) -> CliResult<()> {
    let data = load_data(config, seed)?;
    let panel = build_panel(&data)?;
    let fit = fit_garch(&panel.returns).map_err(|e| CliError::from_core("garch fit", e))?;
    println!(
        "fitted {} daily returns: omega={} alpha={} beta={} loglik={} converged={}",
        panel.returns.len(),
        fit.params.omega,
        fit.params.alpha,
        fit.params.beta,
        fit.log_likelihood,
        fit.converged
    );
    let mut text = serde_json::to_string_pretty(&fit)
        .map_err(|e| CliError::Data(format!("garch encode: {e}")))?;
    text.push('\n');
    write_file(out, "garch.json", &text)
}

fn cmd_run(config: &ExperimentConfig, cli_seed: Option<u64>, out: &Path) -> CliResult<()> {
    let output = experiment::run_experiment(config, cli_seed)?;
    print_report(&output.report);
    write_file(out, "report.json", &output.report_json)?;
    write_file(out, "predictions.csv", &output.predictions_csv)?;
    write_file(out, "history.csv", &output.history_csv)?;
    if let Some(surface_csv) = &output.mi_surface_csv {
        write_file(out, "mi-surface.csv", surface_csv)?;
    }
    Ok(())
}

fn cmd_report(out: &Path) -> CliResult<()> {
    let path = out.join("report.json");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Data(format!("reading {}: {e}", path.display())))?;
    let report = experiment::parse_report_json(&text)?;
    print_report(&report);
    Ok(())
}

fn print_report(report: &ExperimentReport) {
    println!("seed: {}", report.seed);
    println!("data: {}", report.data_source);
    println!(
        "panel: {} days ({} to {}), {} trend columns, {} clamped volatility estimates",
        report.panel.days,
        report.panel.first_date,
        report.panel.last_date,
        report.panel.trend_columns,
        report.panel.clamped_volatility_estimates
    );
    if let Some(stationarity) = &report.stationarity {
        let rejecting = stationarity.iter().filter(|s| s.reject_unit_root_5pct).count();
        println!(
            "stationarity: {rejecting}/{} columns reject a unit root at 5%",
            stationarity.len()
        );
    }
    match report.scheme.mi_score {
        Some(score) => println!(
            "scheme: dt={} k={} ({}), mi score {score}",
            report.scheme.delta_t, report.scheme.k, report.scheme.source
        ),
        None => println!(
            "scheme: dt={} k={} ({})",
            report.scheme.delta_t, report.scheme.k, report.scheme.source
        ),
    }
    println!(
        "dataset: {} rows ({} train, {} test), {} feature columns, {} degenerate rows",
        report.dataset.rows,
        report.dataset.train_rows,
        report.dataset.test_rows,
        report.dataset.feature_columns,
        report.dataset.degenerate_rows
    );
    println!(
        "garch: omega={} alpha={} beta={} loglik={} converged={} ({} iterations, {} periods)",
        report.garch.omega,
        report.garch.alpha,
        report.garch.beta,
        report.garch.log_likelihood,
        report.garch.converged,
        report.garch.iterations,
        report.garch.fitted_on
    );
    match (report.training.final_train_mape, report.training.final_test_mape) {
        (Some(train_mape), Some(test_mape)) => println!(
            "lstm: {} epochs, hidden {}, lag {}, final train mape {train_mape}, test mape {test_mape}",
            report.training.epochs, report.training.hidden_dim, report.training.lag
        ),
        _ => println!(
            "lstm: {} epochs, hidden {}, lag {}",
            report.training.epochs, report.training.hidden_dim, report.training.lag
        ),
    }
    for m in &report.metrics {
        println!(
            "metrics {}: mse {} mape {} over {} test rows",
            m.model_name, m.mse, m.mape, m.n_test
        );
    }
}
