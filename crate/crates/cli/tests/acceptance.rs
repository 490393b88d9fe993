//! Acceptance gate: one budgeted, seeded check per shipped guarantee.
//!
//! Every test prints a single `acceptance <name>: PASS|FAIL (...)` line
//! before asserting, so a full run reads as a checklist. Budgets are wall
//! clock for the whole criterion; seeds are fixed, so a passing suite is
//! reproducible bit for bit.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use volcast::config::ExperimentConfig;
use volcast::experiment::run_experiment;
use volcast::synth::{synth_generate, SynthConfig};

use volcast_core::date::Date;
use volcast_core::garch::{fit_garch, garch_filter, simulate_garch, GarchParams};
use volcast_core::infometrics::{empirical_mi, grid_search};
use volcast_core::lstm::{bptt, mape_loss, sequence_forward, train, LstmParams, TrainConfig};
use volcast_core::marketdata::{align, gk_volatility, AlignedPanel, OhlcBar, TrendSeries};
use volcast_core::preprocess::{adf_test, build_scheme_dataset, Scheme};
use volcast_core::rng::SeedRng;

fn verdict(name: &str, ok: bool, detail: &str) {
    let word = if ok { "PASS" } else { "FAIL" };
    println!("acceptance {name}: {word} ({detail})");
    assert!(ok, "acceptance {name}: {word} ({detail})");
}

fn within_budget(elapsed: Duration, budget: Duration) -> bool {
    elapsed <= budget
}

// ---------------------------------------------------------------------
// Gradients: analytic backpropagation against central finite differences.

fn batch_loss(windows: &[&[Vec<f64>]], targets: &[f64], params: &LstmParams, eps: f64) -> f64 {
    let preds: Vec<f64> =
        windows.iter().map(|w| sequence_forward(w, params).unwrap().0).collect();
    mape_loss(&preds, targets, eps).unwrap()
}

#[test]
fn gradient_check_matches_finite_differences() {
    let start = Instant::now();
    let (input_dim, hidden_dim, lag, batch) = (3, 4, 6, 4);
    let eps = 1e-8;
    let step = 1e-5;
    let mut worst_ratio = 0.0f64;
    let mut coords = 0usize;

    for seed in 0..20u64 {
        let mut rng = SeedRng::new(seed);
        let params = LstmParams::seeded_init(input_dim, hidden_dim, &mut rng);
        let windows: Vec<Vec<Vec<f64>>> = (0..batch)
            .map(|_| {
                (0..lag)
                    .map(|_| (0..input_dim).map(|_| rng.standard_normal()).collect())
                    .collect()
            })
            .collect();
        let window_refs: Vec<&[Vec<f64>]> = windows.iter().map(|w| w.as_slice()).collect();
        // Targets offset from the model's own outputs keep every probe
        // point away from the loss kink at pred == target, where a
        // central difference is meaningless.
        let targets: Vec<f64> = window_refs
            .iter()
            .map(|w| {
                let pred = sequence_forward(w, &params).unwrap().0;
                let offset = 0.5 + rng.uniform();
                if rng.uniform() < 0.5 {
                    pred + offset
                } else {
                    pred - offset
                }
            })
            .collect();

        let analytic = bptt(&window_refs, &targets, &params, eps).unwrap();
        let mut probe = params.clone();
        for tensor_idx in 0..10 {
            let len = probe.tensors()[tensor_idx].1.len();
            for coord in 0..len {
                let orig = probe.tensors()[tensor_idx].1[coord];
                probe.tensors_mut()[tensor_idx].1[coord] = orig + step;
                let up = batch_loss(&window_refs, &targets, &probe, eps);
                probe.tensors_mut()[tensor_idx].1[coord] = orig - step;
                let down = batch_loss(&window_refs, &targets, &probe, eps);
                probe.tensors_mut()[tensor_idx].1[coord] = orig;
                let numeric = (up - down) / (2.0 * step);
                let exact = analytic.tensors()[tensor_idx].1[coord];
                let err = (exact - numeric).abs();
                let tol = 1e-9 + 1e-5 * exact.abs().max(numeric.abs());
                worst_ratio = worst_ratio.max(err / tol);
                coords += 1;
            }
        }
    }

    let elapsed = start.elapsed();
    let ok = worst_ratio <= 1.0 && within_budget(elapsed, Duration::from_secs(30));
    verdict(
        "gradient-check",
        ok,
        &format!(
            "20 seeds, {coords} coordinates, worst err/tol {worst_ratio:.3}, {:.2?}",
            elapsed
        ),
    );
}

// ---------------------------------------------------------------------
// Range estimator: scale invariance and calibration on constant-variance
// simulated days.

#[test]
fn range_estimator_scale_invariant_and_calibrated() {
    let start = Instant::now();

    let mut rng = SeedRng::new(11);
    let mut worst_scale_diff = 0.0f64;
    for i in 0..200 {
        let date = Date::new(2001, 1 + (i / 28) as u8 % 12, 1 + (i % 28) as u8).unwrap();
        let open = 50.0 * (0.02 * rng.standard_normal()).exp();
        let close = open * (0.02 * rng.standard_normal()).exp();
        let high = open.max(close) * (0.02 * rng.standard_normal().abs()).exp();
        let low = open.min(close) * (-0.02 * rng.standard_normal().abs()).exp();
        let bar = OhlcBar::new(date, open, high, low, close).unwrap();
        let scaled =
            OhlcBar::new(date, open * 1e4, high * 1e4, low * 1e4, close * 1e4).unwrap();
        worst_scale_diff =
            worst_scale_diff.max((gk_volatility(&bar) - gk_volatility(&scaled)).abs());
    }
    let scale_ok = worst_scale_diff < 1e-12;

    // Constant variance: a degenerate recursion (alpha = beta = 0) pins
    // the daily variance at omega, so the estimator mean must match it.
    let true_var = 1e-4;
    let config = SynthConfig {
        n_days: 10_000,
        n_trends: 1,
        omega: true_var,
        alpha: 0.0,
        beta: 0.0,
        trend_coupling: 0.0,
        seed: 7,
    };
    let data = synth_generate(&config).unwrap();
    let mean_gk =
        data.bars.iter().map(gk_volatility).sum::<f64>() / data.bars.len() as f64;
    let rel_err = (mean_gk - true_var).abs() / true_var;
    let calib_ok = rel_err < 0.10;

    let elapsed = start.elapsed();
    let ok = scale_ok && calib_ok && within_budget(elapsed, Duration::from_secs(10));
    verdict(
        "gk-estimator",
        ok,
        &format!(
            "scale diff {worst_scale_diff:.2e}, mean over 10^4 days off by {:.2}% of true variance, {:.2?}",
            100.0 * rel_err,
            elapsed
        ),
    );
}

// ---------------------------------------------------------------------
// Information scores: estimator properties plus scheme recovery on a
// generator with a planted three-day structure.

/// Panel whose single trend column is constant over three-day blocks and
/// drives the next block's daily variance; bars are shaped so the range
/// estimator returns that variance exactly. Aggregating at three days
/// lines periods up with blocks, so the trend-to-target score peaks
/// there and decays at any other alignment.
fn planted_panel(n_days: usize, seed: u64) -> AlignedPanel {
    let mut rng = SeedRng::new(seed);
    let n_blocks = n_days / 3 + 2;
    let z: Vec<f64> = (0..n_blocks).map(|_| rng.uniform()).collect();

    let date_at = |i: usize| {
        Date::new(
            2000 + (i / 336) as u16,
            1 + ((i / 28) % 12) as u8,
            1 + (i % 28) as u8,
        )
        .unwrap()
    };

    let mut bars = Vec::with_capacity(n_days + 1);
    let mut close = 100.0f64;
    bars.push(OhlcBar::new(date_at(0), close, close, close, close).unwrap());
    let mut observations = Vec::with_capacity(n_days);
    for day in 0..n_days {
        let block = day / 3;
        let driver = if block == 0 { 0.5 } else { z[block - 1] };
        let h = 1e-4 * (3.0 * driver).exp() * (0.45 * rng.standard_normal()).exp();
        let c = 3e-4 * rng.standard_normal();
        let open = close;
        close = open * c.exp();
        // With high = open e^(x+|c|) and low = open e^-(x+|c|) the
        // estimator evaluates to 2.006 (x+|c|)^2 - 0.383 c^2; invert it
        // so the daily value equals h exactly.
        let x = (((h + 0.383 * c * c) / 2.006).sqrt() - c.abs()).max(0.0);
        let spread = (x + c.abs()).exp();
        let date = date_at(day + 1);
        bars.push(OhlcBar::new(date, open, open * spread, open / spread, close).unwrap());
        observations.push((date, z[block]));
    }
    let trends = vec![TrendSeries { keyword: "planted".to_string(), observations }];
    align(&bars, &trends).unwrap()
}

#[test]
fn information_scores_properties_and_scheme_recovery() {
    let start = Instant::now();

    // Non-negativity and symmetry on random pairs.
    let mut rng = SeedRng::new(5);
    let mut worst_asym = 0.0f64;
    let mut min_score = f64::INFINITY;
    for _ in 0..1000 {
        let x: Vec<f64> = (0..200).map(|_| rng.standard_normal()).collect();
        let y: Vec<f64> = (0..200).map(|_| rng.standard_normal()).collect();
        let xy = empirical_mi(&x, &y, 10).unwrap();
        let yx = empirical_mi(&y, &x, 10).unwrap();
        worst_asym = worst_asym.max((xy - yx).abs());
        min_score = min_score.min(xy);
    }
    let pairs_ok = min_score >= 0.0 && worst_asym < 1e-12;

    // A bijection of distinct values at one bin per value scores ln T.
    let t = 64usize;
    let x: Vec<f64> = (0..t).map(|i| i as f64).collect();
    let mut perm: Vec<usize> = (0..t).collect();
    for i in (1..t).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        perm.swap(i, j);
    }
    let y: Vec<f64> = perm.iter().map(|&p| p as f64).collect();
    let ln_t = (t as f64).ln();
    let identity_err = (empirical_mi(&x, &y, t).unwrap() - ln_t).abs();
    let identity_ok = identity_err < 1e-9;

    // Independent uniforms at the default bin count stay near zero.
    let mut ux = Vec::with_capacity(100_000);
    let mut uy = Vec::with_capacity(100_000);
    for _ in 0..100_000 {
        ux.push(rng.uniform());
        uy.push(rng.uniform());
    }
    let indep = empirical_mi(&ux, &uy, 100).unwrap();
    let indep_ok = indep < 0.1;

    // Planted-alignment recovery over the full grid search.
    let panel = planted_panel(3000, 4242);
    let surface = grid_search(&panel, 1..=5, 2..=4, 20).unwrap();
    let mut best_per_dt: BTreeMap<usize, f64> = BTreeMap::new();
    for entry in &surface.entries {
        if let Some(score) = entry.mi {
            let slot = best_per_dt.entry(entry.scheme.delta_t).or_insert(f64::MIN);
            *slot = slot.max(score);
        }
    }
    let planted_ok = surface.best.delta_t == 3;
    let surface_detail: Vec<String> =
        best_per_dt.iter().map(|(dt, s)| format!("dt{dt}={s:.2}")).collect();

    let elapsed = start.elapsed();
    let ok = pairs_ok
        && identity_ok
        && indep_ok
        && planted_ok
        && within_budget(elapsed, Duration::from_secs(60));
    verdict(
        "mi-suite",
        ok,
        &format!(
            "1000 pairs min {min_score:.3} asym {worst_asym:.1e}; identity err {identity_err:.1e}; independent uniforms {indep:.4}; grid best dt={} k={} [{}]; {:.2?}",
            surface.best.delta_t,
            surface.best.k,
            surface_detail.join(" "),
            elapsed
        ),
    );
}

// ---------------------------------------------------------------------
// Variance benchmark: parameter recovery on simulated paths.

#[test]
fn variance_benchmark_recovers_simulated_parameters() {
    let start = Instant::now();
    // The classic benchmark process: variance persistence 0.85, news
    // impact 0.10, unconditional variance 1. In this crate's recursion
    // h2[t] = omega + alpha h2[t-1] + beta r[t-1]^2 the persistence role
    // is alpha and the news role is beta.
    let truth = GarchParams::new(0.05, 0.85, 0.10).unwrap();
    let mut recovered = 0;
    let mut details = Vec::new();
    // Frozen ensemble. The news band is about 1.2 standard errors wide
    // at this length, so roughly one seed in four lands outside it; this
    // block demonstrates the typical case rather than a lucky extreme.
    for seed in 10..20u64 {
        let returns = simulate_garch(&truth, 2000, seed).unwrap();
        let fit = fit_garch(&returns).unwrap();
        let rel_persistence = (fit.params.alpha - truth.alpha).abs() / truth.alpha;
        let rel_news = (fit.params.beta - truth.beta).abs() / truth.beta;
        if rel_persistence <= 0.20 && rel_news <= 0.20 {
            recovered += 1;
        } else {
            details.push(format!(
                "seed {seed}: persistence off {:.0}%, news off {:.0}%",
                100.0 * rel_persistence,
                100.0 * rel_news
            ));
        }
    }
    let elapsed = start.elapsed();
    let ok = recovered >= 8 && within_budget(elapsed, Duration::from_secs(60));
    let misses = if details.is_empty() { String::new() } else { format!("; {}", details.join(", ")) };
    verdict(
        "garch-recovery",
        ok,
        &format!(
            "{recovered}/10 seeds within 20% on persistence and news coefficients{misses}, {:.2?}",
            elapsed
        ),
    );
}

// ---------------------------------------------------------------------
// Unit root test: power on white noise, size on a random walk.

#[test]
fn unit_root_test_separates_noise_from_random_walk() {
    let start = Instant::now();
    let mut noise_rejects = 0;
    let mut walk_keeps = 0;
    for seed in 0..100u64 {
        let mut rng = SeedRng::new(seed);
        let noise: Vec<f64> = (0..2000).map(|_| rng.standard_normal()).collect();
        if adf_test("noise", &noise, 5).unwrap().reject_unit_root_5pct {
            noise_rejects += 1;
        }
        let mut level = 0.0;
        let walk: Vec<f64> = noise
            .iter()
            .map(|&e| {
                level += e;
                level
            })
            .collect();
        if !adf_test("walk", &walk, 5).unwrap().reject_unit_root_5pct {
            walk_keeps += 1;
        }
    }
    let elapsed = start.elapsed();
    let ok = noise_rejects >= 90 && walk_keeps >= 90 && within_budget(elapsed, Duration::from_secs(30));
    verdict(
        "adf-power",
        ok,
        &format!(
            "white noise rejected {noise_rejects}/100, random walk kept {walk_keeps}/100, {:.2?}",
            elapsed
        ),
    );
}

// ---------------------------------------------------------------------
// End to end: the default benchmark is deterministic, on budget, and the
// recurrent model beats the variance benchmark on test MSE.

#[test]
fn end_to_end_benchmark_beats_variance_baseline() {
    let config = ExperimentConfig::default();

    let t1 = Instant::now();
    let first = run_experiment(&config, None).unwrap();
    let d1 = t1.elapsed();
    let t2 = Instant::now();
    let second = run_experiment(&config, None).unwrap();
    let d2 = t2.elapsed();

    let report = &first.report;
    // Pin the benchmark identity so a drifted default cannot silently
    // green this criterion.
    let identity_ok = report.seed == 7
        && report.scheme.delta_t == 5
        && report.scheme.k == 5
        && report.training.lag == 50
        && report.training.epochs == 200
        && report.training.hidden_dim == 32;

    let deterministic = first.report_json == second.report_json
        && first.predictions_csv == second.predictions_csv
        && first.history_csv == second.history_csv;

    let lstm_mse = report.metrics.iter().find(|m| m.model_name == "lstm").unwrap().mse;
    let garch_mse = report.metrics.iter().find(|m| m.model_name == "garch").unwrap().mse;
    let beats = lstm_mse < garch_mse;

    let budget = Duration::from_secs(600);
    let ok = identity_ok
        && deterministic
        && beats
        && within_budget(d1, budget)
        && within_budget(d2, budget);
    verdict(
        "end-to-end",
        ok,
        &format!(
            "lstm mse {lstm_mse:.3e} vs garch mse {garch_mse:.3e}, identical reports across runs: {deterministic}, runs {:.1?} and {:.1?}",
            d1, d2
        ),
    );
}

// ---------------------------------------------------------------------
// CLI determinism: every command with a fixed seed writes byte-identical
// files across two consecutive runs.

const SMALL_CONFIG: &str = "\
[synth]
n_days = 420
n_trends = 2

[scheme]
mode = \"auto\"
delta_t_range = [1, 3]
k_range = [2, 4]

[train]
lag = 8
hidden_dim = 8
epochs = 6
batch_size = 4

[mi]
n_bins = 40
";

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_volcast"))
        .args(args)
        .output()
        .expect("spawn volcast")
}

fn tree_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        let name = entry.file_name().into_string().unwrap();
        out.insert(name, std::fs::read(entry.path()).unwrap());
    }
    out
}

#[test]
fn cli_commands_are_deterministic() {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let config_path = tmp.path().join("small.toml");
    std::fs::write(&config_path, SMALL_CONFIG).unwrap();
    let config = config_path.to_str().unwrap();

    let mut checked = Vec::new();
    for cmd in ["synth", "gk", "mi-grid", "train", "fit-garch", "run"] {
        let dir_a = tmp.path().join(format!("a-{cmd}"));
        let dir_b = tmp.path().join(format!("b-{cmd}"));
        for dir in [&dir_a, &dir_b] {
            let out = run_cli(&[
                cmd,
                "--config",
                config,
                "--seed",
                "123",
                "--out",
                dir.to_str().unwrap(),
            ]);
            assert!(
                out.status.success(),
                "{cmd} failed: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        }
        let a = tree_bytes(&dir_a);
        let b = tree_bytes(&dir_b);
        assert_eq!(
            a.keys().collect::<Vec<_>>(),
            b.keys().collect::<Vec<_>>(),
            "{cmd} wrote different file sets"
        );
        for (name, bytes) in &a {
            assert_eq!(Some(bytes), b.get(name).as_deref(), "{cmd}: {name} differs between runs");
        }
        checked.push(format!("{cmd}({})", a.len()));
    }

    // Print-only commands: identical bytes on stdout across runs.
    for (cmd, extra) in [("ingest-check", None), ("report", Some("a-run"))] {
        let mut args = vec![cmd, "--config", config, "--seed", "123"];
        let out_dir;
        if let Some(dir) = extra {
            out_dir = tmp.path().join(dir);
            args.push("--out");
            args.push(out_dir.to_str().unwrap());
        }
        let first = run_cli(&args);
        let second = run_cli(&args);
        assert!(first.status.success(), "{cmd} failed");
        assert_eq!(first.stdout, second.stdout, "{cmd} stdout differs between runs");
        checked.push(cmd.to_string());
    }

    let elapsed = start.elapsed();
    verdict(
        "cli-determinism",
        true,
        &format!("byte-identical: {}, {:.2?}", checked.join(" "), elapsed),
    );
}

// ---------------------------------------------------------------------
// Causality: replacing future values with NaN leaves past outputs
// bit-identical for preprocessing, prediction, and variance filtering.

fn poisoned_panel(panel: &AlignedPanel, cutoff: usize) -> AlignedPanel {
    let mut poisoned = panel.clone();
    for i in cutoff + 1..poisoned.len() {
        poisoned.returns[i] = f64::NAN;
        poisoned.volatility[i] = f64::NAN;
        for col in &mut poisoned.trends {
            col.values[i] = f64::NAN;
        }
    }
    poisoned
}

#[test]
fn poisoned_future_values_leave_past_outputs_unchanged() {
    let synth = SynthConfig {
        n_days: 301,
        n_trends: 2,
        trend_coupling: 0.8,
        seed: 3,
        ..SynthConfig::default()
    };
    let data = synth_generate(&synth).unwrap();
    let panel = align(&data.bars, &data.trends).unwrap();

    // Preprocessing: rows whose windows end before the poisoned days.
    let scheme = Scheme::new(2, 3).unwrap();
    let clean = build_scheme_dataset(&panel, scheme).unwrap();
    let day_cutoff = 200;
    let poisoned = build_scheme_dataset(&poisoned_panel(&panel, day_cutoff), scheme).unwrap();
    // Row t reaches through its target period, days up to
    // (t + k + 2) delta_t - 1 inclusive.
    let safe_rows = (0..clean.len())
        .take_while(|t| (t + scheme.k + 2) * scheme.delta_t <= day_cutoff + 1)
        .count();
    let mut pre_ok = safe_rows > 50;
    for t in 0..safe_rows {
        pre_ok &= clean.features[t]
            .iter()
            .zip(&poisoned.features[t])
            .all(|(a, b)| a.to_bits() == b.to_bits());
        pre_ok &= clean.target[t].to_bits() == poisoned.target[t].to_bits();
        pre_ok &= clean.raw_target[t].to_bits() == poisoned.raw_target[t].to_bits();
        pre_ok &= clean.norm_meta[t].mean.to_bits() == poisoned.norm_meta[t].mean.to_bits();
        pre_ok &= clean.norm_meta[t].std.to_bits() == poisoned.norm_meta[t].std.to_bits();
        pre_ok &= clean.degenerate_rows[t] == poisoned.degenerate_rows[t];
    }

    // Prediction: poison dataset rows after a cutoff; windows that end
    // on or before it produce bit-identical forward passes, and any
    // window touching poison is refused rather than silently used.
    let config = TrainConfig {
        lag: 6,
        batch_size: 4,
        epochs: 2,
        hidden_dim: 4,
        ..TrainConfig::default()
    };
    let model = train(&clean, &config).unwrap();
    let row_cutoff = 100;
    let mut poisoned_rows = clean.clone();
    for t in row_cutoff + 1..poisoned_rows.len() {
        for v in &mut poisoned_rows.features[t] {
            *v = f64::NAN;
        }
        poisoned_rows.target[t] = f64::NAN;
    }
    let mut predict_ok = true;
    for t in config.lag - 1..=row_cutoff {
        let clean_pred =
            sequence_forward(&clean.features[t + 1 - config.lag..=t], &model.params)
                .unwrap()
                .0;
        let poison_pred =
            sequence_forward(&poisoned_rows.features[t + 1 - config.lag..=t], &model.params)
                .unwrap()
                .0;
        predict_ok &= clean_pred.to_bits() == poison_pred.to_bits();
    }
    let refused = sequence_forward(
        &poisoned_rows.features[row_cutoff + 2 - config.lag..=row_cutoff + 1],
        &model.params,
    )
    .is_err();

    // Variance filter: h2[t] depends on returns before t only.
    let params = GarchParams::new(0.05, 0.10, 0.85).unwrap();
    let returns = simulate_garch(&params, 500, 21).unwrap();
    let mut poisoned_returns = returns.clone();
    let ret_cutoff = 300;
    for r in poisoned_returns.iter_mut().skip(ret_cutoff + 1) {
        *r = f64::NAN;
    }
    let clean_h2 = garch_filter(&returns, &params).unwrap();
    let poison_h2 = garch_filter(&poisoned_returns, &params).unwrap();
    let filter_ok = (0..=ret_cutoff + 1)
        .all(|t| clean_h2[t].to_bits() == poison_h2[t].to_bits());

    let ok = pre_ok && predict_ok && refused && filter_ok;
    verdict(
        "causality",
        ok,
        &format!(
            "preprocess {safe_rows} rows bit-equal: {pre_ok}; predictions bit-equal: {predict_ok}; poisoned window refused: {refused}; filter prefix bit-equal: {filter_ok}"
        ),
    );
}
