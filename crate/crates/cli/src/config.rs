//! TOML experiment configuration.
//!
//! Either a `[data]` section pointing at CSV files or a `[synth]`
//! section describing generated data (neither means synthetic defaults;
//! both is an error). The top-level `seed` drives every random stream in
//! the experiment; the `--seed` flag overrides it.

use serde::{Deserialize, Serialize};

use volcast_core::lstm::TrainConfig;
use volcast_core::preprocess::Scheme;

use crate::error::{CliError, CliResult};
use crate::synth::SynthConfig;

pub const DEFAULT_SEED: u64 = 7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub data: Option<DataSection>,
    pub synth: Option<SynthSection>,
    pub scheme: SchemeSection,
    pub train: TrainSection,
    pub mi: MiSection,
    pub adf: AdfSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub ohlc: String,
    pub trends: String,
}

/// Generator settings minus the seed, which comes from the experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSection {
    pub n_days: usize,
    pub n_trends: usize,
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub trend_coupling: f64,
}

impl Default for SynthSection {
    fn default() -> Self {
        let c = SynthConfig::default();
        SynthSection {
            n_days: c.n_days,
            n_trends: c.n_trends,
            omega: c.omega,
            alpha: c.alpha,
            beta: c.beta,
            trend_coupling: c.trend_coupling,
        }
    }
}

impl SynthSection {
    pub fn with_seed(&self, seed: u64) -> SynthConfig {
        SynthConfig {
            n_days: self.n_days,
            n_trends: self.n_trends,
            omega: self.omega,
            alpha: self.alpha,
            beta: self.beta,
            trend_coupling: self.trend_coupling,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeMode {
    Fixed,
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeSection {
    pub mode: SchemeMode,
    pub delta_t: usize,
    pub k: usize,
    /// Inclusive grid bounds, used when mode = "auto".
    pub delta_t_range: [usize; 2],
    pub k_range: [usize; 2],
}

impl Default for SchemeSection {
    fn default() -> Self {
        SchemeSection {
            mode: SchemeMode::Fixed,
            delta_t: 5,
            k: 5,
            delta_t_range: [1, 10],
            k_range: [2, 20],
        }
    }
}

impl SchemeSection {
    pub fn fixed_scheme(&self) -> CliResult<Scheme> {
        Scheme::new(self.delta_t, self.k).map_err(|e| CliError::from_core("scheme config", e))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub lag: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub mape_epsilon: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let c = TrainConfig::default();
        TrainSection {
            lag: c.lag,
            batch_size: c.batch_size,
            epochs: c.epochs,
            hidden_dim: c.hidden_dim,
            learning_rate: c.learning_rate,
            mape_epsilon: c.mape_epsilon,
        }
    }
}

impl TrainSection {
    pub fn with_seed(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            lag: self.lag,
            batch_size: self.batch_size,
            epochs: self.epochs,
            hidden_dim: self.hidden_dim,
            learning_rate: self.learning_rate,
            mape_epsilon: self.mape_epsilon,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MiSection {
    pub n_bins: usize,
}

impl Default for MiSection {
    fn default() -> Self {
        MiSection { n_bins: volcast_core::infometrics::DEFAULT_N_BINS }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdfSection {
    pub enabled: bool,
    pub lags: usize,
}

impl Default for AdfSection {
    fn default() -> Self {
        AdfSection { enabled: true, lags: 5 }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::Config(format!("config parse: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.data.is_some() && self.synth.is_some() {
            return Err(CliError::Config(
                "config has both [data] and [synth]; pick one".into(),
            ));
        }
        if self.scheme.delta_t_range[0] > self.scheme.delta_t_range[1]
            || self.scheme.k_range[0] > self.scheme.k_range[1]
        {
            return Err(CliError::Config("scheme grid range is inverted".into()));
        }
        // Surface bad section values before any heavy work. The seed
        // value itself does not matter for validation.
        self.synth
            .clone()
            .unwrap_or_default()
            .with_seed(DEFAULT_SEED)
            .validate()?;
        self.train
            .with_seed(DEFAULT_SEED)
            .validate()
            .map_err(|e| CliError::from_core("train config", e))?;
        if self.scheme.mode == SchemeMode::Fixed {
            self.scheme.fixed_scheme()?;
        }
        if self.mi.n_bins < 1 {
            return Err(CliError::Config("mi n_bins must be at least 1".into()));
        }
        Ok(())
    }

    /// The experiment seed: `--seed` beats the config, which beats the
    /// default.
    pub fn effective_seed(&self, cli_seed: Option<u64>) -> u64 {
        cli_seed.or(self.seed).unwrap_or(DEFAULT_SEED)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_synthetic_defaults() {
        let c = ExperimentConfig::parse("").unwrap();
        assert!(c.data.is_none() && c.synth.is_none());
        assert_eq!(c.effective_seed(None), 7);
        assert_eq!(c.effective_seed(Some(11)), 11);
        assert_eq!(c.scheme.mode, SchemeMode::Fixed);
        assert_eq!((c.scheme.delta_t, c.scheme.k), (5, 5));
        assert_eq!(c.train.lag, 50);
        assert_eq!(c.mi.n_bins, 100);
        assert!(c.adf.enabled);
    }

    #[test]
    fn full_config_round_trip() {
        let text = r#"
seed = 42

[synth]
n_days = 600
n_trends = 4
trend_coupling = 0.5

[scheme]
mode = "auto"
delta_t_range = [1, 4]
k_range = [2, 8]

[train]
lag = 10
epochs = 5

[mi]
n_bins = 30

[adf]
enabled = false
"#;
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.seed, Some(42));
        let synth = c.synth.as_ref().unwrap();
        assert_eq!(synth.n_days, 600);
        assert_eq!(synth.omega, 4e-6, "unset fields keep defaults");
        assert_eq!(c.scheme.mode, SchemeMode::Auto);
        assert_eq!(c.scheme.delta_t_range, [1, 4]);
        assert_eq!(c.train.epochs, 5);
        assert_eq!(c.train.batch_size, 5);
        assert!(!c.adf.enabled);
    }

    #[test]
    fn rejects_unknown_fields() {
        let err = ExperimentConfig::parse("velocity = 9\n").unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
        let err = ExperimentConfig::parse("[train]\nmomentum = 0.9\n").unwrap_err();
        assert!(format!("{err}").contains("momentum"));
    }

    #[test]
    fn rejects_data_and_synth_together() {
        let text = "[data]\nohlc = \"a.csv\"\ntrends = \"b.csv\"\n\n[synth]\nn_days = 300\n";
        let err = ExperimentConfig::parse(text).unwrap_err();
        assert!(format!("{err}").contains("pick one"));
    }

    #[test]
    fn rejects_bad_section_values() {
        assert!(ExperimentConfig::parse("[synth]\nn_days = 10\n").is_err());
        assert!(ExperimentConfig::parse("[train]\nlearning_rate = 0.0\n").is_err());
        assert!(ExperimentConfig::parse("[scheme]\ndelta_t_range = [5, 2]\n").is_err());
        assert!(ExperimentConfig::parse("[scheme]\nk = 1\n").is_err());
        assert!(ExperimentConfig::parse("[mi]\nn_bins = 0\n").is_err());
    }

    #[test]
    fn data_section_paths() {
        let text = "[data]\nohlc = \"prices.csv\"\ntrends = \"volumes.csv\"\n";
        let c = ExperimentConfig::parse(text).unwrap();
        let d = c.data.unwrap();
        assert_eq!(d.ohlc, "prices.csv");
        assert_eq!(d.trends, "volumes.csv");
    }
}
