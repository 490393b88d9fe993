//! Experiment harness around [`volcast_core`]: CSV ingest and output,
//! TOML experiment configuration, a synthetic data generator, and the
//! end-to-end pipeline that trains the recurrent forecaster against the
//! conditional-variance benchmark on identical data.
//!
//! Everything here is deterministic given the config and seed: outputs
//! carry no timestamps, maps are ordered, and all randomness flows from
//! seeded generators.

pub mod config;
pub mod csvio;
pub mod error;
pub mod experiment;
pub mod synth;

pub use error::{CliError, CliResult};
