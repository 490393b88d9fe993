//! Core algorithms for range-based volatility forecasting.
//!
//! The crate covers the full modelling chain: Garman-Klass volatility from
//! OHLC bars ([`marketdata`]), multi-day aggregation and rolling
//! normalization ([`preprocess`]), histogram mutual information for picking
//! an aggregation/window scheme ([`infometrics`]), a from-scratch LSTM
//! trained with MAPE loss ([`lstm`]), and a GARCH(1,1) benchmark
//! ([`garch`]). Everything is `no_std`-compatible (with `alloc`); file
//! formats and the command-line front end live in the companion `volcast`
//! crate.
//!
//! All randomized routines take explicit seeds and run single-threaded in a
//! fixed order, so results are bit-for-bit reproducible across runs.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod date;
pub mod error;
pub mod garch;
pub mod infometrics;
pub mod linalg;
pub mod lstm;
pub mod marketdata;
pub mod metrics;
pub mod optim;
pub mod preprocess;
pub mod rng;

pub use date::Date;
pub use error::{Error, Result};
