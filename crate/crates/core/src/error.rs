//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

use crate::date::Date;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter or argument is malformed or out of contract.
    InvalidInput(String),
    /// A series is shorter than the operation requires.
    SeriesTooShort { needed: usize, got: usize },
    /// Two series that must share a length do not.
    LengthMismatch { left: usize, right: usize },
    /// An input series has no elements.
    EmptySeries,
    /// OHLC prices violate `0 < low <= open, close <= high` or are non-finite.
    InvalidBar { date: Date, reason: String },
    /// Dates must be strictly increasing.
    NonMonotonicDates { date: Date },
    DuplicateDate { date: Date },
    /// A trend series has no observations on or before the last trading date.
    NoOverlap { keyword: String },
    /// A value falls outside the expected interval.
    OutOfRange { value: f64, min: f64, max: f64 },
    /// A linear system has no usable solution.
    SingularMatrix,
    /// A computation produced NaN or infinity; the payload says where.
    NonFinite(String),
    /// Model parameters violate their constraints.
    InvalidParams(String),
    /// Every candidate scheme in a grid search was skipped.
    AllSchemesSkipped,
    /// An iterative routine failed to reach a usable optimum.
    NoConvergence(String),
    /// A serialized model failed validation on load.
    ModelFormat(String),
    /// Shapes of model and data disagree.
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::SeriesTooShort { needed, got } => {
                write!(f, "series too short: need at least {needed} points, got {got}")
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::EmptySeries => write!(f, "empty series"),
            Error::InvalidBar { date, reason } => write!(f, "invalid bar on {date}: {reason}"),
            Error::NonMonotonicDates { date } => {
                write!(f, "dates not strictly increasing at {date}")
            }
            Error::DuplicateDate { date } => write!(f, "duplicate date {date}"),
            Error::NoOverlap { keyword } => {
                write!(f, "trend series {keyword:?} has no overlap with the trading dates")
            }
            Error::OutOfRange { value, min, max } => {
                write!(f, "value {value} outside [{min}, {max}]")
            }
            Error::SingularMatrix => write!(f, "singular or ill-conditioned linear system"),
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            Error::AllSchemesSkipped => {
                write!(f, "every candidate scheme was skipped (too few rows)")
            }
            Error::NoConvergence(msg) => write!(f, "failed to converge: {msg}"),
            Error::ModelFormat(msg) => write!(f, "model format error: {msg}"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
        }
    }
}

impl core::error::Error for Error {}
