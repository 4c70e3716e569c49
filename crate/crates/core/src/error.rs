// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by every module in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The input series is shorter than the operation's minimum length.
    #[error("{op}: series too short, need n >= {min}, got n = {got}")]
    TooShort {
        op: &'static str,
        min: usize,
        got: usize,
    },
    /// A NaN or infinite observation was found in the input.
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    /// A scalar parameter lies outside its documented domain.
    #[error("{name} = {value} out of range, expected {expected}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    /// No limit law is available for the requested weight exponent.
    #[error("no asymptotic calibration for gamma = {gamma}: p-values require gamma = 0 or 0.5")]
    UncalibratedGamma { gamma: f64 },
    /// A configuration was rejected before any computation ran.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A combination of options this crate does not serve.
    #[error("unsupported: {0}")]
    Unsupported(String),
}
