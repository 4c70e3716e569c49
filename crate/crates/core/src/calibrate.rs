// SPDX-License-Identifier: MIT OR Apache-2.0

//! Normalization constants, limit distributions, and long-run variance.
//!
//! The fully weighted statistic needs the Darling–Erdős constants
//! `a_n = √(2 log log n)` and
//! `b_n = 2 log log n + ½ log log log n − ½ log π`, and is calibrated against
//! the two-sided Gumbel law `P(G₂ ≤ x) = exp(−2 e^{−x})`. The unweighted
//! statistic is calibrated against the Kolmogorov–Smirnov law, the supremum
//! of a Brownian bridge. Under short-range dependence both need the long-run
//! variance `σ² = Σ_k Cov(h₁(X_1), h₁(X_k))`, estimated here by a
//! Bartlett-windowed HAC sum of sample autocovariances.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Smallest `n` for which the normalization constants are served; below this
/// `log log log n` is undefined or the constants are not monotone.
pub const MIN_N_NORM: usize = 16;

/// Result of long-run variance estimation never goes below this.
pub const SIGMA2_FLOOR: f64 = 1e-12;

/// `a_n = √(2 log log n)` and `b_n = 2 log log n + ½ log log log n − ½ log π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormConstants {
    pub a_n: f64,
    pub b_n: f64,
}

impl NormConstants {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_N_NORM {
            return Err(Error::OutOfRange {
                name: "n",
                value: n as f64,
                expected: "n >= 16 for the normalization constants",
            });
        }
        let loglog = (n as f64).ln().ln();
        Ok(NormConstants {
            a_n: (2.0 * loglog).sqrt(),
            b_n: 2.0 * loglog + 0.5 * loglog.ln() - 0.5 * std::f64::consts::PI.ln(),
        })
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            expected: "0 < p < 1",
        });
    }
    Ok(())
}

/// `P(G₂ ≤ x) = exp(−2 e^{−x})`, the limit of the fully weighted statistic.
pub fn gumbel2_cdf(x: f64) -> f64 {
    (-2.0 * (-x).exp()).exp()
}

/// Inverse of [`gumbel2_cdf`]: `−log(−log(p)/2)`.
pub fn gumbel2_quantile(p: f64) -> Result<f64> {
    check_probability(p)?;
    Ok(-(-p.ln() / 2.0).ln())
}

/// `P(G ≤ x) = exp(−e^{−x})`, the one-sided Gumbel law of the
/// Darling–Erdős maximum.
pub fn gumbel1_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

/// Inverse of [`gumbel1_cdf`]: `−log(−log p)`.
pub fn gumbel1_quantile(p: f64) -> Result<f64> {
    check_probability(p)?;
    Ok(-(-p.ln()).ln())
}

/// Kolmogorov–Smirnov distribution function
/// `1 − 2 Σ_{k≥1} (−1)^{k+1} exp(−2k²x²)` for `x > 0`.
///
/// The alternating series is truncated once terms fall below 1e−12.
pub fn ks_cdf(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::OutOfRange {
            name: "x",
            value: x,
            expected: "x > 0",
        });
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=1000 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += sign * term;
        if term < 1e-12 {
            break;
        }
        sign = -sign;
    }
    Ok((1.0 - 2.0 * sum).clamp(0.0, 1.0))
}

/// Inverse of [`ks_cdf`] by bisection to 1e−8.
pub fn ks_quantile(p: f64) -> Result<f64> {
    check_probability(p)?;
    let mut lo = 1e-8;
    let mut hi = 8.0;
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        if ks_cdf(mid)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Lag-weight window for the HAC estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrvWindow {
    /// `w(ℓ) = 1 − ℓ/(bandwidth+1)`; guarantees a nonnegative estimate.
    Bartlett,
    /// `w(ℓ) = 1`; can go negative, in which case the result is floored.
    Truncated,
}

/// Lag truncation point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// `⌊n^{1/3}⌋`, the standard consistent choice under short-range dependence.
    Auto,
    Fixed(usize),
}

/// Configuration for [`long_run_variance`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrvConfig {
    pub bandwidth: Bandwidth,
    pub window: LrvWindow,
}

impl Default for LrvConfig {
    fn default() -> Self {
        LrvConfig {
            bandwidth: Bandwidth::Auto,
            window: LrvWindow::Bartlett,
        }
    }
}

/// `⌊n^{1/3}⌋`, clamped to at least 0 and at most `n − 1`.
pub fn auto_bandwidth(n: usize) -> usize {
    ((n as f64).cbrt().floor() as usize).min(n.saturating_sub(1))
}

/// A long-run variance estimate, with a flag when flooring was applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrvEstimate {
    pub sigma2: f64,
    /// True when the raw estimate fell below [`SIGMA2_FLOOR`] and was clamped.
    pub floored: bool,
}

/// HAC estimate `σ̂² = γ̂₀ + 2 Σ_{ℓ=1}^{B} w(ℓ) γ̂_ℓ` of the long-run variance.
///
/// Autocovariances are mean-centered with divisor `n`. Bandwidth 0 gives the
/// plain sample variance.
pub fn long_run_variance(values: &[f64], config: &LrvConfig) -> Result<LrvEstimate> {
    crate::validate_series("long_run_variance", values, 2)?;
    let n = values.len();
    let bandwidth = match config.bandwidth {
        Bandwidth::Auto => auto_bandwidth(n),
        Bandwidth::Fixed(b) => {
            if b >= n {
                return Err(Error::OutOfRange {
                    name: "bandwidth",
                    value: b as f64,
                    expected: "bandwidth < series length",
                });
            }
            b
        }
    };
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let autocov = |lag: usize| -> f64 {
        let mut acc = 0.0;
        for t in lag..n {
            acc += centered[t] * centered[t - lag];
        }
        acc / nf
    };
    let mut sigma2 = autocov(0);
    for lag in 1..=bandwidth {
        let w = match config.window {
            LrvWindow::Bartlett => 1.0 - lag as f64 / (bandwidth as f64 + 1.0),
            LrvWindow::Truncated => 1.0,
        };
        sigma2 += 2.0 * w * autocov(lag);
    }
    if sigma2 < SIGMA2_FLOOR {
        Ok(LrvEstimate {
            sigma2: SIGMA2_FLOOR,
            floored: true,
        })
    } else {
        Ok(LrvEstimate {
            sigma2,
            floored: false,
        })
    }
}
