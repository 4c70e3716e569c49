// SPDX-License-Identifier: MIT OR Apache-2.0

//! A single change-point test: U-process, weighting, normalization, decision.

use crate::calibrate::{
    gumbel2_cdf, gumbel2_quantile, ks_cdf, ks_quantile, long_run_variance, LrvConfig,
    NormConstants,
};
use crate::error::{Error, Result};
use crate::kernel::{h1_values, Kernel};
use crate::uprocess::UProcess;
use crate::validate_series;
use serde::{Deserialize, Serialize};

/// Minimum series length for [`run_test`]; asymptotic p-values at smaller `n`
/// are misleading.
pub const MIN_N_TEST: usize = 20;

/// Below this length the fully weighted test gets a convergence warning:
/// finite-sample critical values are still far from the Gumbel limit.
pub const SLOW_CONVERGENCE_N: usize = 800;

/// How the long-run standard deviation `σ` enters the statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMode {
    /// Use a known value; this reproduces simulation settings exactly
    /// (`σ = 1` for CUSUM and `σ² = 1/12` for Wilcoxon on i.i.d. data).
    Known(f64),
    /// Estimate from the empirical `ĥ₁` values with a HAC estimator.
    Estimate(LrvConfig),
}

/// Parameters of one change-point test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub kernel: Kernel,
    /// Weight exponent in `[0, ½]`; only 0 and ½ carry p-values.
    pub gamma: f64,
    pub sigma: SigmaMode,
    /// Test level in `(0, 1)`.
    pub alpha: f64,
}

impl TestConfig {
    /// A test with estimated `σ` (auto bandwidth, Bartlett window) at level 5%.
    pub fn new(kernel: Kernel, gamma: f64) -> Self {
        TestConfig {
            kernel,
            gamma,
            sigma: SigmaMode::Estimate(LrvConfig::default()),
            alpha: 0.05,
        }
    }

    /// Same test with a known `σ`.
    pub fn with_known_sigma(kernel: Kernel, gamma: f64, sigma: f64) -> Self {
        TestConfig {
            kernel,
            gamma,
            sigma: SigmaMode::Known(sigma),
            alpha: 0.05,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.gamma) {
            return Err(Error::OutOfRange {
                name: "gamma",
                value: self.gamma,
                expected: "0 <= gamma <= 0.5",
            });
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::OutOfRange {
                name: "alpha",
                value: self.alpha,
                expected: "0 < alpha < 1",
            });
        }
        if let SigmaMode::Known(sigma) = self.sigma {
            if !(sigma.is_finite() && sigma > 0.0) {
                return Err(Error::OutOfRange {
                    name: "sigma",
                    value: sigma,
                    expected: "a positive finite number",
                });
            }
        }
        Ok(())
    }
}

/// Non-fatal conditions attached to a [`TestOutcome`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Warning {
    /// The long-run variance estimate was clamped to its positive floor;
    /// the normalized statistic is essentially meaningless.
    SigmaFloored,
    /// `γ = ½` with `n` below [`SLOW_CONVERGENCE_N`]: the Gumbel limit is a
    /// poor finite-sample approximation; prefer Monte Carlo critical values.
    SlowConvergence,
    /// `γ` strictly between 0 and ½: no limit law is attached, only the raw
    /// scan and the estimated change point are populated.
    UncalibratedGamma,
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::SigmaFloored => {
                f.write_str("long-run variance estimate was floored; statistic unreliable")
            }
            Warning::SlowConvergence => f.write_str(
                "n < 800 with gamma = 0.5: asymptotic critical values are conservative, \
                 consider Monte Carlo critical values",
            ),
            Warning::UncalibratedGamma => {
                f.write_str("no limit law for this gamma; p-value and decision omitted")
            }
        }
    }
}

/// Everything a single test run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub n: usize,
    pub kernel: Kernel,
    pub gamma: f64,
    /// The weighted scan maximum, in summed-kernel units.
    pub raw_max: f64,
    /// `(a_n/σ)·raw_max − b_n` for `γ = ½`, `raw_max/σ` for `γ = 0`;
    /// absent for other `γ`.
    pub normalized_stat: Option<f64>,
    /// Estimated change point: smallest argmax of the weighted scan.
    pub k_hat: usize,
    pub sigma_used: f64,
    pub p_value: Option<f64>,
    pub critical_value: Option<f64>,
    pub reject: Option<bool>,
    pub warnings: Vec<Warning>,
}

/// Runs one change-point test over `series`.
///
/// Picks the fastest valid U-process strategy, scans with the configured
/// weight, normalizes by `σ`, and for `γ ∈ {0, ½}` attaches the p-value,
/// critical value and decision from the matching limit law.
pub fn run_test(series: &[f64], config: &TestConfig) -> Result<TestOutcome> {
    config.validate()?;
    validate_series("run_test", series, MIN_N_TEST)?;
    let n = series.len();

    let up = UProcess::fastest(series, config.kernel)?;
    let scan = up.weighted_scan(config.gamma)?;

    let mut warnings = Vec::new();
    let sigma = match config.sigma {
        SigmaMode::Known(sigma) => sigma,
        SigmaMode::Estimate(lrv) => {
            let h1 = h1_values(config.kernel, series)?;
            let est = long_run_variance(&h1, &lrv)?;
            if est.floored {
                warnings.push(Warning::SigmaFloored);
            }
            est.sigma2.sqrt()
        }
    };

    let mut outcome = TestOutcome {
        n,
        kernel: config.kernel,
        gamma: config.gamma,
        raw_max: scan.max_value,
        normalized_stat: None,
        k_hat: scan.argmax_k,
        sigma_used: sigma,
        p_value: None,
        critical_value: None,
        reject: None,
        warnings,
    };

    if config.gamma == 0.5 {
        let consts = NormConstants::new(n)?;
        let stat = consts.a_n / sigma * scan.max_value - consts.b_n;
        let critical = gumbel2_quantile(1.0 - config.alpha)?;
        outcome.normalized_stat = Some(stat);
        outcome.p_value = Some(p_value(stat, 0.5)?);
        outcome.critical_value = Some(critical);
        outcome.reject = Some(stat > critical);
        if n < SLOW_CONVERGENCE_N {
            outcome.warnings.push(Warning::SlowConvergence);
        }
    } else if config.gamma == 0.0 {
        let stat = scan.max_value / sigma;
        let critical = ks_quantile(1.0 - config.alpha)?;
        outcome.normalized_stat = Some(stat);
        outcome.p_value = Some(p_value(stat, 0.0)?);
        outcome.critical_value = Some(critical);
        outcome.reject = Some(stat > critical);
    } else {
        outcome.warnings.push(Warning::UncalibratedGamma);
    }
    Ok(outcome)
}

/// Survival function of the limit law matching `gamma`.
///
/// `γ = ½`: `1 − exp(−2 e^{−stat})` (Gumbel); `γ = 0`: Kolmogorov–Smirnov
/// survival. Other `γ` have no calibration and return an error.
pub fn p_value(stat: f64, gamma: f64) -> Result<f64> {
    if gamma == 0.5 {
        Ok(1.0 - gumbel2_cdf(stat))
    } else if gamma == 0.0 {
        if stat <= 0.0 {
            Ok(1.0)
        } else {
            Ok(1.0 - ks_cdf(stat)?)
        }
    } else {
        Err(Error::UncalibratedGamma { gamma })
    }
}
