// SPDX-License-Identifier: MIT OR Apache-2.0

//! The Monte Carlo experiments: critical values, size, power, and the two
//! limit-theory diagnostics.

use super::generator::{generate, inject_change, replicate_rng, ChangeSpec, GeneratorSpec};
use super::report::{
    empirical_quantile, quantile_std_error, rate_std_error, McCell, McReport, SCHEMA_VERSION,
};
use super::RNG_ID;
use crate::calibrate::{gumbel1_cdf, gumbel2_cdf, gumbel2_quantile, ks_quantile, long_run_variance, NormConstants};
use crate::detect::{SigmaMode, TestConfig};
use crate::error::{Error, Result};
use crate::kernel::{h1_values, Kernel, Psi};
use crate::uprocess::{darling_erdos_scan, partial_sums, tied_down_scan, UProcess};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Replicate data streams start here.
const DATA_STREAM_BASE: u64 = 0;
/// Null-calibration runs for size-corrected power use a disjoint stream block.
const NULL_STREAM_BASE: u64 = 1 << 32;

/// One Monte Carlo experiment: sample size, replicate count, seed, data
/// model, optional change, and the statistic under study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n: usize,
    pub runs: usize,
    pub seed: u64,
    pub generator: GeneratorSpec,
    pub change: Option<ChangeSpec>,
    pub test: TestConfig,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 20 {
            return Err(Error::Config(format!(
                "n = {} too small, experiments need n >= 20",
                self.n
            )));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be >= 1".into()));
        }
        self.generator.validate()?;
        self.test.validate()?;
        if let Some(change) = &self.change {
            if change.k_star == 0 || change.k_star >= self.n {
                return Err(Error::Config(format!(
                    "change.k_star = {} out of 1..={}",
                    change.k_star,
                    self.n - 1
                )));
            }
        }
        Ok(())
    }

    fn require_no_change(&self, experiment: &str) -> Result<()> {
        if self.change.is_some() {
            return Err(Error::Config(format!(
                "{experiment} runs under the null: remove the change spec"
            )));
        }
        Ok(())
    }
}

/// The normalized statistic for one replicate series.
///
/// `γ = ½`: `(a_n/σ)·raw − b_n`; otherwise `raw/σ` (for `γ = 0` this is the
/// statistic with the Kolmogorov–Smirnov limit, for intermediate `γ` a
/// scale-normalized scan that only Monte Carlo can calibrate).
fn replicate_statistic(
    series: &[f64],
    test: &TestConfig,
    consts: Option<&NormConstants>,
) -> Result<(f64, bool)> {
    let up = UProcess::fastest(series, test.kernel)?;
    let scan = up.weighted_scan(test.gamma)?;
    let (sigma, floored) = resolve_sigma(series, test)?;
    let stat = match consts {
        Some(c) => c.a_n / sigma * scan.max_value - c.b_n,
        None => scan.max_value / sigma,
    };
    Ok((stat, floored))
}

fn resolve_sigma(series: &[f64], test: &TestConfig) -> Result<(f64, bool)> {
    match test.sigma {
        SigmaMode::Known(sigma) => Ok((sigma, false)),
        SigmaMode::Estimate(lrv) => {
            let h1 = h1_values(test.kernel, series)?;
            let est = long_run_variance(&h1, &lrv)?;
            Ok((est.sigma2.sqrt(), est.floored))
        }
    }
}

/// Runs all replicates in parallel; results are indexed by replicate, so the
/// output does not depend on scheduling.
fn run_replicates(
    config: &McConfig,
    n: usize,
    change: Option<ChangeSpec>,
    stream_base: u64,
) -> Result<(Vec<f64>, usize)> {
    let consts = if config.test.gamma == 0.5 {
        Some(NormConstants::new(n)?)
    } else {
        None
    };
    let results: Vec<(f64, bool)> = (0..config.runs as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(config.seed, stream_base + r);
            let mut series = generate(&config.generator, n, &mut rng)?;
            if let Some(c) = &change {
                inject_change(&mut series, c)?;
            }
            replicate_statistic(&series, &config.test, consts.as_ref())
        })
        .collect::<Result<Vec<_>>>()?;
    let floored = results.iter().filter(|(_, f)| *f).count();
    Ok((results.into_iter().map(|(s, _)| s).collect(), floored))
}

fn sorted(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_unstable_by(f64::total_cmp);
    values
}

fn report(
    experiment: &str,
    config: &McConfig,
    label_key: &str,
    cells: Vec<McCell>,
    floored: usize,
    started: Instant,
) -> McReport {
    McReport {
        schema_version: SCHEMA_VERSION,
        experiment: experiment.to_string(),
        rng: RNG_ID.to_string(),
        config: config.clone(),
        label_key: label_key.to_string(),
        cells,
        floored_replicates: floored,
        elapsed_secs: started.elapsed().as_secs_f64(),
    }
}

/// Empirical `(1−α)`-quantiles of the normalized statistic under the null.
pub fn mc_critical_values(config: &McConfig, alphas: &[f64]) -> Result<McReport> {
    let started = Instant::now();
    config.validate()?;
    config.require_no_change("mc_critical_values")?;
    if alphas.is_empty() {
        return Err(Error::Config("alphas must be non-empty".into()));
    }
    for &alpha in alphas {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!("alpha = {alpha} out of (0, 1)")));
        }
    }
    let (stats, floored) = run_replicates(config, config.n, None, DATA_STREAM_BASE)?;
    let stats = sorted(stats);
    let cells = alphas
        .iter()
        .map(|&alpha| McCell {
            label: format!("{alpha}"),
            estimate: empirical_quantile(&stats, 1.0 - alpha),
            std_error: quantile_std_error(&stats, 1.0 - alpha),
            aux: Vec::new(),
        })
        .collect();
    Ok(report("critical_values", config, "alpha", cells, floored, started))
}

/// Fraction of null replicates rejected at the asymptotic critical value.
pub fn mc_size(config: &McConfig) -> Result<McReport> {
    let started = Instant::now();
    config.validate()?;
    config.require_no_change("mc_size")?;
    let critical = asymptotic_critical_value(config.test.gamma, config.test.alpha)?;
    let (stats, floored) = run_replicates(config, config.n, None, DATA_STREAM_BASE)?;
    let rate = stats.iter().filter(|&&s| s > critical).count() as f64 / config.runs as f64;
    let cells = vec![McCell {
        label: format!("{}", config.test.alpha),
        estimate: rate,
        std_error: rate_std_error(rate, config.runs),
        aux: vec![("critical_value".to_string(), critical)],
    }];
    Ok(report("size", config, "alpha", cells, floored, started))
}

fn asymptotic_critical_value(gamma: f64, alpha: f64) -> Result<f64> {
    if gamma == 0.5 {
        gumbel2_quantile(1.0 - alpha)
    } else if gamma == 0.0 {
        ks_quantile(1.0 - alpha)
    } else {
        Err(Error::UncalibratedGamma { gamma })
    }
}

/// Size-corrected power for each change-point time `τ`, with `k* = ⌊τ·n⌋`.
///
/// The correction uses the empirical null critical value from a dedicated
/// null run on a disjoint seed-derived stream block; the alternative runs
/// reuse one stream block across `τ`, so curves share replicate noise.
pub fn mc_power_curve(config: &McConfig, taus: &[f64]) -> Result<McReport> {
    let started = Instant::now();
    config.validate()?;
    let delta = config
        .change
        .as_ref()
        .ok_or_else(|| Error::Config("mc_power_curve needs a change spec for delta".into()))?
        .delta;
    if taus.is_empty() {
        return Err(Error::Config("taus must be non-empty".into()));
    }
    let mut k_stars = Vec::with_capacity(taus.len());
    for &tau in taus {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::Config(format!("tau = {tau} out of (0, 1)")));
        }
        let k_star = (tau * config.n as f64).floor() as usize;
        if k_star == 0 || k_star >= config.n {
            return Err(Error::Config(format!(
                "tau = {tau} gives k* = {k_star}, outside 1..={}",
                config.n - 1
            )));
        }
        k_stars.push(k_star);
    }

    let (null_stats, mut floored) = run_replicates(config, config.n, None, NULL_STREAM_BASE)?;
    let null_stats = sorted(null_stats);
    let null_critical = empirical_quantile(&null_stats, 1.0 - config.test.alpha);

    let mut cells = Vec::with_capacity(taus.len());
    for (&tau, &k_star) in taus.iter().zip(&k_stars) {
        let change = ChangeSpec { k_star, delta };
        let (stats, f) = run_replicates(config, config.n, Some(change), DATA_STREAM_BASE)?;
        floored += f;
        let power = stats.iter().filter(|&&s| s > null_critical).count() as f64
            / config.runs as f64;
        cells.push(McCell {
            label: format!("{tau}"),
            estimate: power,
            std_error: rate_std_error(power, config.runs),
            aux: vec![
                ("k_star".to_string(), k_star as f64),
                ("null_critical_value".to_string(), null_critical),
            ],
        });
    }
    Ok(report("power", config, "tau", cells, floored, started))
}

/// Which partial-sum scan a limit diagnostic exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitStatistic {
    /// `max_k |S_k|/√k`, Gumbel `exp(−e^{−x})` limit.
    DarlingErdos,
    /// `max_k √(n/(k(n−k))) |S_k − (k/n) S_n|`, Gumbel `exp(−2e^{−x})` limit.
    TiedDown,
}

/// Distribution of `a_n·scan/σ − b_n` across replicates and its sup-distance
/// to the matching Gumbel limit.
///
/// The limit has unit long-run variance; `σ` comes from the test config
/// (known, or HAC-estimated from each replicate's raw series).
pub fn mc_limit_diagnostic(config: &McConfig, statistic: LimitStatistic) -> Result<McReport> {
    let started = Instant::now();
    config.validate()?;
    config.require_no_change("mc_limit_diagnostic")?;
    let consts = NormConstants::new(config.n)?;

    let results: Vec<(f64, bool)> = (0..config.runs as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(config.seed, DATA_STREAM_BASE + r);
            let series = generate(&config.generator, config.n, &mut rng)?;
            let (sigma, floored) = match config.test.sigma {
                SigmaMode::Known(s) => (s, false),
                SigmaMode::Estimate(lrv) => {
                    let est = long_run_variance(&series, &lrv)?;
                    (est.sigma2.sqrt(), est.floored)
                }
            };
            let sums = partial_sums(&series)?;
            let scan = match statistic {
                LimitStatistic::DarlingErdos => darling_erdos_scan(&sums)?,
                LimitStatistic::TiedDown => tied_down_scan(&sums)?,
            };
            Ok((consts.a_n * scan.max_value / sigma - consts.b_n, floored))
        })
        .collect::<Result<Vec<_>>>()?;
    let floored = results.iter().filter(|(_, f)| *f).count();
    let stats = sorted(results.into_iter().map(|(s, _)| s).collect());

    let limit_cdf: fn(f64) -> f64 = match statistic {
        LimitStatistic::DarlingErdos => gumbel1_cdf,
        LimitStatistic::TiedDown => gumbel2_cdf,
    };
    let m = stats.len() as f64;
    let mut sup = 0.0;
    let mut sup_p = 0.5;
    for (idx, &x) in stats.iter().enumerate() {
        let f = limit_cdf(x);
        let below = (idx as f64) / m;
        let above = (idx + 1) as f64 / m;
        for d in [f - below, above - f] {
            if d > sup {
                sup = d;
                sup_p = f;
            }
        }
    }

    let mut cells = vec![McCell {
        label: "sup_distance".to_string(),
        estimate: sup,
        std_error: rate_std_error(sup_p, stats.len()),
        aux: Vec::new(),
    }];
    for p in [0.50, 0.90, 0.95] {
        cells.push(McCell {
            label: format!("q{p}"),
            estimate: empirical_quantile(&stats, p),
            std_error: quantile_std_error(&stats, p),
            aux: Vec::new(),
        });
    }
    Ok(report("limit", config, "item", cells, floored, started))
}

/// The linear part `h₁` under the data model, used to isolate the degenerate
/// part of the decomposition. Known in closed form for the kernels and
/// generators served here; the same-sample plug-in `ĥ₁` cannot be used, since
/// it makes every block sum of `Ψ̂` vanish identically.
enum ModelH1 {
    /// `h₁(x) = −x` (mean-difference kernels on mean-zero generators).
    NegX,
    /// `h₁(x) = ½ − Φ(x·inv_sd)` (rank kernels on normal marginals).
    HalfMinusNormalCdf { inv_sd: f64 },
}

impl ModelH1 {
    fn eval(&self, x: f64) -> f64 {
        match *self {
            ModelH1::NegX => -x,
            ModelH1::HalfMinusNormalCdf { inv_sd } => {
                0.5 - 0.5 * libm::erfc(-x * inv_sd / std::f64::consts::SQRT_2)
            }
        }
    }

    fn resolve(kernel: Kernel, generator: &GeneratorSpec) -> Result<ModelH1> {
        match kernel {
            Kernel::Cusum | Kernel::Translation(Psi::Identity) => Ok(ModelH1::NegX),
            Kernel::Wilcoxon | Kernel::Sign => match *generator {
                GeneratorSpec::IidNormal => Ok(ModelH1::HalfMinusNormalCdf { inv_sd: 1.0 }),
                GeneratorSpec::Ar1 {
                    phi,
                    innovation: super::generator::Innovation::Normal,
                } => Ok(ModelH1::HalfMinusNormalCdf {
                    inv_sd: (1.0 - phi * phi).sqrt(),
                }),
                _ => Err(Error::Unsupported(
                    "rank-kernel degenerate diagnostic needs a normal marginal; \
                     t-distributed generators are not served"
                        .into(),
                )),
            },
            Kernel::Translation(Psi::Clip(_)) => Err(Error::Unsupported(
                "no closed-form h1 for clipped translation kernels".into(),
            )),
        }
    }
}

/// `max_k √(log log n/(k(n−k)n)) |Σ_{i≤k} Σ_{j>k} Ψ(X_i, X_j)|` with the
/// model decomposition `Ψ(x, y) = h(x, y) − h₁(x) + h₁(y)`.
fn degenerate_scan(series: &[f64], kernel: Kernel, h1: &ModelH1) -> Result<f64> {
    let up = UProcess::fastest(series, kernel)?;
    let n = series.len();
    let nf = n as f64;
    let loglog = nf.ln().ln();
    // Σ_{i≤k}Σ_{j>k} Ψ = U_k − [(n−k) A_k − k (H − A_k)] = U_k − (n·A_k − k·H)
    let mut prefix = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &x in series {
        acc += h1.eval(x);
        prefix.push(acc);
    }
    let total = prefix[n - 1];
    let mut best = 0.0f64;
    for k in 1..n {
        let kf = k as f64;
        let degenerate = up.values()[k - 1] - (nf * prefix[k - 1] - kf * total);
        let weighted = (loglog / (kf * (nf - kf) * nf)).sqrt() * degenerate.abs();
        best = best.max(weighted);
    }
    Ok(best)
}

/// Monte Carlo mean of the weighted degenerate maximum at each `n` in the
/// grid; the means shrink as `n` grows when the degenerate part is
/// asymptotically negligible.
pub fn degenerate_part_diagnostic(config: &McConfig, n_grid: &[usize]) -> Result<McReport> {
    let started = Instant::now();
    config.validate()?;
    config.require_no_change("degenerate_part_diagnostic")?;
    if n_grid.is_empty() {
        return Err(Error::Config("n_grid must be non-empty".into()));
    }
    let model = ModelH1::resolve(config.test.kernel, &config.generator)?;

    let mut cells = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        if n < 20 {
            return Err(Error::Config(format!("n_grid entry {n} below minimum 20")));
        }
        let stream_base = (n as u64) << 32;
        let values: Vec<f64> = (0..config.runs as u64)
            .into_par_iter()
            .map(|r| {
                let mut rng = replicate_rng(config.seed, stream_base + r);
                let series = generate(&config.generator, n, &mut rng)?;
                degenerate_scan(&series, config.test.kernel, &model)
            })
            .collect::<Result<Vec<_>>>()?;
        let runs = values.len() as f64;
        let mean = values.iter().sum::<f64>() / runs;
        let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / runs;
        cells.push(McCell {
            label: format!("{n}"),
            estimate: mean,
            std_error: (variance / runs).sqrt(),
            aux: Vec::new(),
        });
    }
    Ok(report("degenerate", config, "n", cells, 0, started))
}
