// SPDX-License-Identifier: MIT OR Apache-2.0

//! Aggregated Monte Carlo results and their JSON/CSV shapes.

use super::experiments::McConfig;
use serde::{Deserialize, Serialize};

/// Version stamp carried by every serialized report.
pub const SCHEMA_VERSION: u32 = 1;

/// One estimated quantity: a quantile, a rejection rate, or a diagnostic mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCell {
    /// The cell's coordinate, e.g. `"0.05"` for an alpha, `"0.1"` for a tau.
    pub label: String,
    pub estimate: f64,
    pub std_error: f64,
    /// Experiment-specific extras (null critical value, change location, …)
    /// in a fixed order so CSV output is stable.
    pub aux: Vec<(String, f64)>,
}

/// A complete experiment report: config echo plus one cell per estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub schema_version: u32,
    /// `"critical_values" | "size" | "power" | "limit" | "degenerate"`.
    pub experiment: String,
    /// The substream contract used to derive replicate RNGs; see [`super::RNG_ID`].
    pub rng: String,
    pub config: McConfig,
    /// What the cell labels mean: `"alpha" | "tau" | "n" | "item"`.
    pub label_key: String,
    pub cells: Vec<McCell>,
    /// Replicates whose long-run variance estimate had to be floored.
    pub floored_replicates: usize,
    pub elapsed_secs: f64,
}

impl McReport {
    /// Flat CSV, one row per cell. Depends only on the config and seed, never
    /// on timing or thread count, so repeated runs are byte-identical.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.label_key);
        out.push_str(",estimate,std_error");
        if let Some(first) = self.cells.first() {
            for (key, _) in &first.aux {
                out.push(',');
                out.push_str(key);
            }
        }
        out.push('\n');
        for cell in &self.cells {
            out.push_str(&cell.label);
            out.push_str(&format!(",{},{}", cell.estimate, cell.std_error));
            for (_, value) in &cell.aux {
                out.push_str(&format!(",{value}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Type-7 empirical quantile (linear interpolation between order statistics).
pub(crate) fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let m = sorted.len();
    if m == 1 {
        return sorted[0];
    }
    let h = (m - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(m - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Order-statistic standard error of the `p`-quantile: the width of the
/// 95% rank interval divided by `2 · 1.96`.
pub(crate) fn quantile_std_error(sorted: &[f64], p: f64) -> f64 {
    let m = sorted.len();
    if m < 2 {
        return f64::NAN;
    }
    let z = 1.959963984540054;
    let mf = m as f64;
    let spread = z * (mf * p * (1.0 - p)).sqrt();
    let lo = ((mf * p - spread).floor().max(0.0)) as usize;
    let hi = (((mf * p + spread).ceil()) as usize).min(m - 1);
    (sorted[hi] - sorted[lo]) / (2.0 * z)
}

/// Binomial standard error `√(p̂(1−p̂)/runs)` for a Monte Carlo rate.
pub(crate) fn rate_std_error(p_hat: f64, runs: usize) -> f64 {
    (p_hat * (1.0 - p_hat) / runs as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_interpolates() {
        let sorted = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(empirical_quantile(&sorted, 0.0), 1.0);
        assert_eq!(empirical_quantile(&sorted, 1.0), 4.0);
        assert_eq!(empirical_quantile(&sorted, 0.5), 2.5);
        assert_eq!(empirical_quantile(&sorted, 0.25), 1.75);
        assert_eq!(empirical_quantile(&[7.0], 0.9), 7.0);
    }

    #[test]
    fn rate_std_error_formula() {
        let se = rate_std_error(0.5, 100);
        assert!((se - 0.05).abs() < 1e-12);
        assert_eq!(rate_std_error(0.0, 50), 0.0);
    }

    #[test]
    fn quantile_std_error_shrinks_with_sample_size() {
        let small: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        let large: Vec<f64> = (0..10_000).map(|i| i as f64 / 10_000.0).collect();
        assert!(quantile_std_error(&large, 0.95) < quantile_std_error(&small, 0.95));
    }
}
