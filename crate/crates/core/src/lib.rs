// SPDX-License-Identifier: MIT OR Apache-2.0

//! Change-point tests built on weighted two-sample U-statistics.
//!
//! The test statistic for a change in mean at an unknown time is the weighted
//! maximum of the two-sample U-statistic process
//! `U_k = Σ_{i≤k} Σ_{j>k} h(X_i, X_j)` over candidate split points `k`. The
//! kernel `h` selects the test: `h(x, y) = y − x` gives the CUSUM test,
//! `h(x, y) = 1{x<y} − ½` the rank-based Wilcoxon test. With the boundary
//! weight exponent `γ = ½` the normalized maximum converges to a Gumbel
//! extreme value law; with `γ = 0` to the Kolmogorov–Smirnov law.
//!
//! The crate is organized around that pipeline:
//!
//! * [`kernel`] — anti-symmetric kernels and their empirical Hoeffding
//!   decomposition,
//! * [`uprocess`] — the U-statistic process (brute-force oracle, `O(n²)`
//!   incremental, and `O(n log n)` rank-based strategies) and weighted scans,
//! * [`calibrate`] — normalization constants, Gumbel and Kolmogorov–Smirnov
//!   limit distributions, and HAC long-run variance estimation,
//! * [`detect`] — a single change-point test from series to decision,
//! * [`simulate`] — seeded data generators and deterministic, parallel Monte
//!   Carlo experiments (critical values, size, power, limit diagnostics).

mod error;

pub mod calibrate;
pub mod detect;
pub mod kernel;
pub mod simulate;
pub mod uprocess;

pub use calibrate::{
    gumbel1_cdf, gumbel1_quantile, gumbel2_cdf, gumbel2_quantile, ks_cdf, ks_quantile,
    long_run_variance, Bandwidth, LrvConfig, LrvEstimate, LrvWindow, NormConstants,
};
pub use detect::{p_value, run_test, SigmaMode, TestConfig, TestOutcome, Warning};
pub use error::{Error, Result};
pub use kernel::{hoeffding_decompose, HoeffdingParts, Kernel, Psi};
pub use simulate::{
    degenerate_part_diagnostic, generate, inject_change, mc_critical_values,
    mc_limit_diagnostic, mc_power_curve, mc_size, ChangeSpec, GeneratorSpec, Innovation,
    LimitStatistic, McCell, McConfig, McReport,
};
pub use uprocess::{
    darling_erdos_scan, partial_sums, tied_down_scan, ScanResult, Strategy, UProcess,
};

/// Rejects series containing NaN or infinite observations, or shorter than `min`.
pub(crate) fn validate_series(op: &'static str, series: &[f64], min: usize) -> Result<()> {
    if series.len() < min {
        return Err(Error::TooShort {
            op,
            min,
            got: series.len(),
        });
    }
    for (index, &value) in series.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { index, value });
        }
    }
    Ok(())
}
