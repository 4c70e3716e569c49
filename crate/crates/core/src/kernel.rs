// SPDX-License-Identifier: MIT OR Apache-2.0

//! Anti-symmetric two-sample kernels and their empirical Hoeffding decomposition.
//!
//! Every kernel here satisfies `h(x, y) = -h(y, x)` exactly, including at ties.
//! The Wilcoxon kernel uses the tie-robust form `½(1{x<y} − 1{y<x})`, which
//! agrees with `1{x<y} − ½` whenever `x ≠ y` and keeps anti-symmetry exact on
//! tied data.

use crate::error::{Error, Result};
use crate::validate_series;
use serde::{Deserialize, Serialize};

/// Above this length the decomposition keeps the degenerate field implicit
/// and evaluates `psi(i, j)` on demand instead of storing an n×n matrix.
pub const PSI_DENSE_MAX_N: usize = 2000;

/// Anti-symmetric shift function `ψ` for translation kernels `h(x, y) = ψ(y − x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Psi {
    /// `ψ(t) = t`; recovers the CUSUM kernel.
    Identity,
    /// `ψ(t) = clamp(t, -c, c)`; a winsorized, bounded variant of CUSUM.
    Clip(f64),
}

impl Psi {
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Psi::Identity => t,
            Psi::Clip(c) => t.clamp(-c, c),
        }
    }
}

/// An anti-symmetric two-sample kernel `h(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// `h(x, y) = y − x`; mean-difference (CUSUM) test, not outlier-robust.
    Cusum,
    /// `h(x, y) = ½(1{x<y} − 1{y<x})`; rank-based, robust to heavy tails.
    Wilcoxon,
    /// `h(x, y) = ½ sgn(y − x)`; identical values to the Wilcoxon kernel,
    /// exposed as the translation kernel with `ψ(t) = ½ sgn(t)`.
    Sign,
    /// `h(x, y) = ψ(y − x)` for a built-in anti-symmetric `ψ`.
    Translation(Psi),
}

#[inline]
fn half_sign_diff(x: f64, y: f64) -> f64 {
    // 0.5 * (1{x<y} - 1{y<x}) without f64::signum, whose sign(+0.0) = 1.0
    // would break anti-symmetry at ties.
    if x < y {
        0.5
    } else if y < x {
        -0.5
    } else {
        0.0
    }
}

impl Kernel {
    /// Evaluates the kernel after checking both arguments are finite.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::OutOfRange {
                name: "x",
                value: x,
                expected: "a finite number",
            });
        }
        if !y.is_finite() {
            return Err(Error::OutOfRange {
                name: "y",
                value: y,
                expected: "a finite number",
            });
        }
        Ok(self.eval_unchecked(x, y))
    }

    /// Evaluates the kernel without input validation; hot paths call this
    /// after the series has been validated once.
    #[inline]
    pub fn eval_unchecked(&self, x: f64, y: f64) -> f64 {
        match *self {
            Kernel::Cusum => y - x,
            Kernel::Wilcoxon | Kernel::Sign => half_sign_diff(x, y),
            Kernel::Translation(psi) => psi.eval(y - x),
        }
    }

    /// Whether `|h|` is bounded; the extreme-value limit requires this.
    pub fn bounded(&self) -> bool {
        match *self {
            Kernel::Cusum | Kernel::Translation(Psi::Identity) => false,
            Kernel::Wilcoxon | Kernel::Sign | Kernel::Translation(Psi::Clip(_)) => true,
        }
    }

    /// Whether the U-process can be computed from global ranks in `O(n log n)`.
    pub fn has_rank_fastpath(&self) -> bool {
        matches!(self, Kernel::Wilcoxon | Kernel::Sign)
    }

    /// The stable string id used in CLI flags and config files.
    pub fn id(&self) -> &'static str {
        match *self {
            Kernel::Cusum => "cusum",
            Kernel::Wilcoxon => "wilcoxon",
            Kernel::Sign => "sign",
            Kernel::Translation(_) => "translation",
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cusum" => Ok(Kernel::Cusum),
            "wilcoxon" => Ok(Kernel::Wilcoxon),
            "sign" => Ok(Kernel::Sign),
            other => Err(Error::Config(format!(
                "unknown kernel {other:?}, expected one of: cusum, wilcoxon, sign"
            ))),
        }
    }
}

impl std::fmt::Display for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

enum PsiStore {
    /// Row-major n×n matrix of `Ψ̂(i, j)`.
    Dense(Vec<f64>),
    /// Recompute from the retained series; avoids n² storage for large n.
    Lazy { series: Vec<f64> },
}

/// Empirical Hoeffding decomposition `h(x, y) = θ̂ + ĥ₁(x) − ĥ₁(y) + Ψ̂(x, y)`.
///
/// For anti-symmetric kernels the grand mean is zero and the second linear
/// part is `ĥ₂ = −ĥ₁`, so only `ĥ₁` is stored. The degenerate field is
/// double-centered: all row and column sums of `Ψ̂` vanish up to rounding.
pub struct HoeffdingParts {
    kernel: Kernel,
    theta: f64,
    h1: Vec<f64>,
    psi: PsiStore,
}

impl HoeffdingParts {
    /// The estimated grand mean; identically 0 for anti-symmetric kernels.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `ĥ₁` evaluated at each observation, `ĥ₁(X_i) = (1/n) Σ_j h(X_i, X_j)`.
    pub fn h1(&self) -> &[f64] {
        &self.h1
    }

    /// Number of observations the decomposition was built from.
    pub fn n(&self) -> usize {
        self.h1.len()
    }

    /// The kernel the decomposition was built from.
    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    /// `Ψ̂(X_i, X_j) = h(X_i, X_j) − ĥ₁(X_i) + ĥ₁(X_j)`.
    ///
    /// `Ψ̂` is anti-symmetric: `psi(i, j) = -psi(j, i)`.
    pub fn psi(&self, i: usize, j: usize) -> f64 {
        match &self.psi {
            PsiStore::Dense(m) => m[i * self.h1.len() + j],
            PsiStore::Lazy { series } => {
                self.kernel.eval_unchecked(series[i], series[j]) - self.h1[i] + self.h1[j]
            }
        }
    }
}

/// Computes only the linear part `ĥ₁` of the decomposition.
///
/// Uses closed forms where the kernel allows: `mean − x` for CUSUM and
/// midranks for the Wilcoxon and sign kernels (`O(n log n)`); otherwise the
/// generic `O(n²)` double loop.
pub fn h1_values(kernel: Kernel, series: &[f64]) -> Result<Vec<f64>> {
    validate_series("hoeffding_decompose", series, 2)?;
    let n = series.len();
    let nf = n as f64;
    match kernel {
        Kernel::Cusum | Kernel::Translation(Psi::Identity) => {
            let mean = series.iter().sum::<f64>() / nf;
            Ok(series.iter().map(|&x| mean - x).collect())
        }
        Kernel::Wilcoxon | Kernel::Sign => {
            // h1(X_i) = ((n + 1)/2 - midrank(X_i)) / n; midranks average ties.
            let ranks = midranks(series);
            Ok(ranks
                .iter()
                .map(|&r| ((nf + 1.0) / 2.0 - r) / nf)
                .collect())
        }
        _ => {
            let mut h1 = Vec::with_capacity(n);
            for &x in series {
                let mut acc = 0.0;
                for &y in series {
                    acc += kernel.eval_unchecked(x, y);
                }
                h1.push(acc / nf);
            }
            Ok(h1)
        }
    }
}

/// 1-based average ranks; tied values (exact float equality) share their
/// group's mean rank.
pub(crate) fn midranks(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| series[a].total_cmp(&series[b]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && series[order[end]] == series[order[start]] {
            end += 1;
        }
        // positions start..end are 1-based ranks start+1 ..= end
        let mean_rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = mean_rank;
        }
        start = end;
    }
    ranks
}

/// Builds the empirical Hoeffding decomposition of `kernel` on `series`.
pub fn hoeffding_decompose(kernel: Kernel, series: &[f64]) -> Result<HoeffdingParts> {
    decompose_inner(kernel, series, series.len() <= PSI_DENSE_MAX_N)
}

pub(crate) fn decompose_inner(
    kernel: Kernel,
    series: &[f64],
    dense: bool,
) -> Result<HoeffdingParts> {
    let h1 = h1_values(kernel, series)?;
    let n = series.len();
    let psi = if dense {
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = kernel.eval_unchecked(series[i], series[j]) - h1[i] + h1[j];
            }
        }
        PsiStore::Dense(m)
    } else {
        PsiStore::Lazy {
            series: series.to_vec(),
        }
    };
    Ok(HoeffdingParts {
        kernel,
        theta: 0.0,
        h1,
        psi,
    })
}
