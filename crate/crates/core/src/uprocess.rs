// SPDX-License-Identifier: MIT OR Apache-2.0

//! The two-sample U-statistic process and its weighted scan statistics.
//!
//! `U_k = Σ_{i≤k} Σ_{j>k} h(X_i, X_j)` for `k = 1..n−1`. Three strategies
//! compute the same values:
//!
//! * [`UProcess::oracle`] — the literal triple loop, `O(n³)`; reference
//!   semantics for everything else,
//! * [`UProcess::incremental`] — exploits anti-symmetry via
//!   `U_{k+1} = U_k + Σ_{j≠k+1} h(X_{k+1}, X_j)`, `O(n²)`,
//! * [`UProcess::rank_fast`] — Wilcoxon/sign only: increments depend only on
//!   global midranks, one sort plus prefix sums, `O(n log n)`.

use crate::error::{Error, Result};
use crate::kernel::{midranks, Kernel};
use crate::validate_series;
use serde::{Deserialize, Serialize};

/// How a [`UProcess`] was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Oracle,
    Incremental,
    RankFast,
}

/// The U-statistic process `U_1, …, U_{n−1}` in summed-kernel units.
#[derive(Debug, Clone, PartialEq)]
pub struct UProcess {
    values: Vec<f64>,
    n: usize,
    kernel: Kernel,
    strategy: Strategy,
}

/// A weighted maximum and the smallest index attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    /// The maximum weighted value; nonnegative.
    pub max_value: f64,
    /// Smallest 1-based `k` attaining the maximum.
    pub argmax_k: usize,
}

impl UProcess {
    /// Reference implementation: the literal triple loop. Intended for
    /// `n ≤ 500` or so; cost is `O(n³)` kernel evaluations.
    pub fn oracle(series: &[f64], kernel: Kernel) -> Result<Self> {
        validate_series("u_process", series, 2)?;
        let n = series.len();
        let mut values = Vec::with_capacity(n - 1);
        for k in 1..n {
            let mut acc = 0.0;
            for i in 0..k {
                for j in k..n {
                    acc += kernel.eval_unchecked(series[i], series[j]);
                }
            }
            values.push(acc);
        }
        Ok(UProcess {
            values,
            n,
            kernel,
            strategy: Strategy::Oracle,
        })
    }

    /// `O(n²)` strategy for any anti-symmetric kernel.
    ///
    /// Row sums accumulate in ascending `j` order, so repeated runs are
    /// bit-identical; agreement with the oracle is within rounding.
    pub fn incremental(series: &[f64], kernel: Kernel) -> Result<Self> {
        validate_series("u_process", series, 2)?;
        let values = match kernel {
            Kernel::Cusum => prefix_row_sums(series, |x, y| y - x),
            Kernel::Wilcoxon | Kernel::Sign => {
                prefix_row_sums(series, |x, y| Kernel::Wilcoxon.eval_unchecked(x, y))
            }
            Kernel::Translation(psi) => prefix_row_sums(series, move |x, y| psi.eval(y - x)),
        };
        Ok(UProcess {
            values,
            n: series.len(),
            kernel,
            strategy: Strategy::Incremental,
        })
    }

    /// `O(n log n)` Wilcoxon strategy from global midranks; ties handled
    /// exactly as the tie-robust kernel does.
    pub fn rank_fast(series: &[f64]) -> Result<Self> {
        Self::rank_fast_as(series, Kernel::Wilcoxon)
    }

    /// Rank-based strategy stamped with `kernel` provenance; `kernel` must
    /// have the rank fast path (Wilcoxon or sign, which share `h`).
    pub fn rank_fast_as(series: &[f64], kernel: Kernel) -> Result<Self> {
        if !kernel.has_rank_fastpath() {
            return Err(Error::Unsupported(format!(
                "kernel {kernel} has no rank fast path"
            )));
        }
        validate_series("u_process", series, 2)?;
        let n = series.len();
        let nf = n as f64;
        let ranks = midranks(series);
        // Row sum for observation m: Σ_j h(X_m, X_j) = (n + 1)/2 − midrank(m);
        // midranks are half-integers, so every term is exact in binary.
        let mut values = Vec::with_capacity(n - 1);
        let mut acc = 0.0;
        for rank in &ranks[..n - 1] {
            acc += (nf + 1.0) / 2.0 - rank;
            values.push(acc);
        }
        Ok(UProcess {
            values,
            n,
            kernel,
            strategy: Strategy::RankFast,
        })
    }

    /// Picks the fastest strategy that is valid for `kernel`.
    pub fn fastest(series: &[f64], kernel: Kernel) -> Result<Self> {
        if kernel.has_rank_fastpath() {
            Self::rank_fast_as(series, kernel)
        } else {
            Self::incremental(series, kernel)
        }
    }

    /// `U_k` for `k = 1..n−1`; `values()[k-1]` is `U_k`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    /// The weighted maximum `max_k (k/n (1−k/n))^{−γ} n^{−3/2} |U_k|` with the
    /// smallest maximizing `k`.
    ///
    /// For `γ = ½` this is `max_k |U_k| / √(k(n−k)n)`, the fully weighted
    /// statistic; for `γ = 0` the unweighted `max_k |U_k| / n^{3/2}`.
    pub fn weighted_scan(&self, gamma: f64) -> Result<ScanResult> {
        if !(0.0..=0.5).contains(&gamma) {
            return Err(Error::OutOfRange {
                name: "gamma",
                value: gamma,
                expected: "0 <= gamma <= 0.5",
            });
        }
        let n = self.n as f64;
        let mut best = f64::NEG_INFINITY;
        let mut best_k = 1;
        for (idx, &u) in self.values.iter().enumerate() {
            let k = (idx + 1) as f64;
            let weighted = if gamma == 0.5 {
                u.abs() / (k * (n - k) * n).sqrt()
            } else {
                (k / n * (1.0 - k / n)).powf(-gamma) * u.abs() / (n * n.sqrt())
            };
            if weighted > best {
                best = weighted;
                best_k = idx + 1;
            }
        }
        Ok(ScanResult {
            max_value: best,
            argmax_k: best_k,
        })
    }
}

#[inline]
fn prefix_row_sums(series: &[f64], h: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let n = series.len();
    let mut values = Vec::with_capacity(n - 1);
    let mut acc = 0.0;
    for m in 0..n - 1 {
        let xm = series[m];
        let mut row = 0.0;
        for &xj in series {
            row += h(xm, xj); // j == m contributes h(x, x) = 0
        }
        acc += row;
        values.push(acc);
    }
    values
}

/// Cumulative sums `S_k = Σ_{i≤k} X_i` for `k = 1..n`.
pub fn partial_sums(series: &[f64]) -> Result<Vec<f64>> {
    validate_series("partial_sums", series, 1)?;
    let mut sums = Vec::with_capacity(series.len());
    let mut acc = 0.0;
    for &x in series {
        acc += x;
        sums.push(acc);
    }
    Ok(sums)
}

/// `max_{1≤k≤n−1} √(n/(k(n−k))) |S_k − (k/n) S_n|`, the weighted tied-down
/// random walk, with its smallest argmax.
pub fn tied_down_scan(sums: &[f64]) -> Result<ScanResult> {
    validate_series("tied_down_scan", sums, 2)?;
    let n = sums.len();
    let nf = n as f64;
    let total = sums[n - 1];
    let mut best = f64::NEG_INFINITY;
    let mut best_k = 1;
    for k in 1..n {
        let kf = k as f64;
        let bridge = sums[k - 1] - kf / nf * total;
        let weighted = (nf / (kf * (nf - kf))).sqrt() * bridge.abs();
        if weighted > best {
            best = weighted;
            best_k = k;
        }
    }
    Ok(ScanResult {
        max_value: best,
        argmax_k: best_k,
    })
}

/// `max_{1≤k≤n} |S_k|/√k` with its smallest argmax.
pub fn darling_erdos_scan(sums: &[f64]) -> Result<ScanResult> {
    validate_series("darling_erdos_scan", sums, 1)?;
    let mut best = f64::NEG_INFINITY;
    let mut best_k = 1;
    for (idx, &s) in sums.iter().enumerate() {
        let value = s.abs() / ((idx + 1) as f64).sqrt();
        if value > best {
            best = value;
            best_k = idx + 1;
        }
    }
    Ok(ScanResult {
        max_value: best,
        argmax_k: best_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Psi;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!((got - want).abs() <= tol, "got {got}, want {want}");
    }

    #[test]
    fn oracle_cusum_example() {
        let up = UProcess::oracle(&[0.0, 0.0, 1.0, 1.0], Kernel::Cusum).unwrap();
        assert_eq!(up.values(), &[2.0, 4.0, 2.0]);
    }

    #[test]
    fn oracle_wilcoxon_example() {
        let up = UProcess::oracle(&[1.0, 2.0, 3.0, 4.0], Kernel::Wilcoxon).unwrap();
        assert_eq!(up.values(), &[1.5, 2.0, 1.5]);
    }

    #[test]
    fn constant_series_is_zero() {
        for kernel in [Kernel::Cusum, Kernel::Wilcoxon, Kernel::Sign] {
            let up = UProcess::oracle(&[3.0; 5], kernel).unwrap();
            assert!(up.values().iter().all(|&v| v == 0.0));
            let up = UProcess::rank_fast(&[3.0; 5]).unwrap();
            assert!(up.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn incremental_matches_oracle_examples() {
        let up = UProcess::incremental(&[0.0, 0.0, 1.0, 1.0], Kernel::Cusum).unwrap();
        assert_eq!(up.values(), &[2.0, 4.0, 2.0]);
        let up = UProcess::incremental(&[2.5, -1.0], Kernel::Cusum).unwrap();
        assert_eq!(up.values(), &[-3.5]); // n = 2: single term b − a
    }

    #[test]
    fn rank_fast_examples() {
        let up = UProcess::rank_fast(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(up.values(), &[1.5, 2.0, 1.5]);
        // Ties resolve exactly like the tie-robust kernel.
        let tied = [1.0, 1.0, 2.0];
        let fast = UProcess::rank_fast(&tied).unwrap();
        let oracle = UProcess::oracle(&tied, Kernel::Wilcoxon).unwrap();
        assert_eq!(fast.values(), oracle.values());
    }

    #[test]
    fn rank_fast_requires_fastpath_kernel() {
        assert!(UProcess::rank_fast_as(&[1.0, 2.0], Kernel::Cusum).is_err());
    }

    #[test]
    fn short_series_rejected() {
        assert!(matches!(
            UProcess::oracle(&[1.0], Kernel::Cusum),
            Err(Error::TooShort { .. })
        ));
        assert!(UProcess::incremental(&[], Kernel::Cusum).is_err());
        assert!(UProcess::rank_fast(&[0.5]).is_err());
    }

    fn random_series(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| match rng.random_range(0..3) {
                0 => rng.random_range(-2..3) as f64, // integer ties
                1 => {
                    // crude heavy tail: ratio of normals
                    let a: f64 = rng.random::<f64>() - 0.5;
                    let b: f64 = rng.random::<f64>() - 0.5;
                    a / (b.abs() + 0.05)
                }
                _ => rng.random::<f64>() * 2.0 - 1.0,
            })
            .collect()
    }

    #[test]
    fn strategies_agree_on_random_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..25 {
            let n = rng.random_range(2..60);
            let series = random_series(&mut rng, n);
            for kernel in [
                Kernel::Cusum,
                Kernel::Wilcoxon,
                Kernel::Sign,
                Kernel::Translation(Psi::Clip(1.0)),
            ] {
                let oracle = UProcess::oracle(&series, kernel).unwrap();
                let incr = UProcess::incremental(&series, kernel).unwrap();
                for (a, b) in oracle.values().iter().zip(incr.values()) {
                    assert_close(*b, *a, 1e-9 * (1.0 + a.abs()));
                }
                if kernel.has_rank_fastpath() {
                    let fast = UProcess::rank_fast_as(&series, kernel).unwrap();
                    for (a, b) in oracle.values().iter().zip(fast.values()) {
                        assert_close(*b, *a, 1e-9 * (1.0 + a.abs()));
                    }
                }
            }
        }
    }

    #[test]
    fn reversal_negates_and_reverses() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..20 {
            let n = rng.random_range(2..40);
            let series = random_series(&mut rng, n);
            let reversed: Vec<f64> = series.iter().rev().copied().collect();
            for kernel in [Kernel::Cusum, Kernel::Wilcoxon, Kernel::Sign] {
                let fwd = UProcess::incremental(&series, kernel).unwrap();
                let rev = UProcess::incremental(&reversed, kernel).unwrap();
                for k in 1..n {
                    let want = -fwd.values()[n - k - 1]; // -U_{n-k}
                    let got = rev.values()[k - 1];
                    assert_close(got, want, 1e-9 * (1.0 + want.abs()));
                }
            }
        }
    }

    #[test]
    fn hoeffding_split_identity() {
        // U_k = (n−k) Σ_{i≤k} ĥ₁(X_i) − k Σ_{i>k} ĥ₁(X_i) + Σ_{i≤k} Σ_{j>k} Ψ̂(X_i, X_j)
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let n = rng.random_range(3..25);
            let series = random_series(&mut rng, n);
            for kernel in [Kernel::Cusum, Kernel::Wilcoxon] {
                let up = UProcess::oracle(&series, kernel).unwrap();
                let parts = crate::kernel::hoeffding_decompose(kernel, &series).unwrap();
                for k in 1..n {
                    let head: f64 = parts.h1()[..k].iter().sum();
                    let tail: f64 = parts.h1()[k..].iter().sum();
                    let mut deg = 0.0;
                    for i in 0..k {
                        for j in k..n {
                            deg += parts.psi(i, j);
                        }
                    }
                    let rebuilt = (n - k) as f64 * head - k as f64 * tail + deg;
                    let want = up.values()[k - 1];
                    assert_close(rebuilt, want, 1e-9 * (1.0 + want.abs()));
                }
            }
        }
    }

    #[test]
    fn shift_and_monotone_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let series = random_series(&mut rng, 30);
        let shifted: Vec<f64> = series.iter().map(|x| x + 17.25).collect();
        for kernel in [Kernel::Cusum, Kernel::Wilcoxon] {
            let base = UProcess::incremental(&series, kernel).unwrap();
            let moved = UProcess::incremental(&shifted, kernel).unwrap();
            for (a, b) in base.values().iter().zip(moved.values()) {
                assert_close(*b, *a, 1e-9 * (1.0 + a.abs()));
            }
        }
        // Wilcoxon is additionally invariant under strictly increasing maps.
        let warped: Vec<f64> = series.iter().map(|x| (x * 0.3).exp() + x.powi(3)).collect();
        let base = UProcess::rank_fast(&series).unwrap();
        let moved = UProcess::rank_fast(&warped).unwrap();
        assert_eq!(base.values(), moved.values());
    }

    #[test]
    fn weighted_scan_examples() {
        let up = UProcess {
            values: vec![2.0, 4.0, 2.0],
            n: 4,
            kernel: Kernel::Cusum,
            strategy: Strategy::Oracle,
        };
        let half = up.weighted_scan(0.5).unwrap();
        assert_close(half.max_value, 1.0, 1e-12); // 4 / sqrt(2·2·4)
        assert_eq!(half.argmax_k, 2);
        let flat = up.weighted_scan(0.0).unwrap();
        assert_close(flat.max_value, 0.5, 1e-12); // 4 / 4^{3/2}
        assert_eq!(flat.argmax_k, 2);

        let zeros = UProcess {
            values: vec![0.0; 3],
            n: 4,
            kernel: Kernel::Cusum,
            strategy: Strategy::Oracle,
        };
        let scan = zeros.weighted_scan(0.5).unwrap();
        assert_eq!(scan.max_value, 0.0);
        assert_eq!(scan.argmax_k, 1); // tie-break: smallest k
    }

    #[test]
    fn weighted_scan_general_gamma_matches_closed_forms() {
        let up = UProcess::incremental(&[0.0, 0.0, 1.0, 1.0], Kernel::Cusum).unwrap();
        // gamma = 0.25 at k = 2, n = 4: (1/4)^{-1/4} · 4^{-3/2} · 4
        let scan = up.weighted_scan(0.25).unwrap();
        assert_close(scan.max_value, 0.25f64.powf(-0.25) * 4.0 / 8.0, 1e-12);
        assert!(up.weighted_scan(0.6).is_err());
        assert!(up.weighted_scan(-0.1).is_err());
    }

    #[test]
    fn partial_sums_examples() {
        assert_eq!(partial_sums(&[1.0, -1.0, 2.0]).unwrap(), vec![1.0, 0.0, 2.0]);
        assert_eq!(partial_sums(&[0.0; 3]).unwrap(), vec![0.0; 3]);
        assert_eq!(partial_sums(&[4.5]).unwrap(), vec![4.5]);
        assert!(partial_sums(&[]).is_err());
    }

    #[test]
    fn tied_down_scan_examples() {
        let sums = partial_sums(&[-1.0, -1.0, 1.0, 1.0]).unwrap();
        let scan = tied_down_scan(&sums).unwrap();
        assert_close(scan.max_value, 2.0, 1e-12);
        assert_eq!(scan.argmax_k, 2);

        // constant increments: the bridge is identically zero
        let sums = partial_sums(&[2.0; 6]).unwrap();
        let scan = tied_down_scan(&sums).unwrap();
        assert_eq!(scan.max_value, 0.0);
        assert_eq!(scan.argmax_k, 1);

        // n = 2: single k, sqrt(2/1)·|s1 − s2/2|
        let scan = tied_down_scan(&[3.0, 4.0]).unwrap();
        assert_close(scan.max_value, 2.0f64.sqrt() * (3.0 - 2.0), 1e-12);
        assert_eq!(scan.argmax_k, 1);

        assert!(tied_down_scan(&[1.0]).is_err());
    }

    #[test]
    fn tied_down_equals_weighted_cusum() {
        // U_k for the CUSUM kernel is −n (S_k − (k/n) S_n), so the weighted
        // U-scan and the tied-down walk scan are the same statistic.
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..10 {
            let n = rng.random_range(2..50);
            let series = random_series(&mut rng, n);
            let up = UProcess::incremental(&series, Kernel::Cusum).unwrap();
            let a = up.weighted_scan(0.5).unwrap();
            let b = tied_down_scan(&partial_sums(&series).unwrap()).unwrap();
            assert_close(a.max_value, b.max_value, 1e-9 * (1.0 + b.max_value));
            assert_eq!(a.argmax_k, b.argmax_k);
        }
    }

    #[test]
    fn darling_erdos_scan_examples() {
        // candidates |1|/√1, |0|/√2, |2|/√3 — the last one wins
        let scan = darling_erdos_scan(&[1.0, 0.0, 2.0]).unwrap();
        assert_close(scan.max_value, 2.0 / 3.0f64.sqrt(), 1e-12);
        assert_eq!(scan.argmax_k, 3);

        let scan = darling_erdos_scan(&[0.0; 4]).unwrap();
        assert_eq!(scan.max_value, 0.0);
        assert_eq!(scan.argmax_k, 1);

        let scan = darling_erdos_scan(&[0.0, 0.0, 3.0]).unwrap();
        assert_close(scan.max_value, 3.0f64.sqrt(), 1e-12);
        assert_eq!(scan.argmax_k, 3);

        assert!(darling_erdos_scan(&[]).is_err());
    }

    #[test]
    fn partial_sum_weighting_inequality() {
        // max_k |Σ_{j≤k} a_j √j| / √k  ≤  2 max_k |Σ_{j≤k} a_j|
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        for _ in 0..1000 {
            let n = rng.random_range(1..=100);
            let a = random_series(&mut rng, n);
            let mut weighted_sum = 0.0;
            let mut plain_sum = 0.0;
            let mut lhs = f64::NEG_INFINITY;
            let mut rhs = f64::NEG_INFINITY;
            for (idx, &aj) in a.iter().enumerate() {
                let j = (idx + 1) as f64;
                weighted_sum += aj * j.sqrt();
                plain_sum += aj;
                lhs = lhs.max(weighted_sum.abs() / j.sqrt());
                rhs = rhs.max(plain_sum.abs());
            }
            assert!(lhs <= 2.0 * rhs + 1e-9 * (1.0 + rhs));
        }
    }
}
