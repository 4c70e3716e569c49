// SPDX-License-Identifier: MIT OR Apache-2.0

//! Cross-module properties: limit-law diagnostics against their Gumbel
//! targets, report determinism, and serialization round trips.

use ucpt::*;

const SEED: u64 = 20260808;

fn diag_config(n: usize, runs: usize) -> McConfig {
    McConfig {
        n,
        runs,
        seed: SEED,
        generator: GeneratorSpec::IidNormal,
        change: None,
        test: TestConfig::with_known_sigma(Kernel::Cusum, 0.5, 1.0),
    }
}

fn cell<'a>(report: &'a McReport, label: &str) -> &'a McCell {
    report
        .cells
        .iter()
        .find(|c| c.label == label)
        .unwrap_or_else(|| panic!("no cell {label}"))
}

#[test]
fn tied_down_quantile_tracks_weighted_cusum_table() {
    // The tied-down scan of an iid N(0,1) walk is the weighted CUSUM with
    // sigma = 1, so its 0.95-quantile at n=800 reproduces the same
    // finite-sample critical value (2.82 in 20000-run studies).
    let report = mc_limit_diagnostic(&diag_config(800, 2000), LimitStatistic::TiedDown).unwrap();
    let q95 = cell(&report, "q0.95").estimate;
    assert!(
        (q95 - 2.82).abs() <= 0.08,
        "tied-down q95 at n=800: {q95}, want 2.82±0.08"
    );
}

#[test]
fn tied_down_sup_distance_decreases_with_n() {
    let small = mc_limit_diagnostic(&diag_config(100, 2000), LimitStatistic::TiedDown).unwrap();
    let large = mc_limit_diagnostic(&diag_config(800, 2000), LimitStatistic::TiedDown).unwrap();
    let sup_small = cell(&small, "sup_distance").estimate;
    let sup_large = cell(&large, "sup_distance").estimate;
    assert!(
        sup_large < sup_small,
        "sup distance did not shrink: {sup_small} (n=100) vs {sup_large} (n=800)"
    );
    // log log convergence is slow; both are still visibly off the limit
    assert!(sup_small < 0.2 && sup_large > 0.01);
}

#[test]
fn darling_erdos_median_approaches_gumbel_median() {
    let report =
        mc_limit_diagnostic(&diag_config(10_000, 2000), LimitStatistic::DarlingErdos).unwrap();
    let median = cell(&report, "q0.5").estimate;
    let gumbel1_median = -f64::ln(f64::ln(2.0)); // 0.36651…
    assert!(
        (median - gumbel1_median).abs() <= 0.5,
        "darling-erdos median at n=1e4: {median}, gumbel median {gumbel1_median}"
    );
}

#[test]
fn unweighted_cusum_critical_values_at_n400() {
    // 20000-run studies report 1.33 (alpha = 0.05) and 1.20 (alpha = 0.10)
    // for the unweighted CUSUM at n = 400.
    let mut config = diag_config(400, 5000);
    config.test = TestConfig::with_known_sigma(Kernel::Cusum, 0.0, 1.0);
    let report = mc_critical_values(&config, &[0.05, 0.10]).unwrap();
    let q95 = report.cells[0].estimate;
    let q90 = report.cells[1].estimate;
    assert!((q95 - 1.33).abs() <= 0.04, "q95 at n=400: {q95}");
    assert!((q90 - 1.20).abs() <= 0.04, "q90 at n=400: {q90}");
}

#[test]
fn power_curve_deterministic_across_thread_counts() {
    let mut config = diag_config(60, 300);
    config.test = TestConfig::with_known_sigma(Kernel::Wilcoxon, 0.5, 1.0);
    config.change = Some(ChangeSpec {
        k_star: 1,
        delta: 0.8,
    });
    let taus = [0.25, 0.5];
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| mc_power_curve(&config, &taus).unwrap());
    let multi = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| mc_power_curve(&config, &taus).unwrap());
    assert_eq!(single.cells, multi.cells);
    assert_eq!(single.to_csv(), multi.to_csv());
}

#[test]
fn report_round_trips_through_json() {
    let report = mc_size(&McConfig {
        n: 50,
        runs: 100,
        seed: SEED,
        generator: GeneratorSpec::Ar1 {
            phi: 0.3,
            innovation: Innovation::T { df: 5 },
        },
        change: None,
        test: TestConfig::with_known_sigma(Kernel::Wilcoxon, 0.0, 0.3),
    })
    .unwrap();
    let json = serde_json::to_string_pretty(&report).unwrap();
    let back: McReport = serde_json::from_str(&json).unwrap();
    assert_eq!(report, back);
}

#[test]
fn outcome_round_trips_through_json() {
    let series: Vec<f64> = (0..40).map(|i| (i as f64 * 0.77).sin()).collect();
    let outcome = run_test(&series, &TestConfig::new(Kernel::Wilcoxon, 0.5)).unwrap();
    let json = serde_json::to_string(&outcome).unwrap();
    let back: TestOutcome = serde_json::from_str(&json).unwrap();
    assert_eq!(outcome, back);
}

#[test]
fn csv_is_stable_across_repeated_runs() {
    let config = diag_config(40, 200);
    let a = mc_critical_values(&config, &[0.05, 0.1]).unwrap().to_csv();
    let b = mc_critical_values(&config, &[0.05, 0.1]).unwrap().to_csv();
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some("alpha,estimate,std_error"));
    assert_eq!(a.lines().count(), 3);
}
