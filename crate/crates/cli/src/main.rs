// SPDX-License-Identifier: MIT OR Apache-2.0

//! `ucpt` — change-point tests on the command line.
//!
//! `ucpt detect` tests one series from a CSV file; `ucpt simulate` runs the
//! Monte Carlo experiments and writes JSON + CSV reports. Exit codes:
//! 0 = ran, 2 = usage/input error, 3 = numerical failure escalated by
//! `--strict`.

mod config;
mod csvio;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use ucpt::{
    degenerate_part_diagnostic, mc_critical_values, mc_limit_diagnostic, mc_power_curve, mc_size,
    run_test, Bandwidth, Kernel, LrvConfig, LrvWindow, McReport, SigmaMode, TestConfig,
    TestOutcome, Warning,
};

const SCHEMA_VERSION: u32 = 1;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ucpt",
    version,
    about = "Change-point tests based on weighted two-sample U-statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a series from a CSV file for a change in mean.
    Detect(DetectArgs),
    /// Run a Monte Carlo experiment from a config file.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct DetectArgs {
    /// Input CSV: one value per line, or `index,value` rows; a header line is
    /// auto-detected and blank lines are ignored.
    #[arg(long)]
    input: PathBuf,
    /// Kernel id: cusum | wilcoxon | sign.
    #[arg(long, default_value = "cusum")]
    kernel: String,
    /// Weight exponent in [0, 0.5]; 0.5 = extreme-value weighting, 0 = none.
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    /// Test level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Long-run sigma: a positive number, or `estimate`.
    #[arg(long, default_value = "estimate")]
    sigma: String,
    /// HAC bandwidth when estimating sigma (default: floor(n^(1/3))).
    #[arg(long)]
    bandwidth: Option<usize>,
    /// HAC window when estimating sigma: bartlett | truncated.
    #[arg(long, default_value = "bartlett")]
    window: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Exit 3 when the variance estimate had to be floored.
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(subcommand)]
    experiment: ExperimentCmd,
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Empirical critical values of the normalized statistic under the null.
    CriticalValues(ExperimentArgs),
    /// Empirical size at the asymptotic critical value.
    Size(ExperimentArgs),
    /// Size-corrected power across change-point times.
    Power(ExperimentArgs),
    /// Limit-law diagnostics for the partial-sum scans.
    Limits(ExperimentArgs),
    /// Degenerate-part diagnostic across sample sizes.
    Degenerate(ExperimentArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config file (`key = value` lines, `#` comments).
    #[arg(long)]
    config: PathBuf,
    /// Output path prefix; writes `<out>.json` and `<out>.csv`.
    #[arg(long)]
    out: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config replicate count.
    #[arg(long)]
    runs: Option<usize>,
    /// Worker threads for replicates (default: all cores). Output is
    /// identical for any thread count.
    #[arg(long)]
    threads: Option<usize>,
    /// Exit 3 when any replicate floored its variance estimate.
    #[arg(long)]
    strict: bool,
}

/// The `detect` JSON document: a schema version plus the test outcome fields.
#[derive(Serialize, Deserialize)]
struct DetectReport {
    schema_version: u32,
    #[serde(flatten)]
    outcome: TestOutcome,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Detect(args) => cmd_detect(args),
        Command::Simulate(args) => match args.experiment {
            ExperimentCmd::CriticalValues(a) => cmd_simulate(a, config::Experiment::CriticalValues),
            ExperimentCmd::Size(a) => cmd_simulate(a, config::Experiment::Size),
            ExperimentCmd::Power(a) => cmd_simulate(a, config::Experiment::Power),
            ExperimentCmd::Limits(a) => cmd_simulate(a, config::Experiment::Limits),
            ExperimentCmd::Degenerate(a) => cmd_simulate(a, config::Experiment::Degenerate),
        },
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn cmd_detect(args: DetectArgs) -> Result<ExitCode, String> {
    let kernel: Kernel = args.kernel.parse().map_err(|e| format!("{e}"))?;
    let sigma = parse_sigma(&args.sigma, args.bandwidth, &args.window)?;
    let config = TestConfig {
        kernel,
        gamma: args.gamma,
        sigma,
        alpha: args.alpha,
    };
    let series = csvio::read_series(&args.input)?;
    let outcome = run_test(&series, &config)
        .map_err(|e| format!("{}: {e}", args.input.display()))?;

    let floored = outcome.warnings.contains(&Warning::SigmaFloored);
    let rendered = match args.format {
        OutputFormat::Json => {
            let report = DetectReport {
                schema_version: SCHEMA_VERSION,
                outcome,
            };
            let mut json = serde_json::to_string_pretty(&report)
                .map_err(|e| format!("serialization failed: {e}"))?;
            json.push('\n');
            json
        }
        OutputFormat::Text => render_text(&outcome),
    };
    match &args.output {
        Some(path) => std::fs::write(path, rendered)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => print!("{rendered}"),
    }
    if args.strict && floored {
        eprintln!("error: variance estimate floored (strict mode)");
        return Ok(ExitCode::from(EXIT_NUMERIC));
    }
    Ok(ExitCode::SUCCESS)
}

fn render_text(outcome: &TestOutcome) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "kernel {}  gamma {}  n {}\n",
        outcome.kernel, outcome.gamma, outcome.n
    ));
    out.push_str(&format!(
        "raw max {:.6}  at k = {}\n",
        outcome.raw_max, outcome.k_hat
    ));
    out.push_str(&format!("sigma used {:.6}\n", outcome.sigma_used));
    if let Some(stat) = outcome.normalized_stat {
        out.push_str(&format!("normalized statistic {stat:.6}\n"));
    }
    if let (Some(p), Some(crit), Some(reject)) =
        (outcome.p_value, outcome.critical_value, outcome.reject)
    {
        out.push_str(&format!(
            "p-value {p:.6}  critical value {crit:.6}  reject: {reject}\n"
        ));
    }
    for warning in &outcome.warnings {
        out.push_str(&format!("warning: {warning}\n"));
    }
    out
}

fn parse_sigma(
    text: &str,
    bandwidth: Option<usize>,
    window: &str,
) -> Result<SigmaMode, String> {
    if text == "estimate" {
        let window = match window {
            "bartlett" => LrvWindow::Bartlett,
            "truncated" => LrvWindow::Truncated,
            other => return Err(format!("unknown window {other:?}, expected bartlett | truncated")),
        };
        Ok(SigmaMode::Estimate(LrvConfig {
            bandwidth: bandwidth.map_or(Bandwidth::Auto, Bandwidth::Fixed),
            window,
        }))
    } else {
        let sigma: f64 = text
            .parse()
            .map_err(|_| format!("--sigma must be a number or `estimate`, got {text:?}"))?;
        Ok(SigmaMode::Known(sigma))
    }
}

fn cmd_simulate(args: ExperimentArgs, experiment: config::Experiment) -> Result<ExitCode, String> {
    let raw = config::parse_file(&args.config)?;
    let plan = config::build_plan(&raw, experiment, args.seed, args.runs)?;

    let run = || -> Result<McReport, ucpt::Error> {
        match &experiment {
            config::Experiment::CriticalValues => mc_critical_values(&plan.config, &plan.alphas),
            config::Experiment::Size => mc_size(&plan.config),
            config::Experiment::Power => mc_power_curve(&plan.config, &plan.taus),
            config::Experiment::Limits => {
                mc_limit_diagnostic(&plan.config, plan.statistic.expect("statistic set"))
            }
            config::Experiment::Degenerate => {
                degenerate_part_diagnostic(&plan.config, &plan.n_grid)
            }
        }
    };
    let report = match args.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| format!("cannot build thread pool: {e}"))?
            .install(run),
        None => run(),
    }
    .map_err(|e| format!("{}: {e}", args.config.display()))?;

    let json_path = args.out.with_extension("json");
    let csv_path = args.out.with_extension("csv");
    write_report(&report, &json_path, &csv_path)?;

    println!(
        "{}: {} cells, seed {}, rng {}, {:.2}s",
        report.experiment,
        report.cells.len(),
        report.config.seed,
        report.rng,
        report.elapsed_secs
    );
    println!("wrote {} and {}", json_path.display(), csv_path.display());
    if report.floored_replicates > 0 {
        eprintln!(
            "warning: variance estimate floored in {} replicates",
            report.floored_replicates
        );
        if args.strict {
            return Ok(ExitCode::from(EXIT_NUMERIC));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn write_report(report: &McReport, json_path: &Path, csv_path: &Path) -> Result<(), String> {
    let mut json = serde_json::to_string_pretty(report)
        .map_err(|e| format!("serialization failed: {e}"))?;
    json.push('\n');
    std::fs::write(json_path, json)
        .map_err(|e| format!("cannot write {}: {e}", json_path.display()))?;
    std::fs::write(csv_path, report.to_csv())
        .map_err(|e| format!("cannot write {}: {e}", csv_path.display()))?;
    Ok(())
}
