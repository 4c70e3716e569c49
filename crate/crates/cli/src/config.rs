// SPDX-License-Identifier: MIT OR Apache-2.0

//! Experiment config files: `key = value` lines, `#` comments.
//!
//! Keys mirror the experiment config fields: `n`, `runs`, `seed`,
//! `generator`, `kernel`, `gamma`, `sigma`, `bandwidth`, `window`, `alpha`,
//! plus the per-experiment lists `alphas`, `taus`, `delta`, `statistic`,
//! `n_grid`.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;
use ucpt::{
    Bandwidth, ChangeSpec, GeneratorSpec, Innovation, Kernel, LimitStatistic, LrvConfig,
    LrvWindow, McConfig, SigmaMode, TestConfig,
};

const KNOWN_KEYS: &[&str] = &[
    "n", "runs", "seed", "generator", "kernel", "gamma", "sigma", "bandwidth", "window", "alpha",
    "alphas", "delta", "taus", "statistic", "n_grid",
];

/// Raw `key = value` pairs with their line numbers, for field-level errors.
pub struct RawConfig {
    path: String,
    entries: BTreeMap<String, (usize, String)>,
}

pub fn parse_file(path: &Path) -> Result<RawConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|err| format!("cannot read {}: {err}", path.display()))?;
    let mut entries = BTreeMap::new();
    for (index, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = index + 1;
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!(
                "{}: line {lineno}: expected `key = value`, got {line:?}",
                path.display()
            ));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(format!(
                "{}: line {lineno}: unknown key `{key}` (known: {})",
                path.display(),
                KNOWN_KEYS.join(", ")
            ));
        }
        if let Some((prev, _)) = entries.insert(key.clone(), (lineno, value)) {
            return Err(format!(
                "{}: line {lineno}: key `{key}` already set on line {prev}",
                path.display()
            ));
        }
    }
    Ok(RawConfig {
        path: path.display().to_string(),
        entries,
    })
}

impl RawConfig {
    fn get(&self, key: &str) -> Option<&(usize, String)> {
        self.entries.get(key)
    }

    fn require(&self, key: &str) -> Result<&(usize, String), String> {
        self.get(key)
            .ok_or_else(|| format!("{}: missing required key `{key}`", self.path))
    }

    fn bad(&self, key: &str, lineno: usize, value: &str, expected: &str) -> String {
        format!(
            "{}: line {lineno}: invalid `{key}` value {value:?} (expected {expected})",
            self.path
        )
    }

    fn parse_num<T: FromStr>(&self, key: &str, expected: &str) -> Result<T, String> {
        let (lineno, value) = self.require(key)?;
        value
            .parse()
            .map_err(|_| self.bad(key, *lineno, value, expected))
    }

    fn parse_num_opt<T: FromStr>(&self, key: &str, expected: &str) -> Result<Option<T>, String> {
        match self.get(key) {
            None => Ok(None),
            Some((lineno, value)) => value
                .parse()
                .map(Some)
                .map_err(|_| self.bad(key, *lineno, value, expected)),
        }
    }

    fn parse_list(&self, key: &str, expected: &str) -> Result<Vec<f64>, String> {
        let (lineno, value) = self.require(key)?;
        value
            .split(',')
            .map(|item| item.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|_| self.bad(key, *lineno, value, expected))
    }

    pub fn generator(&self) -> Result<GeneratorSpec, String> {
        let (lineno, value) = self.require("generator")?;
        parse_generator(value)
            .ok_or_else(|| self.bad("generator", *lineno, value,
                "iid_normal | iid_t(DF) | ar1(PHI, normal) | ar1(PHI, t(DF))"))
    }

    pub fn kernel(&self) -> Result<Kernel, String> {
        let (lineno, value) = self.require("kernel")?;
        value
            .parse()
            .map_err(|_| self.bad("kernel", *lineno, value, "cusum | wilcoxon | sign"))
    }

    pub fn sigma(&self) -> Result<SigmaMode, String> {
        let (lineno, value) = self.require("sigma")?;
        if value == "estimate" {
            let bandwidth = match self.get("bandwidth") {
                None => Bandwidth::Auto,
                Some((bl, bv)) if bv == "auto" => {
                    let _ = bl;
                    Bandwidth::Auto
                }
                Some((bl, bv)) => Bandwidth::Fixed(
                    bv.parse()
                        .map_err(|_| self.bad("bandwidth", *bl, bv, "auto or an integer"))?,
                ),
            };
            let window = match self.get("window") {
                None => LrvWindow::Bartlett,
                Some((_, wv)) if wv == "bartlett" => LrvWindow::Bartlett,
                Some((_, wv)) if wv == "truncated" => LrvWindow::Truncated,
                Some((wl, wv)) => {
                    return Err(self.bad("window", *wl, wv, "bartlett | truncated"));
                }
            };
            Ok(SigmaMode::Estimate(LrvConfig { bandwidth, window }))
        } else {
            let sigma: f64 = value
                .parse()
                .map_err(|_| self.bad("sigma", *lineno, value, "a positive number or `estimate`"))?;
            Ok(SigmaMode::Known(sigma))
        }
    }

    pub fn statistic(&self) -> Result<LimitStatistic, String> {
        let (lineno, value) = self.require("statistic")?;
        match value.as_str() {
            "darling_erdos" => Ok(LimitStatistic::DarlingErdos),
            "tied_down" => Ok(LimitStatistic::TiedDown),
            _ => Err(self.bad("statistic", *lineno, value, "darling_erdos | tied_down")),
        }
    }

    pub fn alphas(&self) -> Result<Vec<f64>, String> {
        self.parse_list("alphas", "comma-separated probabilities")
    }

    pub fn taus(&self) -> Result<Vec<f64>, String> {
        self.parse_list("taus", "comma-separated fractions in (0, 1)")
    }

    pub fn n_grid(&self) -> Result<Vec<usize>, String> {
        let (lineno, value) = self.require("n_grid")?;
        value
            .split(',')
            .map(|item| item.trim().parse::<usize>())
            .collect::<Result<Vec<usize>, _>>()
            .map_err(|_| self.bad("n_grid", *lineno, value, "comma-separated sample sizes"))
    }
}

fn parse_generator(text: &str) -> Option<GeneratorSpec> {
    let text = text.trim();
    if text == "iid_normal" {
        return Some(GeneratorSpec::IidNormal);
    }
    if let Some(args) = strip_call(text, "iid_t") {
        return Some(GeneratorSpec::IidT {
            df: args.trim().parse().ok()?,
        });
    }
    if let Some(args) = strip_call(text, "ar1") {
        let (phi, innovation) = args.split_once(',')?;
        let phi: f64 = phi.trim().parse().ok()?;
        let innovation = innovation.trim();
        let innovation = if innovation == "normal" {
            Innovation::Normal
        } else {
            Innovation::T {
                df: strip_call(innovation, "t")?.trim().parse().ok()?,
            }
        };
        return Some(GeneratorSpec::Ar1 { phi, innovation });
    }
    None
}

fn strip_call<'a>(text: &'a str, name: &str) -> Option<&'a str> {
    text.strip_prefix(name)?
        .trim_start()
        .strip_prefix('(')?
        .strip_suffix(')')
}

/// Which fields an experiment needs beyond the common core.
#[derive(Clone, Copy)]
pub enum Experiment {
    CriticalValues,
    Size,
    Power,
    Limits,
    Degenerate,
}

pub struct ExperimentPlan {
    pub config: McConfig,
    pub alphas: Vec<f64>,
    pub taus: Vec<f64>,
    pub statistic: Option<LimitStatistic>,
    pub n_grid: Vec<usize>,
}

/// Builds the experiment inputs, applying `--seed`/`--runs` overrides.
pub fn build_plan(
    raw: &RawConfig,
    experiment: Experiment,
    seed_override: Option<u64>,
    runs_override: Option<usize>,
) -> Result<ExperimentPlan, String> {
    let runs = match runs_override {
        Some(runs) => runs,
        None => raw.parse_num("runs", "a positive integer")?,
    };
    let seed = match seed_override {
        Some(seed) => seed,
        None => raw.parse_num("seed", "a 64-bit integer")?,
    };
    let generator = raw.generator()?;

    let needs_test = !matches!(experiment, Experiment::Limits | Experiment::Degenerate);
    let kernel = if needs_test || matches!(experiment, Experiment::Degenerate) {
        raw.kernel()?
    } else {
        Kernel::Cusum
    };
    let gamma = if needs_test {
        raw.parse_num("gamma", "a number in [0, 0.5]")?
    } else {
        raw.parse_num_opt("gamma", "a number in [0, 0.5]")?.unwrap_or(0.5)
    };
    let sigma = if needs_test || matches!(experiment, Experiment::Limits) {
        match raw.get("sigma") {
            Some(_) => raw.sigma()?,
            None if matches!(experiment, Experiment::Limits) => SigmaMode::Known(1.0),
            None => return Err(format!("{}: missing required key `sigma`", raw.path)),
        }
    } else {
        SigmaMode::Known(1.0)
    };
    let alpha = match experiment {
        Experiment::Size | Experiment::Power => raw.parse_num("alpha", "a probability")?,
        _ => raw
            .parse_num_opt("alpha", "a probability")?
            .unwrap_or(0.05),
    };

    let n_grid = match experiment {
        Experiment::Degenerate => raw.n_grid()?,
        _ => Vec::new(),
    };
    let n = match raw.parse_num_opt("n", "a positive integer")? {
        Some(n) => n,
        None if matches!(experiment, Experiment::Degenerate) => {
            *n_grid.first().ok_or_else(|| {
                format!("{}: n_grid must be non-empty", raw.path)
            })?
        }
        None => return Err(format!("{}: missing required key `n`", raw.path)),
    };

    let change = match experiment {
        Experiment::Power => {
            let delta = raw.parse_num("delta", "a shift height")?;
            // k_star is derived per tau by the experiment; spell a valid placeholder
            Some(ChangeSpec { k_star: 1, delta })
        }
        _ => None,
    };

    let plan = ExperimentPlan {
        config: McConfig {
            n,
            runs,
            seed,
            generator,
            change,
            test: TestConfig {
                kernel,
                gamma,
                sigma,
                alpha,
            },
        },
        alphas: match experiment {
            Experiment::CriticalValues => raw.alphas()?,
            _ => Vec::new(),
        },
        taus: match experiment {
            Experiment::Power => raw.taus()?,
            _ => Vec::new(),
        },
        statistic: match experiment {
            Experiment::Limits => Some(raw.statistic()?),
            _ => None,
        },
        n_grid,
    };
    Ok(plan)
}
