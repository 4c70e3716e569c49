// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded series generators and mean-shift injection.

use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

/// Identifies the replicate-substream contract baked into every report:
/// ChaCha8 keyed by the experiment seed, one fixed stream per replicate.
pub const RNG_ID: &str = "chacha8-stream-per-replicate/v1";

/// Steps discarded before recording an AR(1) path whose stationary law has
/// no closed form (non-normal innovations).
const AR1_BURN_IN: usize = 100;

/// Innovation distribution for the AR(1) generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Innovation {
    Normal,
    T { df: u32 },
}

/// A stationary data-generating process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// i.i.d. standard normal observations.
    IidNormal,
    /// i.i.d. Student-t observations, unstandardized; `df > 2` so the
    /// variance `df/(df−2)` exists.
    IidT { df: u32 },
    /// `X_i = φ X_{i−1} + ε_i` with `|φ| < 1`, the short-range dependent
    /// exemplar. Normal innovations start from the exact stationary law;
    /// other innovations use a burn-in.
    Ar1 { phi: f64, innovation: Innovation },
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GeneratorSpec::IidNormal => Ok(()),
            GeneratorSpec::IidT { df } => check_df(df),
            GeneratorSpec::Ar1 { phi, innovation } => {
                if !(phi.is_finite() && phi.abs() < 1.0) {
                    return Err(Error::OutOfRange {
                        name: "phi",
                        value: phi,
                        expected: "|phi| < 1",
                    });
                }
                match innovation {
                    Innovation::Normal => Ok(()),
                    Innovation::T { df } => check_df(df),
                }
            }
        }
    }
}

fn check_df(df: u32) -> Result<()> {
    if df <= 2 {
        return Err(Error::OutOfRange {
            name: "df",
            value: df as f64,
            expected: "df > 2 so the variance exists",
        });
    }
    Ok(())
}

/// A single shift in mean: `delta` is added to observations `k_star+1..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangeSpec {
    /// Last index (1-based) of the pre-change segment; in `1..=n−1`.
    pub k_star: usize,
    /// Shift height in observation units.
    pub delta: f64,
}

/// The RNG for replicate substream `stream` of an experiment keyed by `seed`.
pub fn replicate_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws `n` observations from `spec`; deterministic given the RNG state.
pub fn generate(spec: &GeneratorSpec, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::TooShort {
            op: "generate",
            min: 1,
            got: 0,
        });
    }
    let series = match *spec {
        GeneratorSpec::IidNormal => (0..n)
            .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
            .collect(),
        GeneratorSpec::IidT { df } => {
            let t = StudentT::new(df as f64).expect("validated df");
            (0..n).map(|_| t.sample(rng)).collect()
        }
        GeneratorSpec::Ar1 { phi, innovation } => {
            let mut out = Vec::with_capacity(n);
            match innovation {
                Innovation::Normal => {
                    // exact stationary start: X_1 ~ N(0, 1/(1−φ²))
                    let scale = (1.0 - phi * phi).sqrt().recip();
                    let mut x: f64 =
                        <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng) * scale;
                    out.push(x);
                    for _ in 1..n {
                        let eps: f64 =
                            <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng);
                        x = phi * x + eps;
                        out.push(x);
                    }
                }
                Innovation::T { df } => {
                    let t = StudentT::new(df as f64).expect("validated df");
                    let mut x = 0.0;
                    for _ in 0..AR1_BURN_IN {
                        x = phi * x + t.sample(rng);
                    }
                    for _ in 0..n {
                        x = phi * x + t.sample(rng);
                        out.push(x);
                    }
                }
            }
            out
        }
    };
    Ok(series)
}

/// Adds `change.delta` to observations after position `change.k_star`.
pub fn inject_change(series: &mut [f64], change: &ChangeSpec) -> Result<()> {
    let n = series.len();
    if change.k_star == 0 || change.k_star >= n {
        return Err(Error::OutOfRange {
            name: "k_star",
            value: change.k_star as f64,
            expected: "1 <= k_star <= n - 1",
        });
    }
    for x in &mut series[change.k_star..] {
        *x += change.delta;
    }
    Ok(())
}
