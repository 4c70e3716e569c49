// SPDX-License-Identifier: MIT OR Apache-2.0

//! Data generators and deterministic Monte Carlo experiments.
//!
//! Every experiment draws replicate `r` from an RNG substream derived only
//! from `(seed, r)`, so reports are bit-identical regardless of how many
//! threads run the replicates. The experiments reproduce the usual
//! simulation-study outputs: empirical critical values, empirical size at
//! asymptotic critical values, size-corrected power across change-point
//! times, and diagnostics for the partial-sum limit laws and the degenerate
//! part of the Hoeffding decomposition.

mod experiments;
mod generator;
mod report;

pub use experiments::{
    degenerate_part_diagnostic, mc_critical_values, mc_limit_diagnostic, mc_power_curve, mc_size,
    LimitStatistic, McConfig,
};
pub use generator::{
    generate, inject_change, replicate_rng, ChangeSpec, GeneratorSpec, Innovation, RNG_ID,
};
pub use report::{McCell, McReport, SCHEMA_VERSION};
