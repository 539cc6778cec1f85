//! Library side of the `matchlab` binary: run configuration, CSV tables,
//! acceptance checks and the reproduction bundle.

pub mod bundle;
pub mod checks;
pub mod config;
pub mod tables;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20180619;
