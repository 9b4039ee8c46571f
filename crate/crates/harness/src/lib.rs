//! Synthetic experiments, metrics, benchmarks and the `outreg` CLI.
//!
//! Random data comes from `ChaCha8Rng::seed_from_u64(seed)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod error;
pub mod generate;
pub mod io;
pub mod metrics;

pub use error::{HarnessError, Result};
