//! Command-line front end for `bergman-core`: configuration, sweeps,
//! structured output and the acceptance gate.

// `!(x > 0.0)` is used on purpose so that NaN is rejected along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod criteria;
pub mod error;
pub mod output;
pub mod runners;

pub use config::{Command, ExperimentConfig, Format};
pub use error::{HResult, HarnessError};
