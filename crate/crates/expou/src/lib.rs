//! Files, configuration and command-line front end for `expou-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN.

pub mod commands;
pub mod config;
pub mod exec;
pub mod format;
pub mod quotes;

pub use commands::CliError;
pub use config::{Resolved, RunConfig};
pub use exec::Rayon;
