//! Experiment driver for `wgl-core`: manifests, seeded sweeps, CSV/JSON
//! outputs and the acceptance suite.

pub mod accept;
pub mod cli;
pub mod commands;
pub mod error;
pub mod manifest;
pub mod output;
pub mod pool;
pub mod seed;

pub use error::{CliError, Result};
