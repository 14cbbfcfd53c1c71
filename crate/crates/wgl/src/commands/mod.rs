//! Subcommand implementations. Each one turns a validated manifest into a
//! [`Report`]: CSV tables, a JSON summary and a list of pass/fail checks.

use std::sync::Arc;

use serde::Serialize;
use serde_json::Value;
use wgl_core::grid::{build_grid, Grid, WaveguideSpec};

use crate::error::{CliError, Result};
use crate::manifest::ExperimentManifest;
use crate::output::{write_csv, write_json, Table};
use crate::pool::Pool;

pub mod constants;
pub mod counting;
pub mod extremizers;
pub mod kernel;
pub mod levelset;
pub mod nls;
pub mod optimize;
pub mod snorm;
pub mod weyl;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub pass: bool,
    pub detail: String,
    /// Wall time, shown on the verdict line but kept out of the JSON.
    #[serde(skip)]
    pub elapsed: Option<f64>,
}

impl Check {
    pub fn new(label: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            pass,
            detail: detail.into(),
            elapsed: None,
        }
    }

    pub fn line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        match self.elapsed {
            Some(s) => format!("{verdict} {}: {} ({s:.1} s)", self.label, self.detail),
            None => format!("{verdict} {}: {}", self.label, self.detail),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub tables: Vec<(String, Table)>,
    pub summary: Value,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn run(man: &ExperimentManifest, pool: &Pool) -> Result<Report> {
    man.validate()?;
    match man.command.as_str() {
        "constants" => constants::run(man, pool),
        "extremizers" => extremizers::run(man, pool),
        "kernel" => kernel::run(man),
        "weyl" => weyl::run(man),
        "counting" => counting::run(man),
        "levelset" => levelset::run(man, pool),
        "optimize" => optimize::run(man, pool),
        "snorm" => snorm::run(man, pool),
        "nls" => nls::run(man),
        "accept" => crate::accept::run(man, pool),
        other => Err(CliError::Schema(format!("unknown command {other:?}"))),
    }
}

/// Writes the manifest, the tables and `summary.json` under `out_dir`.
pub fn emit(man: &ExperimentManifest, report: &Report) -> Result<()> {
    let dir = &man.out_dir;
    write_json(&dir.join("manifest.json"), man)?;
    for (name, table) in &report.tables {
        write_csv(&dir.join(name), table)?;
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        command: &'a str,
        seed: u64,
        pass: bool,
        checks: &'a [Check],
        result: &'a Value,
    }
    write_json(
        &dir.join(format!("{}.json", man.command)),
        &Summary {
            command: &man.command,
            seed: man.seed,
            pass: report.passed(),
            checks: &report.checks,
            result: &report.summary,
        },
    )
}

pub(crate) fn first_or<T: Copy>(xs: &[T], default: T) -> T {
    xs.first().copied().unwrap_or(default)
}

pub(crate) fn list_or(xs: &[f64], default: &[f64]) -> Vec<f64> {
    if xs.is_empty() {
        default.to_vec()
    } else {
        xs.to_vec()
    }
}

pub(crate) fn dims_of(man: &ExperimentManifest, m: usize, n: usize) -> (usize, usize) {
    (first_or(&man.params.m, m), first_or(&man.params.n, n))
}

/// Smallest supported axis length with `len / (2 period) >= reach`.
pub(crate) fn axis_len(reach: f64, period: f64) -> usize {
    let need = (2.0 * period * reach).ceil().max(2.0) as usize;
    (1..48)
        .flat_map(|k| [1usize << k, 3usize << k])
        .filter(|&l| l >= need)
        .min()
        .expect("length fits in usize")
}

/// Grid on `R^m x T^n` with box length `box_length` resolving frequency `reach`.
pub(crate) fn grid_for(m: usize, n: usize, reach: f64, box_length: f64) -> Result<Arc<Grid>> {
    let mut dims = vec![axis_len(reach, box_length); m];
    dims.extend(std::iter::repeat_n(axis_len(reach, 1.0), n));
    let spec = WaveguideSpec::new(m, n, box_length, &dims)?;
    Ok(Arc::new(build_grid(&spec, None)?))
}

pub(crate) fn num(x: f64) -> String {
    crate::output::num(x)
}
