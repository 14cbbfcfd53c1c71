//! Experiment manifests.
//!
//! A manifest fully determines a run together with its seed. Schema (version 1):
//!
//! ```json
//! {
//!   "schema": 1,
//!   "command": "constants",
//!   "params": { "m": [1], "n": [2], "p": [4.0], "T": [1.0], "N": [8.0, 16.0, 32.0],
//!               "dt": null, "profile": null, "options": { "strategy": "probes" } },
//!   "seed": 0,
//!   "out_dir": "out",
//!   "tolerances": { "slope": 0.1 },
//!   "version": "0.1.0"
//! }
//! ```
//!
//! `options` holds command-specific string settings; unknown top-level or
//! `params` keys are rejected.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub const COMMANDS: [&str; 10] = [
    "constants",
    "extremizers",
    "kernel",
    "weyl",
    "counting",
    "levelset",
    "optimize",
    "snorm",
    "nls",
    "accept",
];

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default)]
    pub m: Vec<usize>,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub p: Vec<f64>,
    #[serde(rename = "T", default)]
    pub t: Vec<f64>,
    #[serde(rename = "N", default)]
    pub cutoff: Vec<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub profile: Option<String>,
    #[serde(default)]
    pub options: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub schema: u32,
    pub command: String,
    pub params: Params,
    pub seed: u64,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub version: String,
}

impl ExperimentManifest {
    pub fn new(command: &str, params: Params, seed: u64, out_dir: PathBuf) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            command: command.into(),
            params,
            seed,
            out_dir,
            tolerances: BTreeMap::new(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Schema(msg));
        if self.schema != SCHEMA_VERSION {
            return bad(format!("schema version {} (expected {SCHEMA_VERSION})", self.schema));
        }
        if !COMMANDS.contains(&self.command.as_str()) {
            return bad(format!("unknown command {:?}", self.command));
        }
        let p = &self.params;
        for (name, xs) in [("p", &p.p), ("T", &p.t), ("N", &p.cutoff)] {
            if let Some(x) = xs.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                return bad(format!("{name} values must be positive and finite, got {x}"));
            }
        }
        if let Some(dt) = p.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        if let Some(pr) = &p.profile {
            if pr != "quick" && pr != "full" {
                return bad(format!("profile must be quick or full, got {pr:?}"));
            }
        }
        for (k, v) in &self.tolerances {
            if !(v.is_finite() && *v >= 0.0) {
                return bad(format!("tolerance {k} = {v}"));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn option(&self, key: &str) -> Option<&str> {
        self.params.options.get(key).map(String::as_str)
    }

    pub fn option_parse<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.option(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| CliError::Schema(format!("option {key} = {s:?} does not parse"))),
        }
    }

    pub fn tolerance(&self, key: &str, default: f64) -> f64 {
        self.tolerances.get(key).copied().unwrap_or(default)
    }

    pub fn profile(&self) -> &str {
        self.params.profile.as_deref().unwrap_or("quick")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentManifest {
        let mut params = Params {
            m: vec![1],
            n: vec![2],
            p: vec![4.0, 10.0 / 3.0],
            t: vec![1.0],
            cutoff: vec![8.0, 16.0, 32.0],
            dt: Some(1.0 / 3.0),
            ..Default::default()
        };
        params.options.insert("strategy".into(), "probes".into());
        let mut m = ExperimentManifest::new("constants", params, 42, "out".into());
        m.tolerances.insert("slope".into(), 0.15);
        m
    }

    #[test]
    fn round_trip_is_lossless() {
        let m = sample();
        let back = ExperimentManifest::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.params.p[1].to_bits(), (10.0f64 / 3.0).to_bits());
    }

    #[test]
    fn schema_violations() {
        let text = sample().to_json().unwrap();
        let unknown = text.replace("\"seed\"", "\"sede\"");
        assert!(matches!(ExperimentManifest::from_json(&unknown), Err(CliError::Schema(_))));
        let mut m = sample();
        m.command = "plot".into();
        assert!(m.validate().is_err());
        let mut m = sample();
        m.params.cutoff.push(-1.0);
        assert!(m.validate().is_err());
        let mut m = sample();
        m.schema = 2;
        assert!(m.validate().is_err());
    }
}
