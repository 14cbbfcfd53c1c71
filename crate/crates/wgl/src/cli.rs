//! Command-line flags and their translation into a manifest.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::error::{CliError, Result};
use crate::manifest::{ExperimentManifest, Params};
use crate::pool::Pool;

#[derive(Debug, Parser)]
#[command(name = "wgl", version, about = "Long-time Strichartz numerics on waveguides R^m x T^n")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Euclidean dimensions
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<usize>,
    /// Torus dimensions
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Exponents p
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// Time horizons T
    #[arg(long = "T", value_delimiter = ',')]
    pub t: Vec<f64>,
    /// Frequency cutoffs N
    #[arg(long = "N", value_delimiter = ',')]
    pub cutoff: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// quick or full
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Slack on fitted log-log slopes
    #[arg(long)]
    pub tol_slope: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Command option as KEY=VALUE; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Tolerance override as KEY=VALUE; repeatable
    #[arg(long = "tol", value_name = "KEY=VALUE")]
    pub tol: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lower estimates of C(p, T, N) and slope verdicts
    Constants {
        #[command(flatten)]
        common: Common,
        /// probes, ascent or both
        #[arg(long)]
        strategy: Option<String>,
        /// Theory source for the upper slope (C0, C1, C2, C3, P4)
        #[arg(long)]
        source: Option<String>,
    },
    /// Ratios of the saturating families and their slopes
    Extremizers {
        #[command(flatten)]
        common: Common,
        /// Comma list of phi1, phi2, phi3
        #[arg(long)]
        family: Option<String>,
    },
    /// Kernel envelopes per regime, and the J split with --A
    Kernel {
        #[command(flatten)]
        common: Common,
        /// R2T, RT2 or both
        #[arg(long)]
        variant: Option<String>,
        /// Comma list of scales A, e.g. 1/128,1/64
        #[arg(long = "A")]
        a: Option<String>,
    },
    /// Weyl sums near rationals against the envelope
    Weyl {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        qmax: Option<u32>,
    },
    /// r2 oracles and the shell measure sum
    Counting {
        #[command(flatten)]
        common: Common,
        /// Run the reference sweep, ignoring --T and --N
        #[arg(long)]
        selftest: bool,
    },
    /// Layer-cake identity (random) or decay constants (phi3)
    Levelset {
        #[command(flatten)]
        common: Common,
        /// random or phi3
        #[arg(long)]
        data: Option<String>,
    },
    /// Gradient check, probes and ascent
    Optimize {
        #[command(flatten)]
        common: Common,
    },
    /// Long-time Strichartz S-norms across N
    Snorm {
        #[command(flatten)]
        common: Common,
    },
    /// Split-step NLS checks and growth run
    Nls {
        #[command(flatten)]
        common: Common,
        /// all, properties or growth
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
    },
    /// The acceptance suite
    Accept {
        #[command(flatten)]
        common: Common,
        /// Comma list of criteria to run
        #[arg(long)]
        only: Option<String>,
    },
    /// Run a JSON manifest
    Run {
        manifest: PathBuf,
        /// Write outputs here instead of the manifest's out_dir
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn key_values(items: &[String]) -> Result<Vec<(String, String)>> {
    items
        .iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| CliError::Schema(format!("expected KEY=VALUE, got {s:?}")))
        })
        .collect()
}

fn build(name: &str, c: Common, extra: Vec<(&str, Option<String>)>) -> Result<ExperimentManifest> {
    let mut options: BTreeMap<String, String> = key_values(&c.set)?.into_iter().collect();
    for (k, v) in extra {
        if let Some(v) = v {
            options.insert(k.into(), v);
        }
    }
    let params = Params {
        m: c.m,
        n: c.n,
        p: c.p,
        t: c.t,
        cutoff: c.cutoff,
        dt: c.dt,
        profile: c.profile,
        options,
    };
    let mut man = ExperimentManifest::new(name, params, c.seed, c.out);
    for (k, v) in key_values(&c.tol)? {
        let x = v.parse().map_err(|_| CliError::Schema(format!("tolerance {k} = {v:?}")))?;
        man.tolerances.insert(k, x);
    }
    if let Some(s) = c.tol_slope {
        man.tolerances.insert("slope".into(), s);
    }
    man.validate()?;
    Ok(man)
}

impl Command {
    pub fn into_manifest(self) -> Result<ExperimentManifest> {
        use Command::*;
        match self {
            Constants { common, strategy, source } => build("constants", common, vec![("strategy", strategy), ("source", source)]),
            Extremizers { common, family } => build("extremizers", common, vec![("family", family)]),
            Kernel { common, variant, a } => build("kernel", common, vec![("variant", variant), ("A", a)]),
            Weyl { common, qmax } => build("weyl", common, vec![("qmax", qmax.map(|q| q.to_string()))]),
            Counting { common, selftest } => build("counting", common, vec![("selftest", selftest.then(|| "true".into()))]),
            Levelset { common, data } => build("levelset", common, vec![("data", data)]),
            Optimize { common } => build("optimize", common, vec![]),
            Snorm { common } => build("snorm", common, vec![]),
            Nls { common, mode, mu, s } => build(
                "nls",
                common,
                vec![("mode", mode), ("mu", mu.map(|x| x.to_string())), ("s", s.map(|x| x.to_string()))],
            ),
            Accept { common, only } => build("accept", common, vec![("only", only)]),
            Run { manifest, out } => {
                let mut man = ExperimentManifest::from_json(&std::fs::read_to_string(&manifest)?)?;
                if let Some(o) = out {
                    man.out_dir = o;
                }
                Ok(man)
            }
        }
    }
}

/// Runs a manifest, writes its outputs and prints one line per check.
/// Exit status: 0 all checks pass, 1 some check fails, 2 error.
pub fn execute(man: &ExperimentManifest, pool: &Pool) -> i32 {
    let report = match commands::run(man, pool) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(e) = commands::emit(man, &report) {
        eprintln!("error: {e}");
        return 2;
    }
    for c in &report.checks {
        println!("{}", c.line());
    }
    if report.passed() {
        0
    } else {
        1
    }
}
