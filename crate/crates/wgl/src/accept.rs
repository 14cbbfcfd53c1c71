//! The acceptance suite: twelve criteria, each a short sweep through the
//! subcommands or the core, with a PASS/FAIL verdict line.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use serde_json::{json, Value};
use wgl_core::field::PhysicalField;
use wgl_core::grid::{build_grid, WaveguideSpec};
use wgl_core::theory::continuity_sweep;

use crate::commands::{self, num, Check, Report};
use crate::error::{CliError, Result};
use crate::manifest::{ExperimentManifest, Params};
use crate::output::Table;
use crate::pool::Pool;
use crate::seed::task_rng;

pub const CRITERIA: [(u32, &str); 12] = [
    (1, "round trip, Parseval and unitarity"),
    (2, "extremizer lower-bound slopes"),
    (3, "p = 4 upper-bound slopes"),
    (4, "layer-cake identity"),
    (5, "level-set decay of phi3"),
    (6, "kernel envelopes"),
    (7, "Weyl envelope"),
    (8, "J decomposition"),
    (9, "lattice counting"),
    (10, "optimizer"),
    (11, "NLS properties and growth"),
    (12, "theory-constant continuity"),
];

struct Ctx<'a> {
    man: &'a ExperimentManifest,
    pool: &'a Pool,
    full: bool,
}

struct Outcome {
    pass: bool,
    detail: String,
    tables: Vec<(String, Table)>,
    summary: Value,
}

impl Outcome {
    fn from_report(r: Report) -> Self {
        Self {
            pass: r.passed(),
            detail: r.checks.iter().map(|c| c.line()).collect::<Vec<_>>().join("; "),
            tables: r.tables,
            summary: r.summary,
        }
    }
}

#[derive(Default)]
struct Sub {
    m: Vec<usize>,
    n: Vec<usize>,
    p: Vec<f64>,
    t: Vec<f64>,
    cutoff: Vec<f64>,
    dt: Option<f64>,
    options: Vec<(&'static str, String)>,
}

impl Ctx<'_> {
    fn sub(&self, command: &str, s: Sub) -> Result<Report> {
        let params = Params {
            m: s.m,
            n: s.n,
            p: s.p,
            t: s.t,
            cutoff: s.cutoff,
            dt: s.dt,
            profile: None,
            options: s.options.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<BTreeMap<_, _>>(),
        };
        let mut man = ExperimentManifest::new(command, params, self.man.seed, self.man.out_dir.clone());
        man.tolerances = self.man.tolerances.clone();
        commands::run(&man, self.pool)
    }
}

fn slope(summary: &Value, list: &str, key: &str) -> Result<f64> {
    summary[list][0][key]
        .as_f64()
        .ok_or_else(|| CliError::Schema(format!("no {key} in the {list} summary")))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn c1(ctx: &Ctx) -> Result<Outcome> {
    let geometries: Vec<(usize, Vec<usize>)> = if ctx.full {
        vec![(1, vec![256, 32, 32]), (2, vec![64, 64, 32])]
    } else {
        vec![(1, vec![64, 16, 16]), (2, vec![32, 32, 16])]
    };
    let tol = 1e-10;
    let mut table = Table::new(&["m", "n", "dims", "fields", "round_trip", "parseval", "unitarity", "group"]);
    let mut worst_all: f64 = 0.0;
    for (m, dims) in geometries {
        let n = dims.len() - m;
        let grid = Arc::new(build_grid(&WaveguideSpec::new(m, n, 8.0, &dims)?, None)?);
        let mut rng = task_rng(ctx.man.seed, &format!("accept/1/{m}"));
        let mut worst = [0.0f64; 4];
        for _ in 0..100 {
            let u = PhysicalField::from_fn(grid.clone(), |_| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let hat = u.forward();
            let back = hat.inverse();
            let gap = back.samples().iter().zip(u.samples()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            worst[0] = worst[0].max(gap / u.sup_abs());
            worst[1] = worst[1].max(rel(hat.l2_norm(), u.l2_norm()));
            let s: f64 = rng.random_range(-2.0..2.0);
            let t: f64 = rng.random_range(-2.0..2.0);
            let a = hat.propagate(s).propagate(t);
            worst[2] = worst[2].max(rel(a.l2_norm(), hat.l2_norm()));
            let b = hat.propagate(s + t);
            worst[3] = worst[3].max(a.axpy(Complex64::new(-1.0, 0.0), &b)?.l2_norm() / hat.l2_norm());
        }
        worst_all = worst.iter().cloned().fold(worst_all, f64::max);
        table.push(vec![
            m.to_string(),
            n.to_string(),
            dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x"),
            "100".into(),
            num(worst[0]),
            num(worst[1]),
            num(worst[2]),
            num(worst[3]),
        ]);
    }
    Ok(Outcome {
        pass: worst_all <= tol,
        detail: format!("worst relative error {worst_all:.2e} over 2 geometries x 100 fields (limit {tol:e})"),
        tables: vec![("transforms.csv".into(), table)],
        summary: json!({"worst": worst_all}),
    })
}

fn c2(ctx: &Ctx) -> Result<Outcome> {
    let phi1 = ctx.sub(
        "extremizers",
        Sub {
            m: vec![1],
            n: vec![2],
            p: vec![6.0],
            t: vec![1.0],
            cutoff: vec![8.0, 16.0, 32.0, 64.0],
            options: vec![("family", "phi1".into())],
            ..Default::default()
        },
    )?;
    let phi2 = ctx.sub(
        "extremizers",
        Sub {
            m: vec![1],
            n: vec![2],
            p: vec![4.0],
            t: vec![16.0, 64.0, 256.0],
            cutoff: vec![8.0],
            options: vec![("family", "phi2".into())],
            ..Default::default()
        },
    )?;
    let n_slope = slope(&phi1.summary, "families", "n_slope")?;
    let t_slope = slope(&phi2.summary, "families", "t_slope")?;
    let ok1 = (0.567..=0.817).contains(&n_slope);
    let ok2 = (0.075..=0.175).contains(&t_slope);
    let mut tables = Vec::new();
    for (tag, r) in [("phi1", phi1), ("phi2", phi2)] {
        for (name, t) in r.tables {
            tables.push((format!("{tag}_{name}"), t));
        }
    }
    Ok(Outcome {
        pass: ok1 && ok2,
        detail: format!("phi1 N-slope {n_slope:.4} in [0.567, 0.817]: {ok1}; phi2 T-slope {t_slope:.4} in [0.075, 0.175]: {ok2}"),
        tables,
        summary: json!({"phi1_n_slope": n_slope, "phi2_t_slope": t_slope}),
    })
}

fn constants_sweep(ctx: &Ctx, p: f64, t: Vec<f64>, cutoff: Vec<f64>) -> Result<Report> {
    ctx.sub(
        "constants",
        Sub {
            m: vec![1],
            n: vec![2],
            p: vec![p],
            t,
            cutoff,
            ..Default::default()
        },
    )
}

fn c3(ctx: &Ctx) -> Result<Outcome> {
    let by_n = constants_sweep(ctx, 4.0, vec![1.0], vec![8.0, 16.0, 32.0])?;
    let by_t = constants_sweep(ctx, 4.0, vec![4.0, 16.0, 64.0], vec![8.0])?;
    let n_slope = slope(&by_n.summary, "fits", "n_slope")?;
    let t_slope = slope(&by_t.summary, "fits", "t_slope")?;
    let ok1 = n_slope <= 0.25 + 0.15;
    let ok2 = t_slope <= 0.125 + 0.1;
    let mut tables = Vec::new();
    for (tag, r) in [("by_n", by_n), ("by_t", by_t)] {
        for (name, t) in r.tables {
            tables.push((format!("{tag}_{name}"), t));
        }
    }
    Ok(Outcome {
        pass: ok1 && ok2,
        detail: format!("N-slope {n_slope:.4} <= 0.4: {ok1}; T-slope {t_slope:.4} <= 0.225: {ok2}"),
        tables,
        summary: json!({"n_slope": n_slope, "t_slope": t_slope}),
    })
}

fn c4(ctx: &Ctx) -> Result<Outcome> {
    let fields = if ctx.full { 20 } else { 10 };
    let r = ctx.sub(
        "levelset",
        Sub {
            options: vec![("data", "random".into()), ("fields", fields.to_string())],
            ..Default::default()
        },
    )?;
    Ok(Outcome::from_report(r))
}

fn c5(ctx: &Ctx) -> Result<Outcome> {
    let r = ctx.sub(
        "levelset",
        Sub {
            m: vec![1],
            n: vec![2],
            t: vec![1.0],
            cutoff: vec![16.0, 32.0],
            options: vec![("data", "phi3".into())],
            ..Default::default()
        },
    )?;
    Ok(Outcome::from_report(r))
}

fn c6(ctx: &Ctx) -> Result<Outcome> {
    let r = ctx.sub(
        "kernel",
        Sub {
            cutoff: vec![16.0, 32.0],
            options: vec![("variant", "R2T,RT2".into())],
            ..Default::default()
        },
    )?;
    let worst = r.checks.iter().filter_map(|c| c.detail.split_whitespace().nth(2)?.parse::<f64>().ok()).fold(0.0, f64::max);
    let mut o = Outcome::from_report(r);
    o.detail = format!("worst per-regime constant ratio {worst:.3} across N = 16, 32 (limit 2); {}", o.detail);
    Ok(o)
}

fn c7(ctx: &Ctx) -> Result<Outcome> {
    let r = ctx.sub(
        "weyl",
        Sub {
            cutoff: vec![64.0],
            options: vec![("qmax", "8".into())],
            ..Default::default()
        },
    )?;
    Ok(Outcome::from_report(r))
}

fn c8(ctx: &Ctx) -> Result<Outcome> {
    let r = ctx.sub(
        "kernel",
        Sub {
            t: vec![1.0],
            cutoff: vec![16.0],
            options: vec![("variant", "R2T,RT2".into()), ("A", "1/128,1/64,1/32".into())],
            ..Default::default()
        },
    )?;
    let mut o = Outcome::from_report(r);
    o.tables.retain(|(name, _)| name == "kernel_j.csv");
    Ok(o)
}

fn c9(ctx: &Ctx) -> Result<Outcome> {
    let r = ctx.sub(
        "counting",
        Sub {
            options: vec![("selftest", "true".into())],
            ..Default::default()
        },
    )?;
    Ok(Outcome::from_report(r))
}

fn c10(ctx: &Ctx) -> Result<Outcome> {
    let r = ctx.sub(
        "optimize",
        Sub {
            m: vec![1],
            n: vec![2],
            p: vec![3.5, 4.0, 6.0],
            t: vec![1.0],
            cutoff: vec![8.0],
            dt: Some(1.0 / 256.0),
            ..Default::default()
        },
    )?;
    Ok(Outcome::from_report(r))
}

fn c11(ctx: &Ctx) -> Result<Outcome> {
    let r = ctx.sub(
        "nls",
        Sub {
            m: vec![1],
            n: vec![2],
            t: vec![100.0],
            cutoff: vec![16.0],
            dt: Some(1.0 / 1024.0),
            options: vec![("mu", "4".into()), ("s", "2".into()), ("L", "1".into())],
            ..Default::default()
        },
    )?;
    Ok(Outcome::from_report(r))
}

fn c12(_: &Ctx) -> Result<Outcome> {
    let checks = continuity_sweep();
    let mut table = Table::new(&["source", "p", "left", "right", "at", "left_exponent", "right_exponent", "agree"]);
    for c in &checks {
        table.push(vec![
            c.source.name().into(),
            c.p.to_string(),
            c.left.clone(),
            c.right.clone(),
            c.at.to_string(),
            format!("({}, {})", c.left_exponent.0, c.left_exponent.1),
            format!("({}, {})", c.right_exponent.0, c.right_exponent.1),
            c.agree.to_string(),
        ]);
    }
    let bad = checks.iter().filter(|c| !c.agree).count();
    Ok(Outcome {
        pass: bad == 0 && !checks.is_empty(),
        detail: format!("{} branch pairs, {bad} disagree", checks.len()),
        tables: vec![("continuity.csv".into(), table)],
        summary: json!({"pairs": checks.len(), "disagree": bad}),
    })
}

/// Slopes of the measured constants next to the theory slopes, for `p` across
/// the regimes of the four upper bounds.
fn exponent_table(ctx: &Ctx) -> Result<Table> {
    let mut table = Table::new(&["m", "n", "p", "axis", "measured", "upper", "lower", "verdict"]);
    for (m, n) in [(1usize, 2usize), (2, 1)] {
        for p in [3.5, 4.0, 6.0] {
            for (t, cutoff) in [(vec![1.0], vec![8.0, 16.0, 32.0]), (vec![4.0, 16.0, 64.0], vec![8.0])] {
                let r = match ctx.sub(
                    "constants",
                    Sub {
                        m: vec![m],
                        n: vec![n],
                        p: vec![p],
                        t,
                        cutoff,
                        ..Default::default()
                    },
                ) {
                    Ok(r) => r,
                    Err(CliError::Core(wgl_core::Error::RegimeError(_))) => continue,
                    Err(e) => return Err(e),
                };
                for c in r.summary["fits"][0]["comparisons"].as_array().into_iter().flatten() {
                    let f = |k: &str| c[k].as_f64().map_or(String::new(), num);
                    table.push(vec![
                        m.to_string(),
                        n.to_string(),
                        num(p),
                        c["axis"].as_str().unwrap_or("").into(),
                        f("measured"),
                        f("upper"),
                        f("lower"),
                        c["verdict"].as_str().unwrap_or("").into(),
                    ]);
                }
            }
        }
    }
    Ok(table)
}

type Runner = fn(&Ctx) -> Result<Outcome>;
const RUNNERS: [Runner; 12] = [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12];

fn selected(man: &ExperimentManifest) -> Result<Vec<u32>> {
    match man.option("only") {
        None => Ok((1..=12).collect()),
        Some(list) => list
            .split(',')
            .map(|s| match s.trim().parse::<u32>() {
                Ok(k) if (1..=12).contains(&k) => Ok(k),
                _ => Err(CliError::Schema(format!("criterion {s:?} is not in 1..=12"))),
            })
            .collect(),
    }
}

/// Runs the selected criteria; an error inside a criterion is its FAIL.
pub fn run(man: &ExperimentManifest, pool: &Pool) -> Result<Report> {
    let ctx = Ctx {
        man,
        pool,
        full: man.profile() == "full",
    };
    let mut table = Table::new(&["criterion", "title", "pass", "detail", "wall_time_s"]);
    let mut tables = Vec::new();
    let mut checks = Vec::new();
    let mut summary = serde_json::Map::new();
    for k in selected(man)? {
        let clock = Instant::now();
        let outcome = RUNNERS[k as usize - 1](&ctx).unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!("error: {e}"),
            tables: Vec::new(),
            summary: Value::Null,
        });
        let secs = clock.elapsed().as_secs_f64();
        let title = CRITERIA[k as usize - 1].1;
        table.push(vec![
            k.to_string(),
            title.into(),
            outcome.pass.to_string(),
            outcome.detail.clone(),
            format!("{secs:.3}"),
        ]);
        for (name, t) in outcome.tables {
            tables.push((format!("c{k:02}_{name}"), t));
        }
        summary.insert(k.to_string(), json!({"title": title, "pass": outcome.pass, "result": outcome.summary}));
        let mut c = Check::new(k.to_string(), outcome.pass, format!("{title}: {}", outcome.detail));
        c.elapsed = Some(secs);
        checks.push(c);
    }
    if ctx.full {
        tables.push(("exponents.csv".into(), exponent_table(&ctx)?));
    }
    tables.insert(0, ("acceptance.csv".into(), table));
    Ok(Report {
        tables,
        summary: json!({"profile": man.profile(), "criteria": summary}),
        checks,
    })
}
