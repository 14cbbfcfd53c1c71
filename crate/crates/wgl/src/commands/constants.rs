//! `constants`: measured lower estimates of `C(p, T, N)` over a sweep, fitted
//! exponents and a slope verdict against the theory bounds.

use std::time::Instant;

use serde_json::{json, Value};
use wgl_core::fit::{fit_exponents, FitOptions};
use wgl_core::norms::QuadratureSpec;
use wgl_core::optimizer::{estimate_constant, AscentOptions, AscentSetup, Strategy};
use wgl_core::theory::{
    best_upper, compare_with, exponent_from_f64, ratio_to_f64, theory_constant, theory_slope, Source, SLOPE_SLACK,
};

use super::{dims_of, grid_for, list_or, num, Check, Report};
use crate::error::{CliError, Result};
use crate::manifest::ExperimentManifest;
use crate::output::Table;
use crate::pool::Pool;
use crate::seed::task_rng;

fn exponent(p: f64) -> Result<wgl_core::theory::Q> {
    exponent_from_f64(p).ok_or_else(|| CliError::Schema(format!("p = {p}")))
}

/// Upper theory value: the named source, or the smallest applicable bound.
fn upper_value(source: Option<Source>, m: usize, n: usize, p: f64, t: f64, cutoff: f64) -> Result<(String, String, f64)> {
    let pq = exponent(p)?;
    let c = match source {
        Some(s) => theory_constant(s, m, n, pq, t, cutoff)?,
        None => best_upper(m, n, pq, t, cutoff)?,
    };
    Ok((c.source.name().into(), c.branch.label.clone(), c.value))
}

pub fn run(man: &ExperimentManifest, pool: &Pool) -> Result<Report> {
    let (m, n) = dims_of(man, 1, 2);
    let ps = list_or(&man.params.p, &[4.0]);
    let ts = list_or(&man.params.t, &[1.0]);
    let ns = list_or(&man.params.cutoff, &[8.0]);
    let strategy: Strategy = man.option_parse("strategy", Strategy::Probes)?;
    let random: usize = man.option_parse("probes", 4)?;
    let restarts: usize = man.option_parse("restarts", 4)?;
    let max_iter: usize = man.option_parse("max_iter", 20)?;
    let source = man.option("source").map(str::parse::<Source>).transpose()?;
    let slack = man.tolerance("slope", SLOPE_SLACK);

    // surface regime errors before any work
    for &p in &ps {
        upper_value(source, m, n, p, ts[0].max(1.0), ns[0].max(1.0))?;
    }

    let mut table = Table::new(&["m", "n", "p", "T", "N", "ratio", "err_est", "wall_time_s"]);
    let mut queries = Vec::new();
    let mut checks = Vec::new();
    let mut fits = Vec::new();
    for &p in &ps {
        let mut samples = Vec::new();
        for &t in &ts {
            for &cutoff in &ns {
                let clock = Instant::now();
                let mut rng = task_rng(man.seed, &format!("constants/{m}/{n}/{p}/{t}/{cutoff}"));
                let setup = if strategy == Strategy::Probes {
                    None
                } else {
                    let dt = man.params.dt.unwrap_or(1.0 / (8.0 * cutoff * cutoff));
                    Some(AscentSetup {
                        grid: grid_for(m, n, 2.0 * cutoff, 2.0)?,
                        quad: QuadratureSpec::with_dt(0.0, t, dt, cutoff)?,
                        options: AscentOptions {
                            max_iter,
                            ..Default::default()
                        },
                        restarts,
                    })
                };
                let est = estimate_constant(m, n, p, t, cutoff, strategy, random, setup.as_ref(), &mut rng, pool)?;
                let err = est.probes.iter().find(|r| r.id == est.best).map_or(0.0, |r| r.err_est);
                table.push(vec![
                    m.to_string(),
                    n.to_string(),
                    num(p),
                    num(t),
                    num(cutoff),
                    num(est.measured),
                    num(err),
                    format!("{:.3}", clock.elapsed().as_secs_f64()),
                ]);
                let (src, label, value) = upper_value(source, m, n, p, t.max(1.0), cutoff.max(1.0))?;
                queries.push(json!({
                    "query": {"m": m, "n": n, "p": p, "T": t, "N": cutoff},
                    "theory": {"source": src, "branch": label, "value": value},
                    "measured": est.measured,
                    "best": est.best,
                    "warnings": est.diagnostics.warnings.len(),
                }));
                samples.push((t, cutoff, est.measured));
            }
        }
        let fit = match fit_exponents(&samples, FitOptions { min_distinct: 3 }) {
            Ok(f) => f,
            Err(e) => {
                fits.push(json!({"p": p, "fit": Value::Null, "reason": e.to_string()}));
                continue;
            }
        };
        let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.0.max(1.0), s.1.max(1.0))).collect();
        let pq = exponent(p)?;
        let mut comparisons = Vec::new();
        for (axis, slope) in [("T", fit.t_slope), ("N", fit.n_slope)] {
            if slope.is_none() {
                continue;
            }
            let upper = theory_slope(|t, c| upper_value(source, m, n, p, t, c).map(|v| v.2).map_err(to_core), &pts, axis).ok();
            let lower = theory_slope(
                |t, c| Ok(theory_constant(Source::Conjecture, m, n, pq, t, c)?.value),
                &pts,
                axis,
            )
            .ok();
            let c = compare_with(axis, &fit, lower, upper, slack)?;
            checks.push(Check::new(
                format!("p={p} {axis}-slope"),
                c.upper_ok != Some(false),
                format!(
                    "measured {:.4}, upper {}, lower {}, verdict {}",
                    c.measured,
                    c.upper.map_or("-".into(), |u| format!("{u:.4}")),
                    c.lower.map_or("-".into(), |l| format!("{l:.4}")),
                    c.verdict.name()
                ),
            ));
            comparisons.push(json!({
                "axis": axis, "measured": c.measured, "upper": c.upper, "lower": c.lower,
                "verdict": c.verdict.name(),
            }));
        }
        fits.push(json!({
            "p": p, "t_slope": fit.t_slope, "n_slope": fit.n_slope, "r2": fit.r2,
            "comparisons": comparisons,
            "window": exponent(p).ok().and_then(|q| wgl_core::theory::corollary_window(m, n, q).ok().flatten()).map(ratio_to_f64),
        }));
    }
    Ok(Report {
        tables: vec![("constants.csv".into(), table)],
        summary: json!({"strategy": format!("{strategy:?}").to_lowercase(), "queries": queries, "fits": fits}),
        checks,
    })
}

fn to_core(e: CliError) -> wgl_core::Error {
    match e {
        CliError::Core(c) => c,
        other => wgl_core::Error::DomainError(other.to_string()),
    }
}
