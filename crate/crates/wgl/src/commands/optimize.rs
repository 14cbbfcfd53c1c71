//! `optimize`: gradient check against central differences on a short window
//! `[0, fd_T]`, then probes and projected ascent for `C(p, T, N)` on one full grid.

use serde_json::json;
use wgl_core::field::Projector;
use wgl_core::norms::QuadratureSpec;
use wgl_core::optimizer::{estimate_constant, random_grid_field, AscentOptions, AscentSetup, Objective, Strategy};
use num_complex::Complex64;

use super::{dims_of, first_or, grid_for, list_or, num, Check, Report};
use crate::error::Result;
use crate::manifest::ExperimentManifest;
use crate::output::Table;
use crate::pool::Pool;
use crate::seed::task_rng;

pub const FD_STEPS: [f64; 3] = [1e-3, 1e-4, 1e-5];

pub fn run(man: &ExperimentManifest, pool: &Pool) -> Result<Report> {
    let (m, n) = dims_of(man, 1, 2);
    let ps = list_or(&man.params.p, &[3.5, 4.0, 6.0]);
    let cutoff = first_or(&man.params.cutoff, 8.0);
    let horizon = first_or(&man.params.t, 1.0);
    let fd_horizon: f64 = man.option_parse("fd_T", 1.0 / 16.0)?;
    let dt = man.params.dt.unwrap_or(1.0 / (4.0 * cutoff * cutoff));
    let box_length: f64 = man.option_parse("L", 2.0)?;
    let random: usize = man.option_parse("probes", 4)?;
    let restarts: usize = man.option_parse("restarts", 2)?;
    let max_iter: usize = man.option_parse("max_iter", 5)?;
    let fd_tol = man.tolerance("gradient", 1e-5);

    let grid = grid_for(m, n, 2.0 * cutoff, box_length)?;
    let quad = QuadratureSpec::with_dt(0.0, horizon, dt, cutoff)?;
    let fd_quad = QuadratureSpec::with_dt(0.0, fd_horizon, dt, cutoff)?;
    let mut fd_table = Table::new(&["p", "step", "directional", "central_diff", "rel_err"]);
    let mut trace_table = Table::new(&["p", "start", "iter", "ratio"]);
    let mut probe_table = Table::new(&["p", "probe", "ratio", "err_est"]);
    let mut checks = Vec::new();
    let mut summary = Vec::new();

    for &p in &ps {
        let obj = Objective::new(grid.clone(), cutoff, Projector::Box, &fd_quad, p)?;
        let mut rng = task_rng(man.seed, &format!("optimize/fd/{p}"));
        let phi = random_grid_field(grid.clone(), cutoff, &mut rng);
        let phi = phi.scale(Complex64::new(1.0 / phi.l2_norm(), 0.0));
        let dir = random_grid_field(grid.clone(), cutoff, &mut rng);
        let dir = dir.scale(Complex64::new(1.0 / dir.l2_norm(), 0.0));
        let (_, g) = obj.gradient(&phi, pool)?;
        let directional = dir.inner(&g)?.re;
        let mut best = f64::INFINITY;
        for h in FD_STEPS {
            let plus = obj.value(&phi.axpy(Complex64::new(h, 0.0), &dir)?, pool)?;
            let minus = obj.value(&phi.axpy(Complex64::new(-h, 0.0), &dir)?, pool)?;
            let cd = (plus - minus) / (2.0 * h);
            let err = (cd - directional).abs() / directional.abs();
            best = best.min(err);
            fd_table.push(vec![num(p), num(h), num(directional), num(cd), num(err)]);
        }
        checks.push(Check::new(
            format!("gradient p={p}"),
            best < fd_tol,
            format!("best central-difference relative error {best:.3e} (limit {fd_tol:e})"),
        ));

        let setup = AscentSetup {
            grid: grid.clone(),
            quad,
            options: AscentOptions {
                max_iter,
                ..Default::default()
            },
            restarts,
        };
        let mut rng = task_rng(man.seed, &format!("optimize/estimate/{p}"));
        let est = estimate_constant(m, n, p, horizon, cutoff, Strategy::Both, random, Some(&setup), &mut rng, pool)?;
        for pr in &est.probes {
            probe_table.push(vec![num(p), pr.id.clone(), num(pr.ratio), num(pr.err_est)]);
        }
        for (j, tr) in est.traces.iter().enumerate() {
            let start = format!("{j}:{}", tr.start);
            for (i, r) in tr.ratios.iter().enumerate() {
                trace_table.push(vec![num(p), start.clone(), i.to_string(), num(*r)]);
            }
        }
        let monotone = est.traces.iter().all(|t| t.is_monotone());
        checks.push(Check::new(
            format!("ascent monotone p={p}"),
            monotone,
            format!("{} runs, final ratios [{}]", est.traces.len(),
                est.traces.iter().map(|t| format!("{:.5}", t.final_ratio())).collect::<Vec<_>>().join(", ")),
        ));
        let family_best = est
            .probes
            .iter()
            .filter(|r| r.id.starts_with("phi"))
            .map(|r| r.ratio)
            .fold(0.0, f64::max);
        checks.push(Check::new(
            format!("estimate dominates families p={p}"),
            est.measured >= family_best,
            format!("estimate {:.5} ({}) vs best family probe {family_best:.5}", est.measured, est.best),
        ));
        summary.push(json!({
            "p": p, "fd_rel_err": best, "measured": est.measured, "best": est.best,
            "family_best": family_best, "monotone": monotone, "warnings": est.diagnostics.warnings.len(),
        }));
    }
    Ok(Report {
        tables: vec![
            ("optimize_gradient.csv".into(), fd_table),
            ("optimize_probes.csv".into(), probe_table),
            ("optimize_ascent.csv".into(), trace_table),
        ],
        summary: json!({"m": m, "n": n, "N": cutoff, "T": horizon, "fd_T": fd_horizon, "dt": dt, "dims": grid.dims(), "runs": summary}),
        checks,
    })
}
