//! `extremizers`: Strichartz ratios of the three saturating families and
//! their fitted slopes against the predicted lower-bound exponents.

use serde_json::json;
use wgl_core::extremizers::{lower_bound_report, ExtremizerFamily, FamilyKind};
use wgl_core::fit::FitOptions;
use wgl_core::norms::{strichartz_ratio, QuadratureSpec};
use wgl_core::theory::SLOPE_SLACK;

use super::{dims_of, list_or, num, Check, Report};
use crate::error::Result;
use crate::manifest::ExperimentManifest;
use crate::output::Table;
use crate::pool::Pool;

/// Ratio of one family member; the time step resolves `min(N, reach)`.
pub fn family_ratio(fam: &ExtremizerFamily, p: f64, pool: &Pool) -> Result<(f64, f64)> {
    let flow = fam.flow(p)?;
    let scale = fam.cutoff.min(fam.data.reach()).max(1.0);
    let quad = QuadratureSpec::for_cutoff(0.0, fam.horizon, scale)?;
    let r = strichartz_ratio(&flow, p, &quad, pool)?;
    Ok((r.ratio, r.err_est))
}

pub fn run(man: &ExperimentManifest, pool: &Pool) -> Result<Report> {
    let (m, n) = dims_of(man, 1, 2);
    let kinds = man
        .option("family")
        .unwrap_or("phi1,phi2,phi3")
        .split(',')
        .map(|s| s.trim().parse::<FamilyKind>())
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let ps = list_or(&man.params.p, &[4.0]);
    let ts = list_or(&man.params.t, &[1.0]);
    let ns = list_or(&man.params.cutoff, &[8.0]);
    let tol = man.tolerance("slope", SLOPE_SLACK);

    let mut table = Table::new(&["family", "m", "n", "p", "T", "N", "ratio"]);
    let mut reports = Vec::new();
    let mut checks = Vec::new();
    for &kind in &kinds {
        for &p in &ps {
            let mut samples = Vec::new();
            let mut last = None;
            for &t in &ts {
                for &cutoff in &ns {
                    let fam = ExtremizerFamily::build(kind, m, n, cutoff, t)?;
                    let (ratio, _) = family_ratio(&fam, p, pool)?;
                    table.push(vec![kind.name().into(), m.to_string(), n.to_string(), num(p), num(t), num(cutoff), num(ratio)]);
                    samples.push((t, cutoff, ratio));
                    last = Some(fam);
                }
            }
            let fam = last.expect("nonempty sweep");
            match lower_bound_report(&fam, p, &samples, tol, FitOptions { min_distinct: 3 }) {
                Ok(r) => {
                    checks.push(Check::new(
                        format!("{} p={p}", kind.name()),
                        r.pass,
                        format!(
                            "slopes (T {}, N {}) vs predicted ({:.4}, {:.4})",
                            r.fit.t_slope.map_or("-".into(), |s| format!("{s:.4}")),
                            r.fit.n_slope.map_or("-".into(), |s| format!("{s:.4}")),
                            r.predicted.0,
                            r.predicted.1
                        ),
                    ));
                    reports.push(json!({
                        "family": kind.name(), "p": p, "t_slope": r.fit.t_slope, "n_slope": r.fit.n_slope,
                        "r2": r.fit.r2, "predicted": [r.predicted.0, r.predicted.1], "tolerance": tol, "pass": r.pass,
                    }));
                }
                Err(e) => reports.push(json!({"family": kind.name(), "p": p, "fit": null, "reason": e.to_string()})),
            }
        }
    }
    Ok(Report {
        tables: vec![("extremizers.csv".into(), table)],
        summary: json!({"m": m, "n": n, "families": reports}),
        checks,
    })
}
