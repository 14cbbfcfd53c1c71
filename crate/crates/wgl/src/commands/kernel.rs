//! `kernel`: dispersive envelopes of `K_N` per time regime, their stability
//! across `N`, and optionally the `J_1 .. J_4` split at scales `A`.

use serde_json::json;
use wgl_core::kernel::{dispersive_check, j_decomposition, stability, EnvelopeReport, KernelVariant};

use super::{first_or, list_or, num, Check, Report};
use crate::error::{CliError, Result};
use crate::manifest::ExperimentManifest;
use crate::output::Table;

fn variants(man: &ExperimentManifest) -> Result<Vec<KernelVariant>> {
    if let Some(names) = man.option("variant") {
        return names
            .split(',')
            .map(|s| match s.trim() {
                "R2T" => Ok(KernelVariant::R2T),
                "RT2" => Ok(KernelVariant::RT2),
                other => Err(CliError::Schema(format!("unknown kernel variant {other:?}"))),
            })
            .collect();
    }
    match (man.params.m.first(), man.params.n.first()) {
        (Some(&m), Some(&n)) => Ok(vec![KernelVariant::from_dims(m, n)?]),
        _ => Ok(vec![KernelVariant::R2T, KernelVariant::RT2]),
    }
}

/// Scales `A` from the `A` option, as a comma list of numbers or `1/k` fractions.
fn scales(man: &ExperimentManifest) -> Result<Vec<f64>> {
    let Some(list) = man.option("A") else {
        return Ok(Vec::new());
    };
    list.split(',')
        .map(|s| {
            let s = s.trim();
            let v = match s.split_once('/') {
                Some((a, b)) => a.trim().parse::<f64>().ok().zip(b.trim().parse::<f64>().ok()).map(|(a, b)| a / b),
                None => s.parse().ok(),
            };
            v.filter(|x: &f64| x.is_finite() && *x > 0.0)
                .ok_or_else(|| CliError::Schema(format!("scale A = {s:?}")))
        })
        .collect()
}

pub fn run(man: &ExperimentManifest) -> Result<Report> {
    let ns = list_or(&man.params.cutoff, &[16.0, 32.0]);
    let factor = man.tolerance("stability", 2.0);
    let mut envelope = Table::new(&["variant", "N", "t", "regime", "sup", "bound", "ratio"]);
    let mut constants = Table::new(&["variant", "N", "regime", "constant", "at_t", "points"]);
    let mut checks = Vec::new();
    let mut summary = Vec::new();

    for v in variants(man)? {
        let mut reports: Vec<EnvelopeReport> = Vec::new();
        for &cutoff in &ns {
            let r = dispersive_check(v, cutoff, None)?;
            for row in &r.rows {
                envelope.push(vec![
                    v.name().into(),
                    num(cutoff),
                    num(row.t),
                    row.regime.name().into(),
                    num(row.sup),
                    num(row.bound),
                    num(row.ratio),
                ]);
            }
            for c in &r.regimes {
                constants.push(vec![
                    v.name().into(),
                    num(cutoff),
                    c.regime.name().into(),
                    num(c.constant),
                    num(c.at_t),
                    c.points.to_string(),
                ]);
            }
            reports.push(r);
        }
        let mut worst = Vec::new();
        for pair in reports.windows(2) {
            for (regime, ratio) in stability(&pair[0], &pair[1]) {
                let ok = ratio <= factor;
                checks.push(Check::new(
                    format!("{} {} N={}->{}", v.name(), regime.name(), pair[0].cutoff, pair[1].cutoff),
                    ok,
                    format!("constant ratio {ratio:.3} (limit {factor})"),
                ));
                worst.push(json!({"regime": regime.name(), "from": pair[0].cutoff, "to": pair[1].cutoff, "ratio": ratio}));
            }
        }
        summary.push(json!({
            "variant": v.name(),
            "constants": reports.iter().map(|r| json!({
                "N": r.cutoff,
                "regimes": r.regimes.iter().map(|c| json!({"regime": c.regime.name(), "constant": c.constant, "at_t": c.at_t})).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "stability": worst,
        }));
    }

    let a_list = scales(man)?;
    let mut tables = vec![("kernel_envelope.csv".to_string(), envelope), ("kernel_constants.csv".to_string(), constants)];
    let mut jsum = Vec::new();
    if !a_list.is_empty() {
        let cutoff = first_or(&man.params.cutoff, 16.0);
        let horizon = first_or(&man.params.t, 1.0);
        let mut jt = Table::new(&["variant", "N", "T", "A", "j1_hat_sup", "j2_sup", "j3_sup", "j4_sup", "psi_max"]);
        for v in variants(man)? {
            let mut j2_scaled = Vec::new();
            for &a in &a_list {
                let d = j_decomposition(v, cutoff, horizon, a)?;
                jt.push(vec![
                    v.name().into(),
                    num(cutoff),
                    num(horizon),
                    num(a),
                    num(d.j1_hat_sup),
                    num(d.j2_sup),
                    num(d.j3_sup),
                    num(d.j4_sup),
                    num(d.psi_max),
                ]);
                let j1 = d.j1_hat_sup / a;
                checks.push(Check::new(
                    format!("{} J1 A={a}", v.name()),
                    j1 <= 5.0 * d.psi_max,
                    format!("sup|J1 hat|/A = {j1:.4} vs 5 max psi = {:.4}", 5.0 * d.psi_max),
                ));
                j2_scaled.push(d.j2_sup * a.powf(1.5));
            }
            let hi = j2_scaled.iter().cloned().fold(0.0, f64::max);
            let lo = j2_scaled.iter().cloned().fold(f64::INFINITY, f64::min);
            let spread = hi / lo;
            checks.push(Check::new(
                format!("{} J2 A^(3/2)", v.name()),
                spread <= factor,
                format!(
                    "sup|J2| A^(3/2) = [{}] spread {spread:.3} (limit {factor})",
                    j2_scaled.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
                ),
            ));
            jsum.push(json!({"variant": v.name(), "N": cutoff, "T": horizon, "A": a_list, "j2_scaled": j2_scaled, "spread": spread}));
        }
        tables.push(("kernel_j.csv".into(), jt));
    }

    Ok(Report {
        tables,
        summary: json!({"envelopes": summary, "j_decomposition": jsum}),
        checks,
    })
}
