//! `nls`: property checks of the split-step solver (mass, Strang order,
//! reversibility) and a growth trajectory compared with `omega(s, mu)`.

use serde_json::json;
use wgl_core::grid::{build_grid, WaveguideSpec};
use wgl_core::nls::{nls_datum, run_trajectory, NlsOptions, NlsState};
use wgl_core::theory::{exponent_from_f64, omega, ratio_to_f64};

use super::{dims_of, first_or, grid_for, num, Check, Report};
use crate::error::{CliError, Result};
use crate::manifest::ExperimentManifest;
use crate::output::Table;
use crate::seed::task_rng;

use std::sync::Arc;

pub const OMEGA_SLACK: f64 = 0.2;

struct Properties {
    mass_drift: f64,
    halving: f64,
    drifts: (f64, f64),
    reversal: f64,
}

/// Small-grid checks on `R x T^2`, box length 2, `N = 4`.
fn properties(man: &ExperimentManifest, mu: f64) -> Result<Properties> {
    let spec = WaveguideSpec::new(1, 2, 2.0, &[32, 16, 16])?;
    let grid = Arc::new(build_grid(&spec, None)?);
    let cutoff = 4.0;
    let mut rng = task_rng(man.seed, "nls/properties");
    let u0 = nls_datum(grid, cutoff, 1.0, &mut rng)?;

    let mut st = NlsState::new(&u0, mu, 1.0 / 64.0, cutoff)?;
    let mut mass_drift: f64 = 0.0;
    for _ in 0..10 {
        st.advance(100)?;
        mass_drift = mass_drift.max(st.mass_drift());
    }

    // worst energy drift over 16 checkpoints on [0, 1]
    let drift = |k: usize| -> Result<f64> {
        let mut st = NlsState::new(&u0, mu, 1.0 / k as f64, cutoff)?;
        let mut worst: f64 = 0.0;
        for _ in 0..16 {
            st.advance(k / 16)?;
            worst = worst.max(st.energy_drift());
        }
        Ok(worst)
    };
    let drifts = (drift(512)?, drift(1024)?);

    let mut st = NlsState::new(&u0, mu, 1.0 / 64.0, cutoff)?;
    st.advance(100)?;
    st.reverse();
    st.advance(100)?;
    let back = st.spectral();
    let diff = back.axpy(num_complex::Complex64::new(-1.0, 0.0), &u0)?;
    Ok(Properties {
        mass_drift,
        halving: drifts.0 / drifts.1,
        drifts,
        reversal: diff.l2_norm() / u0.l2_norm(),
    })
}

pub fn run(man: &ExperimentManifest) -> Result<Report> {
    let mode = man.option("mode").unwrap_or("all");
    if !matches!(mode, "all" | "properties" | "growth") {
        return Err(CliError::Schema(format!("nls mode must be all, properties or growth, got {mode:?}")));
    }
    let mu: f64 = man.option_parse("mu", 4.0)?;
    let s: f64 = man.option_parse("s", 2.0)?;
    let mut checks = Vec::new();
    let mut tables = Vec::new();
    let mut summary = serde_json::Map::new();

    if mode != "growth" {
        let pr = properties(man, mu)?;
        checks.push(Check::new("nls mass", pr.mass_drift <= 1e-10, format!("max relative mass drift {:.3e} over 1000 steps", pr.mass_drift)));
        checks.push(Check::new(
            "nls strang order",
            (3.2..=4.8).contains(&pr.halving),
            format!("energy drift {:.3e} -> {:.3e} under dt halving, ratio {:.3}", pr.drifts.0, pr.drifts.1, pr.halving),
        ));
        checks.push(Check::new("nls reversibility", pr.reversal <= 1e-8, format!("relative L2 gap {:.3e} after 100 steps there and back", pr.reversal)));
        summary.insert(
            "properties".into(),
            json!({"mass_drift": pr.mass_drift, "energy_drifts": [pr.drifts.0, pr.drifts.1], "halving_ratio": pr.halving, "reversal": pr.reversal}),
        );
    }

    if mode != "properties" {
        let (m, n) = dims_of(man, 1, 2);
        let cutoff = first_or(&man.params.cutoff, 16.0);
        let horizon = first_or(&man.params.t, 100.0);
        let dt = man.params.dt.unwrap_or(1.0 / (4.0 * cutoff * cutoff));
        let amp: f64 = man.option_parse("amp", 1.0)?;
        let box_length: f64 = man.option_parse("L", 1.0)?;
        let opts = NlsOptions {
            padding: man.option_parse("padding", NlsOptions::default().padding)?,
            ..Default::default()
        };
        let mu_q = exponent_from_f64(mu).ok_or_else(|| CliError::Schema(format!("mu = {mu}")))?;
        let om = omega(s, mu_q).map(ratio_to_f64).ok();
        let grid = grid_for(m, n, opts.padding * cutoff, box_length)?;
        let mut rng = task_rng(man.seed, &format!("nls/growth/{mu}/{s}"));
        let u0 = nls_datum(grid.clone(), cutoff, amp, &mut rng)?;
        let (rec, series) = run_trajectory(&u0, mu, s, horizon, dt, cutoff, om, opts)?;
        let mut t = Table::new(&["t", "hs", "mass_rel_drift", "energy_rel_drift"]);
        for r in &series {
            t.push(vec![num(r.t), num(r.hs), num(r.mass_rel_drift), num(r.energy_rel_drift)]);
        }
        tables.push(("nls_series.csv".to_string(), t));
        let worst_mass = series.iter().fold(0.0f64, |a, r| a.max(r.mass_rel_drift));
        let worst_energy = series.iter().fold(0.0f64, |a, r| a.max(r.energy_rel_drift));
        match om {
            Some(w) => checks.push(Check::new(
                format!("nls growth mu={mu} s={s}"),
                rec.exponent <= w + OMEGA_SLACK,
                format!("fitted exponent {:.4} ({} points) vs omega {w:.4} + {OMEGA_SLACK}", rec.exponent, rec.fit_points),
            )),
            None => checks.push(Check::new(format!("nls growth mu={mu} s={s}"), false, "omega undefined for these exponents")),
        }
        summary.insert(
            "growth".into(),
            json!({
                "s": rec.s, "mu": rec.mu, "a": rec.a, "max_hs": rec.max_hs, "exponent": rec.exponent,
                "fit_points": rec.fit_points, "omega": rec.omega, "N": cutoff, "T": horizon, "dt": dt,
                "dims": grid.dims(), "amplitude": amp, "max_mass_drift": worst_mass, "max_energy_drift": worst_energy,
            }),
        );
    }
    Ok(Report {
        tables,
        summary: summary.into(),
        checks,
    })
}
