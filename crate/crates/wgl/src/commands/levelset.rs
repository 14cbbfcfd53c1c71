//! `levelset`: the layer-cake identity on random fields (`data=random`), and
//! the `lambda^e` decay constant of the `phi3` family across `N` (`data=phi3`).

use serde_json::json;
use wgl_core::extremizers::{ExtremizerFamily, FamilyKind};
use wgl_core::evolution::FullFlow;
use wgl_core::field::Projector;
use wgl_core::norms::{layer_cake_norm, level_set_profile, levelset_decay_fit, lp_norms, normalized_sup, QuadratureSpec};
use wgl_core::optimizer::random_grid_field;

use super::{dims_of, first_or, grid_for, list_or, num, Check, Report};
use crate::error::{CliError, Result};
use crate::manifest::ExperimentManifest;
use crate::output::Table;
use crate::pool::Pool;
use crate::seed::task_rng;

pub const LAYER_CAKE_PS: [f64; 3] = [10.0 / 3.0, 4.0, 6.0];
pub const DECAY_EXPONENT: f64 = 10.0 / 3.0;
/// `lambda_min = c N` for these `c`; the first one carries the verdict.
pub const DECAY_CS: [f64; 3] = [0.5, 0.25, 1.0];
const DECAY_LEVELS: usize = 128;

pub fn run(man: &ExperimentManifest, pool: &Pool) -> Result<Report> {
    match man.option("data").unwrap_or("random") {
        "random" => layer_cake(man, pool),
        "phi3" => decay(man, pool),
        other => Err(CliError::Schema(format!("levelset data must be random or phi3, got {other:?}"))),
    }
}

fn layer_cake(man: &ExperimentManifest, pool: &Pool) -> Result<Report> {
    let (m, n) = dims_of(man, 1, 2);
    let ps = list_or(&man.params.p, &LAYER_CAKE_PS);
    let cutoff = first_or(&man.params.cutoff, 3.0);
    let horizon = first_or(&man.params.t, 0.5);
    let fields: usize = man.option_parse("fields", 10)?;
    let box_length: f64 = man.option_parse("L", 16.0)?;
    let tol = man.tolerance("layer_cake", 0.01);

    let grid = grid_for(m, n, 2.0 * cutoff, box_length)?;
    let quad = QuadratureSpec::for_cutoff(0.0, horizon, cutoff)?;
    let mut table = Table::new(&["field", "p", "direct", "layer_cake", "rel_err"]);
    let mut worst = 0.0f64;
    for k in 0..fields {
        let mut rng = task_rng(man.seed, &format!("levelset/random/{k}"));
        let phi = random_grid_field(grid.clone(), cutoff, &mut rng);
        let flow = FullFlow::new(&phi, cutoff, Projector::Smooth, horizon)?;
        let sw = lp_norms(&flow, &ps, &quad, pool)?;
        let prof = level_set_profile(&flow, &quad, None, pool)?;
        for nv in &sw.norms {
            let direct = nv.value / sw.data_norm;
            let lc = layer_cake_norm(&prof, nv.p)?;
            let err = (lc / direct - 1.0).abs();
            worst = worst.max(err);
            table.push(vec![k.to_string(), num(nv.p), num(direct), num(lc), num(err)]);
        }
    }
    let check = Check::new(
        format!("layer cake {fields} fields"),
        worst <= tol,
        format!("worst relative gap {worst:.3e} over p = {ps:?} (limit {tol})"),
    );
    Ok(Report {
        summary: json!({"m": m, "n": n, "N": cutoff, "T": horizon, "fields": fields, "p": ps, "worst_rel_err": worst}),
        tables: vec![("levelset_layer_cake.csv".into(), table)],
        checks: vec![check],
    })
}

fn geometric(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let r = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|k| if k + 1 == count { hi } else { lo * (r * k as f64).exp() }).collect()
}

fn decay(man: &ExperimentManifest, pool: &Pool) -> Result<Report> {
    let (m, n) = dims_of(man, 1, 2);
    let ns = list_or(&man.params.cutoff, &[16.0, 32.0]);
    let horizon = first_or(&man.params.t, 1.0);
    let e: f64 = man.option_parse("e", DECAY_EXPONENT)?;
    let c0: f64 = man.option_parse("c", DECAY_CS[0])?;
    let factor = man.tolerance("stability", 2.0);
    let mut cs = vec![c0];
    cs.extend(DECAY_CS.iter().copied().filter(|&c| c != c0));
    let c_min = cs.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut table = Table::new(&["N", "c", "lambda_min", "constant", "at_lambda", "points"]);
    // per c, the constants in N order
    let mut constants: Vec<Vec<f64>> = vec![Vec::new(); cs.len()];
    for &cutoff in &ns {
        let fam = ExtremizerFamily::build(FamilyKind::Phi3, m, n, cutoff, horizon)?;
        let flow = fam.flow(4.0)?;
        let scale = fam.cutoff.min(fam.data.reach()).max(1.0);
        let quad = QuadratureSpec::for_cutoff(0.0, horizon, scale)?;
        let top = normalized_sup(&flow, &quad, pool);
        let lo = 0.9 * c_min * cutoff;
        if top.is_nan() || top <= lo {
            return Err(wgl_core::Error::InsufficientRange(format!(
                "sup |F| / ||phi|| = {top} is below lambda_min = {lo} at N = {cutoff}"
            ))
            .into());
        }
        let prof = level_set_profile(&flow, &quad, Some(&geometric(lo, top, DECAY_LEVELS)), pool)?;
        for (i, &c) in cs.iter().enumerate() {
            let fit = levelset_decay_fit(&prof, e, c * cutoff)?;
            table.push(vec![
                num(cutoff),
                num(c),
                num(c * cutoff),
                num(fit.constant),
                num(fit.at_lambda),
                fit.points.to_string(),
            ]);
            constants[i].push(fit.constant);
        }
    }
    let spread = |v: &[f64]| {
        v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let spreads: Vec<f64> = constants.iter().map(|v| spread(v)).collect();
    let check = Check::new(
        format!("phi3 decay e={e:.4} N={ns:?}"),
        spreads[0] <= factor,
        format!(
            "constants [{}] spread {:.3} at c = {c0} (limit {factor}); other c: {}",
            constants[0].iter().map(|x| format!("{x:.4e}")).collect::<Vec<_>>().join(", "),
            spreads[0],
            cs.iter().zip(&spreads).skip(1).map(|(c, s)| format!("c={c} spread {s:.3}")).collect::<Vec<_>>().join(", ")
        ),
    );
    Ok(Report {
        summary: json!({
            "m": m, "n": n, "T": horizon, "N": ns, "e": e,
            "sensitivity": cs.iter().zip(&constants).zip(&spreads).map(|((c, k), s)| json!({"c": c, "constants": k, "spread": s})).collect::<Vec<_>>(),
        }),
        tables: vec![("levelset_decay.csv".into(), table)],
        checks: vec![check],
    })
}
