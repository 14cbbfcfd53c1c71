//! `snorm`: `S^{q, qt}_{N, J}` of the linear flow from random data at
//! frequency `~ N`, with `|J| = N^{1/10}`, and the constant
//! `C = S / (N ||P_N f||_2)` across `N`.

use serde_json::json;
use wgl_core::evolution::{Flow, ProductFlow};
use wgl_core::snorm::{random_shell_data, s_norm_from, s_norm_max_from, unit_pieces, MAXIMAL_EXPONENTS};

use super::{dims_of, list_or, num, Check, Report};
use crate::error::Result;
use crate::manifest::ExperimentManifest;
use crate::output::Table;
use crate::pool::Pool;
use crate::seed::task_rng;

pub fn run(man: &ExperimentManifest, pool: &Pool) -> Result<Report> {
    let (m, n) = dims_of(man, 1, 2);
    let ns = list_or(&man.params.cutoff, &[8.0, 16.0, 32.0]);
    let q: f64 = man.option_parse("q", 4.0)?;
    let factor = man.tolerance("growth", 2.0);

    let mut table = Table::new(&["N", "J", "q", "qt", "s_norm", "data_norm", "C"]);
    let mut cs = Vec::new();
    let mut warnings = 0;
    for &cutoff in &ns {
        let mut rng = task_rng(man.seed, &format!("snorm/{cutoff}"));
        let data = random_shell_data(m, n, cutoff, &mut rng)?;
        let flow = ProductFlow::new(&data, Some(cutoff), MAXIMAL_EXPONENTS[1])?;
        let span = cutoff.powf(0.1);
        let pieces = unit_pieces(&flow, cutoff, (0.0, span), &MAXIMAL_EXPONENTS, data.reach(), pool)?;
        warnings += pieces.diagnostics.warnings.len();
        let norm = flow.data_norm();
        for qt in MAXIMAL_EXPONENTS {
            let s = s_norm_from(&pieces, cutoff, q, qt)?;
            table.push(vec![num(cutoff), num(span), num(q), num(qt), num(s), num(norm), num(s / (cutoff * norm))]);
        }
        let s = s_norm_max_from(&pieces, cutoff, q)?;
        table.push(vec![num(cutoff), num(span), num(q), "max".into(), num(s), num(norm), num(s / (cutoff * norm))]);
        cs.push(s / (cutoff * norm));
    }
    let growth = cs.iter().map(|c| c / cs[0]).fold(0.0, f64::max);
    let check = Check::new(
        format!("S-norm constant N={ns:?}"),
        growth <= factor,
        format!(
            "C = [{}], largest C / C(N0) = {growth:.3} (limit {factor})",
            cs.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>().join(", ")
        ),
    );
    Ok(Report {
        summary: json!({"m": m, "n": n, "q": q, "N": ns, "C": cs, "growth": growth, "warnings": warnings}),
        tables: vec![("snorm.csv".into(), table)],
        checks: vec![check],
    })
}
