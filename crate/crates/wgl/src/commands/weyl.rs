//! `weyl`: `sup_y |S(a/q + offset, y)|` against the rational-point envelope.

use serde_json::json;
use wgl_core::weyl::{reduced_fractions, weyl_envelope_check};

use super::{first_or, num, Check, Report};
use crate::error::Result;
use crate::manifest::ExperimentManifest;
use crate::output::Table;

pub fn run(man: &ExperimentManifest) -> Result<Report> {
    let cutoff = first_or(&man.params.cutoff, 64.0);
    let q_max: i64 = man.option_parse("qmax", 8)?;
    let limit = man.tolerance("weyl", 8.0);
    let mut table = Table::new(&["a", "q", "offset", "t", "sup", "envelope", "ratio"]);
    let mut worst = (0.0f64, 0i64, 0i64, 0.0f64);
    for (a, q) in reduced_fractions(q_max) {
        let offsets = [0.0, 0.5 / (q as f64 * cutoff)];
        for row in weyl_envelope_check(a, q, cutoff, &offsets)? {
            table.push(vec![
                row.a.to_string(),
                row.q.to_string(),
                num(row.offset),
                num(row.t),
                num(row.sup),
                num(row.envelope),
                num(row.ratio),
            ]);
            if row.ratio > worst.0 {
                worst = (row.ratio, row.a, row.q, row.offset);
            }
        }
    }
    let check = Check::new(
        format!("weyl N={cutoff} q<={q_max}"),
        worst.0 <= limit,
        format!("worst ratio {:.4} at a/q = {}/{} offset {} (limit {limit})", worst.0, worst.1, worst.2, worst.3),
    );
    Ok(Report {
        summary: json!({"N": cutoff, "q_max": q_max, "worst_ratio": worst.0, "at": [worst.1, worst.2], "offset": worst.3, "rows": table.rows.len()}),
        tables: vec![("weyl.csv".into(), table)],
        checks: vec![check],
    })
}
