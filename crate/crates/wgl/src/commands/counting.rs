//! `counting`: `r_2` oracles, lattice-circle maxima and the shell measure sum.
//! With `--selftest` the parameters are ignored and the reference sweep runs.

use serde_json::json;
use wgl_core::counting::{max_circle_count, r2_divisor, r2_loop, r2_table, worst_measure_sum};

use super::{list_or, num, Check, Report};
use crate::error::Result;
use crate::manifest::ExperimentManifest;
use crate::output::Table;

pub const SWEEP_T: [f64; 5] = [1.0, 4.0, 16.0, 64.0, 256.0];
pub const SWEEP_N: [f64; 4] = [8.0, 16.0, 32.0, 64.0];

pub fn run(man: &ExperimentManifest) -> Result<Report> {
    let selftest = man.option("selftest") == Some("true");
    let (ts, ns, a_max) = if selftest {
        (SWEEP_T.to_vec(), SWEEP_N.to_vec(), 10_000u64)
    } else {
        (
            list_or(&man.params.t, &SWEEP_T),
            list_or(&man.params.cutoff, &SWEEP_N),
            man.option_parse("amax", 10_000u64)?,
        )
    };
    let limit = man.tolerance("measure", 10.0);

    let table_r2 = r2_table(a_max);
    let mismatches: Vec<u64> = (0..=a_max).filter(|&a| {
            let t = table_r2[a as usize];
            r2_divisor(a) != t || r2_loop(a) != t
        }).collect();
    let mut checks = vec![Check::new(
        format!("r2 oracles A<={a_max}"),
        mismatches.is_empty(),
        format!("{} mismatches among divisor formula, loop count and sieve table", mismatches.len()),
    )];

    let mut sums = Table::new(&["T", "N", "C", "sum", "bound", "ratio"]);
    let mut worst = 0.0f64;
    for &t in &ts {
        for &cutoff in &ns {
            let w = worst_measure_sum(t, cutoff);
            worst = worst.max(w.ratio);
            sums.push(vec![num(t), num(cutoff), num(w.c), num(w.sum), num(w.bound), num(w.ratio)]);
        }
    }
    checks.push(Check::new(
        "measure_sum sweep",
        worst <= limit,
        format!("worst ratio {worst:.4} over {} cells (limit {limit})", sums.rows.len()),
    ));

    let mut circles = Table::new(&["N", "range", "A", "max_r2"]);
    for &cutoff in &ns {
        let mc = max_circle_count(cutoff as u64);
        circles.push(vec![num(cutoff), mc.range.to_string(), mc.a.to_string(), mc.count.to_string()]);
    }
    Ok(Report {
        tables: vec![("counting_measure.csv".into(), sums), ("counting_circles.csv".into(), circles)],
        summary: json!({"a_max": a_max, "mismatches": mismatches, "worst_measure_ratio": worst, "selftest": selftest}),
        checks,
    })
}
