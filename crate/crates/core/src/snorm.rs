//! Long-time Strichartz norms
//! `S^{q,qt}_{N,J} = ( sum_m ( N^{5/qt - 1/2} ||u||_{L^qt([m,m+1] cap J)} )^q )^{1/q}`
//! and the maximal variant over `qt in {5, 12}`.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cutoff::BoxCutoff;
use crate::error::{Error, Result};
use crate::evolution::{Diagnostics, Flow, Warning};
use crate::exec::Executor;
use crate::norms::{lp_norms, QuadratureSpec};
use crate::separable::{AxisProfile, SeparableData};

/// Largest admissible mass fraction outside `N/4 <= |xi| <= 4N`.
pub const LOCALIZATION_TOLERANCE: f64 = 0.01;

/// Exponents of the maximal variant.
pub const MAXIMAL_EXPONENTS: [f64; 2] = [5.0, 12.0];

/// `L^qt` norms of the flow on each `[m, m+1] cap J`, for several `qt` at once.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitPieces {
    pub q_tildes: Vec<f64>,
    pub intervals: Vec<(f64, f64)>,
    /// `norms[i][k]`: interval `i`, exponent `q_tildes[k]`.
    pub norms: Vec<Vec<f64>>,
    /// Largest refinement error over all pieces.
    pub err_est: f64,
    pub diagnostics: Diagnostics,
}

/// `[m, m+1] cap [j0, j1]` for every integer `m` meeting the interval.
pub fn unit_intervals(j0: f64, j1: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut m = j0.floor();
    while m < j1 {
        let (a, b) = (m.max(j0), (m + 1.0).min(j1));
        if b > a {
            out.push((a, b));
        }
        m += 1.0;
    }
    out
}

fn check_exponents(q: Option<f64>, q_tilde: f64) -> Result<()> {
    if let Some(q) = q {
        if !(3.5..=4.0).contains(&q) {
            return Err(Error::ParameterOutOfRange(alloc::format!(
                "S-norm needs 7/2 <= q <= 4, got {q}"
            )));
        }
    }
    if !(5.0..=12.0).contains(&q_tilde) {
        return Err(Error::ParameterOutOfRange(alloc::format!(
            "S-norm needs 5 <= qt <= 12, got {q_tilde}"
        )));
    }
    Ok(())
}

/// Evaluates the pieces of `flow` over `J = [j0, j1]`, with time step
/// `1/(8 reach^2)` where `reach` bounds the frequencies of the datum.
pub fn unit_pieces<F, E>(
    flow: &F,
    cutoff: f64,
    span: (f64, f64),
    q_tildes: &[f64],
    reach: f64,
    exec: &E,
) -> Result<UnitPieces>
where
    F: Flow + ?Sized,
    E: Executor + ?Sized,
{
    for &qt in q_tildes {
        check_exponents(None, qt)?;
    }
    if !(span.1 > span.0) {
        return Err(Error::ParameterOutOfRange(alloc::format!(
            "empty interval J = [{}, {}]",
            span.0,
            span.1
        )));
    }
    let mut diagnostics = flow.diagnostics();
    let outside = flow.mass_outside_shell(cutoff / 4.0, 4.0 * cutoff);
    if outside > LOCALIZATION_TOLERANCE {
        diagnostics.push(Warning::Localization { fraction: outside });
    }
    let intervals = unit_intervals(span.0, span.1);
    let mut norms = Vec::with_capacity(intervals.len());
    let mut err_est: f64 = 0.0;
    for &(a, b) in &intervals {
        let quad = QuadratureSpec::for_cutoff(a, b, reach)?;
        let sw = lp_norms(flow, q_tildes, &quad, exec)?;
        err_est = sw.norms.iter().fold(err_est, |m, n| m.max(n.err_est));
        norms.push(sw.norms.iter().map(|n| n.value).collect());
    }
    Ok(UnitPieces {
        q_tildes: q_tildes.to_vec(),
        intervals,
        norms,
        err_est,
        diagnostics,
    })
}

/// `S^{q,qt}_{N,J}` from precomputed pieces.
pub fn s_norm_from(pieces: &UnitPieces, cutoff: f64, q: f64, q_tilde: f64) -> Result<f64> {
    check_exponents(Some(q), q_tilde)?;
    let k = pieces
        .q_tildes
        .iter()
        .position(|&x| x == q_tilde)
        .ok_or_else(|| Error::ParameterOutOfRange(alloc::format!("qt = {q_tilde} not evaluated")))?;
    let w = cutoff.powf(5.0 / q_tilde - 0.5);
    let total: f64 = pieces.norms.iter().map(|row| (w * row[k]).powf(q)).sum();
    Ok(total.powf(1.0 / q))
}

/// `max(S^{q,5}, S^{q,12})`.
pub fn s_norm_max_from(pieces: &UnitPieces, cutoff: f64, q: f64) -> Result<f64> {
    let mut best: f64 = 0.0;
    for qt in MAXIMAL_EXPONENTS {
        best = best.max(s_norm_from(pieces, cutoff, q, qt)?);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SNorm {
    pub value: f64,
    pub q: f64,
    pub q_tilde: f64,
    pub err_est: f64,
    pub diagnostics: Diagnostics,
}

/// `S^{q,qt}_{N,J}` of `flow` on `J = span`.
pub fn s_norm<F, E>(
    flow: &F,
    cutoff: f64,
    q: f64,
    q_tilde: f64,
    span: (f64, f64),
    reach: f64,
    exec: &E,
) -> Result<SNorm>
where
    F: Flow + ?Sized,
    E: Executor + ?Sized,
{
    check_exponents(Some(q), q_tilde)?;
    let pieces = unit_pieces(flow, cutoff, span, &[q_tilde], reach, exec)?;
    Ok(SNorm {
        value: s_norm_from(&pieces, cutoff, q, q_tilde)?,
        q,
        q_tilde,
        err_est: pieces.err_est,
        diagnostics: pieces.diagnostics,
    })
}

/// Random separable datum with frequencies `N/2 <= xi_i <= N` on every axis:
/// a modulated bump on the Euclidean factors, Gaussian coefficients on the torus.
pub fn random_shell_data<R: Rng + ?Sized>(m: usize, n: usize, cutoff: f64, rng: &mut R) -> Result<SeparableData> {
    let mut gauss = || {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    };
    let mut axes = Vec::with_capacity(m + n);
    for _ in 0..m {
        let shifts = (0..4)
            .map(|j| ((j as f64 - 1.5) * 0.5, gauss()))
            .collect();
        axes.push(AxisProfile::Bump {
            cutoff: BoxCutoff::on_interval(0.5 * cutoff, cutoff),
            shifts,
        });
    }
    let lo = (0.5 * cutoff).ceil() as i64;
    let hi = cutoff.floor() as i64;
    for _ in 0..n {
        let values = (lo..=hi).map(|_| gauss()).collect();
        axes.push(AxisProfile::Coeffs { lo, values });
    }
    SeparableData::new(m, n, axes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::ProductFlow;
    use crate::exec::Sequential;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn intervals_follow_the_unit_lattice() {
        assert_eq!(unit_intervals(0.0, 1.0), [(0.0, 1.0)]);
        assert_eq!(unit_intervals(0.0, 2.5), [(0.0, 1.0), (1.0, 2.0), (2.0, 2.5)]);
        assert_eq!(unit_intervals(0.5, 1.5), [(0.5, 1.0), (1.0, 1.5)]);
    }

    #[test]
    fn single_interval_and_monotone_in_q() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data = random_shell_data(1, 2, 4.0, &mut rng).unwrap();
        let flow = ProductFlow::new(&data, Some(4.0), 12.0).unwrap();
        let one = unit_pieces(&flow, 4.0, (0.0, 1.0), &[5.0, 12.0], 5.0, &Sequential).unwrap();
        assert!(one.diagnostics.is_clean(), "{:?}", one.diagnostics);
        let s = s_norm_from(&one, 4.0, 4.0, 5.0).unwrap();
        assert!((s - one.norms[0][0] * 4f64.powf(0.5)).abs() < 1e-12 * s);
        let pieces = unit_pieces(&flow, 4.0, (0.0, 2.5), &[5.0, 12.0], 5.0, &Sequential).unwrap();
        assert_eq!(pieces.norms.len(), 3);
        for qt in [5.0, 12.0] {
            let mut prev = f64::INFINITY;
            for q in [3.5, 3.75, 4.0] {
                let v = s_norm_from(&pieces, 4.0, q, qt).unwrap();
                assert!(v <= prev);
                prev = v;
            }
        }
        let mx = s_norm_max_from(&pieces, 4.0, 4.0).unwrap();
        assert!(mx >= s_norm_from(&pieces, 4.0, 4.0, 12.0).unwrap());
        assert!(s_norm_from(&pieces, 4.0, 3.0, 5.0).is_err());
        assert!(s_norm(&flow, 4.0, 4.0, 13.0, (0.0, 1.0), 5.0, &Sequential).is_err());
    }

    #[test]
    fn localization_warning() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data = random_shell_data(1, 2, 4.0, &mut rng).unwrap();
        let flow = ProductFlow::new(&data, Some(4.0), 5.0).unwrap();
        // shell around N = 32 misses the datum entirely
        let p = unit_pieces(&flow, 32.0, (0.0, 0.25), &[5.0], 5.0, &Sequential).unwrap();
        assert!(p.diagnostics.warnings.iter().any(|w| matches!(w, Warning::Localization { .. })));
    }
}
