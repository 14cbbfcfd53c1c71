//! The truncated kernel
//! `K_N(t, x) = int e^{2 pi i (x.xi - t |xi|^2)} prod_i chi(xi_i / N) dxi`
//! on `R^2 x T` and `R x T^2`, its envelopes by regime, and the time
//! decomposition `psi(t/T) K_N = J_1 + J_2 + J_3 + J_4`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::cutoff::chi;
use crate::error::{Error, Result};
use crate::field::{PhysicalField, Projector, SpectralField};
use crate::grid::Grid;
use crate::separable::LineFactor;
use crate::weyl::WeylSampler;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelVariant {
    /// `R^2 x T`
    R2T,
    /// `R x T^2`
    RT2,
}

impl KernelVariant {
    pub fn dims(self) -> (usize, usize) {
        match self {
            KernelVariant::R2T => (2, 1),
            KernelVariant::RT2 => (1, 2),
        }
    }

    pub fn from_dims(m: usize, n: usize) -> Result<Self> {
        match (m, n) {
            (2, 1) => Ok(KernelVariant::R2T),
            (1, 2) => Ok(KernelVariant::RT2),
            _ => Err(Error::DimensionError { m, n }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelVariant::R2T => "R2T",
            KernelVariant::RT2 => "RT2",
        }
    }

    /// Envelope of `sup_x |K_N(t, .)|` in the regime containing `|t|`.
    pub fn bound(self, t: f64, cutoff: f64) -> f64 {
        let t = t.abs();
        match regime(t, cutoff) {
            Regime::Short => cutoff.powi(3).min(t.powf(-1.5)),
            Regime::Middle => match self {
                KernelVariant::R2T => cutoff * t.powf(-0.5),
                KernelVariant::RT2 => cutoff * cutoff * t.sqrt(),
            },
            Regime::Long => match self {
                KernelVariant::R2T => cutoff / t,
                KernelVariant::RT2 => cutoff * cutoff * t.powf(-0.5),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Regime {
    /// `|t| <= 1/N`
    Short,
    /// `1/N < |t| <= 1`
    Middle,
    /// `|t| > 1`
    Long,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Short => "short",
            Regime::Middle => "middle",
            Regime::Long => "long",
        }
    }
}

pub fn regime(t: f64, cutoff: f64) -> Regime {
    let t = t.abs();
    if t <= 1.0 / cutoff {
        Regime::Short
    } else if t <= 1.0 {
        Regime::Middle
    } else {
        Regime::Long
    }
}

/// `K_N(t, .)` on a periodized grid, via the box multiplier and the propagator.
pub fn eval_kernel(t: f64, cutoff: f64, grid: Arc<Grid>) -> Result<PhysicalField> {
    let ones = SpectralField::from_fn(grid, |_| Complex64::new(1.0, 0.0));
    Ok(ones.project(cutoff, Projector::Box)?.propagate(t).inverse())
}

/// `sup_x |K_N(t, .)|` as a product of one-dimensional suprema: the
/// Euclidean factor on the whole line, the torus factor by Weyl sums.
#[derive(Debug, Clone)]
pub struct KernelSup {
    variant: KernelVariant,
    cutoff: f64,
    line: LineFactor,
    weyl: WeylSampler,
}

impl KernelSup {
    pub fn new(variant: KernelVariant, cutoff: f64) -> Result<Self> {
        let spectrum = |xi: f64| Complex64::new(chi(xi / cutoff), 0.0);
        // oversampling 4 keeps the sampled maximum within 1% of the true one
        let line = LineFactor::new(&spectrum, 2.0 * cutoff, 64.0 / cutoff, 8.0)?;
        Ok(Self {
            variant,
            cutoff,
            line,
            weyl: WeylSampler::new(cutoff)?,
        })
    }

    pub fn variant(&self) -> KernelVariant {
        self.variant
    }

    pub fn line_sup(&self, t: f64) -> f64 {
        self.line
            .moduli_slice(t.abs())
            .values
            .iter()
            .fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn torus_sup(&self, t: f64) -> f64 {
        self.weyl.sup(t.abs())
    }

    /// `|K_N(-t, x)| = |K_N(t, -x)|`, so the supremum is even in `t`.
    pub fn sup(&self, t: f64) -> f64 {
        let (m, n) = self.variant.dims();
        self.line_sup(t).powi(m as i32) * self.torus_sup(t).powi(n as i32)
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }
}

/// Default time grid: `N`-scaled in the short regime, fixed points (including
/// small-denominator rationals and integers) beyond.
pub fn default_times(cutoff: f64) -> Vec<f64> {
    let mut ts = Vec::new();
    ts.push(0.0);
    let mut s = 0.25;
    while s / (cutoff * cutoff) <= 1.0 / cutoff {
        ts.push(s / (cutoff * cutoff));
        s *= 2.0;
    }
    let middle = [
        2.0, 3.0, 4.0, 6.0, 8.0, 16.0, 32.0, 64.0,
    ];
    for k in middle {
        let t = k / cutoff;
        if t > 1.0 / cutoff && t <= 1.0 {
            ts.push(t);
        }
    }
    for &t in &[0.125, 0.2, 0.25, 1.0 / 3.0, 0.375, 0.5, 0.6, 2.0 / 3.0, 0.75, 1.0] {
        if t > 1.0 / cutoff {
            ts.push(t);
        }
    }
    for &t in &[1.25, 1.5, 2.0, 2.5, 3.0, 4.0, 5.5, 8.0, 12.0, 16.0] {
        ts.push(t);
    }
    ts.sort_by(|a, b| a.total_cmp(b));
    ts.dedup();
    ts
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeRow {
    pub t: f64,
    pub sup: f64,
    pub bound: f64,
    pub ratio: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeConstant {
    pub regime: Regime,
    /// `sup` of measured / bound over the regime.
    pub constant: f64,
    pub at_t: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport {
    pub variant: KernelVariant,
    pub cutoff: f64,
    pub rows: Vec<EnvelopeRow>,
    pub regimes: Vec<RegimeConstant>,
}

/// Regime constants from measured `(t, sup)` pairs; every regime needs a point.
pub fn envelope_constants(
    variant: KernelVariant,
    cutoff: f64,
    samples: &[(f64, f64)],
) -> Result<EnvelopeReport> {
    let rows: Vec<EnvelopeRow> = samples
        .iter()
        .map(|&(t, sup)| {
            let bound = variant.bound(t, cutoff);
            EnvelopeRow {
                t,
                sup,
                bound,
                ratio: sup / bound,
                regime: regime(t, cutoff),
            }
        })
        .collect();
    let mut regimes = Vec::new();
    for r in [Regime::Short, Regime::Middle, Regime::Long] {
        let mut best = RegimeConstant {
            regime: r,
            constant: 0.0,
            at_t: 0.0,
            points: 0,
        };
        for row in rows.iter().filter(|row| row.regime == r) {
            best.points += 1;
            if row.ratio > best.constant {
                best.constant = row.ratio;
                best.at_t = row.t;
            }
        }
        if best.points == 0 {
            return Err(Error::InsufficientRange(alloc::format!(
                "no sample times in the {} regime",
                r.name()
            )));
        }
        regimes.push(best);
    }
    Ok(EnvelopeReport {
        variant,
        cutoff,
        rows,
        regimes,
    })
}

/// Measures `sup_x |K_N(t, .)|` over `times` and fits the regime constants.
pub fn dispersive_check(variant: KernelVariant, cutoff: f64, times: Option<&[f64]>) -> Result<EnvelopeReport> {
    let k = KernelSup::new(variant, cutoff)?;
    let owned;
    let times = match times {
        Some(t) => t,
        None => {
            owned = default_times(cutoff);
            &owned
        }
    };
    let samples: Vec<(f64, f64)> = times.iter().map(|&t| (t, k.sup(t))).collect();
    envelope_constants(variant, cutoff, &samples)
}

/// Per-regime ratio of constants between two reports, larger over smaller.
pub fn stability(a: &EnvelopeReport, b: &EnvelopeReport) -> Vec<(Regime, f64)> {
    a.regimes
        .iter()
        .zip(&b.regimes)
        .map(|(x, y)| (x.regime, x.constant.max(y.constant) / x.constant.min(y.constant)))
        .collect()
}

/// The time weight `psi = c (eta * eta)` with `eta(t) = exp(-1/(1 - t^2))`:
/// supported in `[-2, 2]`, with nonnegative Fourier transform `c |eta_hat|^2`,
/// scaled so that `psi(+-1) = 1.01` (its minimum on `[-1, 1]`).
#[derive(Debug, Clone, Copy)]
pub struct Psi {
    scale: f64,
}

const PSI_PANELS: usize = 2000;

fn eta(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

fn eta_conv(s: f64) -> f64 {
    let s = s.abs();
    if s >= 2.0 {
        return 0.0;
    }
    let (a, b) = (s - 1.0, 1.0);
    let h = (b - a) / PSI_PANELS as f64;
    // integrand vanishes to all orders at both ends
    (1..PSI_PANELS)
        .map(|i| {
            let u = a + i as f64 * h;
            eta(u) * eta(s - u)
        })
        .sum::<f64>()
        * h
}

impl Default for Psi {
    fn default() -> Self {
        Self::new()
    }
}

impl Psi {
    pub fn new() -> Self {
        Self {
            scale: 1.01 / eta_conv(1.0),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.scale * eta_conv(t)
    }

    pub fn max(&self) -> f64 {
        self.eval(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JDecomposition {
    pub cutoff: f64,
    pub horizon: f64,
    pub a: f64,
    pub j1_hat_sup: f64,
    pub j2_sup: f64,
    pub j3_sup: f64,
    pub j4_sup: f64,
    pub psi_max: f64,
}

fn sampled_sup(ts: impl Iterator<Item = f64>, f: impl Fn(f64) -> f64) -> f64 {
    ts.fold(0.0, |m, t| m.max(f(t)))
}

fn geometric(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    let r = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(move |k| lo * (r * k as f64).exp())
}

/// Suprema of the four pieces of `psi(t/T) K_N(t, x)` split at `|t| ~ A`,
/// `|t| ~ 1/N` and `|t| ~ 1`. Since `K_N(-t)` mirrors `K_N(t)`, only `t > 0`
/// is sampled.
pub fn j_decomposition(variant: KernelVariant, cutoff: f64, horizon: f64, a: f64) -> Result<JDecomposition> {
    if !(a > 0.0 && a < 1.0 / cutoff) {
        return Err(Error::ParameterOutOfRange(alloc::format!(
            "need 0 < A < 1/N, got A = {a}, N = {cutoff}"
        )));
    }
    if !(horizon >= 1.0) {
        return Err(Error::ParameterOutOfRange(alloc::format!(
            "need T >= 1, got {horizon}"
        )));
    }
    let psi = Psi::new();
    let k = KernelSup::new(variant, cutoff)?;
    let w = |t: f64| psi.eval(t / horizon);

    // J1 hat at any frequency is bounded by its value at the origin in time
    // frequency, where all phases align: sup_xi prod chi = 1.
    let panels = 4000;
    let h = 4.0 * a / panels as f64;
    let j1 = (1..panels)
        .map(|i| {
            let t = -2.0 * a + i as f64 * h;
            w(t) * chi(t / a)
        })
        .sum::<f64>()
        * h;

    let j2 = sampled_sup(geometric(a, 2.0 / cutoff, 96), |t| {
        w(t) * chi(cutoff * t) * (1.0 - chi(t / a)) * k.sup(t)
    });
    let j3 = sampled_sup(geometric(1.0 / cutoff, 2.0, 96), |t| {
        w(t) * chi(t) * (1.0 - chi(cutoff * t)) * k.sup(t)
    });
    // integers and half-integers catch the Weyl peaks of the long range
    let long = geometric(1.0, 2.0 * horizon, 64).chain((2..(4.0 * horizon) as usize).map(|i| 0.5 * i as f64));
    let j4 = sampled_sup(long, |t| w(t) * (1.0 - chi(t)) * k.sup(t));
    Ok(JDecomposition {
        cutoff,
        horizon,
        a,
        j1_hat_sup: j1,
        j2_sup: j2,
        j3_sup: j3,
        j4_sup: j4,
        psi_max: psi.max(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, WaveguideSpec};
    use crate::weyl::weyl_sum;

    #[test]
    fn kernel_at_time_zero() {
        let n = 4.0;
        let spec = WaveguideSpec::new(1, 2, 32.0, &[512, 16, 16]).unwrap();
        let grid = Arc::new(build_grid(&spec, Some(n)).unwrap());
        let k = eval_kernel(0.0, n, grid).unwrap();
        let origin = k.samples()[0];
        let torus: f64 = (-8..=8).map(|j| chi(j as f64 / n)).sum();
        // int chi(u/N) du = 3N
        let want = 3.0 * n * torus * torus;
        assert!((origin.re - want).abs() < 1e-9 * want && origin.im.abs() < 1e-9 * want);
        assert!((2.0 * n * (2.0 * n + 1.0).powi(2)..=4.0 * n * (4.0 * n + 1.0).powi(2)).contains(&origin.re));
    }

    #[test]
    fn grid_kernel_matches_factor_kernel() {
        // two code paths: full-grid propagation vs line factor times direct Weyl sums
        let n = 4.0;
        let t = 0.01;
        let spec = WaveguideSpec::new(1, 2, 32.0, &[512, 16, 16]).unwrap();
        let grid = Arc::new(build_grid(&spec, Some(n)).unwrap());
        let k = eval_kernel(t, n, grid.clone()).unwrap();
        let ks = KernelSup::new(KernelVariant::RT2, n).unwrap();
        let line = ks.line.eval(t);
        let pos = grid.axis_positions(0);
        let ypos = grid.axis_positions(1);
        for &(i, j, l) in &[(0usize, 0usize, 0usize), (3, 5, 2), (510, 9, 15), (40, 1, 7)] {
            let x = pos[i];
            let li = line
                .positions
                .iter()
                .position(|p| (p - x).abs() < 1e-12)
                .expect("line sample");
            let want = line.values[li] * weyl_sum(t, ypos[j], n) * weyl_sum(t, ypos[l], n);
            let got = k.samples()[(i * 16 + j) * 16 + l];
            assert!((got - want).norm() < 1e-10 * want.norm().max(1.0), "{got} vs {want}");
        }
        // conjugation symmetry K(-t, -x) = conj K(t, x)
        let km = eval_kernel(-t, n, grid.clone()).unwrap();
        let dims = [512usize, 16, 16];
        for &(i, j, l) in &[(1usize, 2usize, 3usize), (100, 0, 15)] {
            let neg = |a: usize, len: usize| (len - a) % len;
            let a = k.samples()[(i * 16 + j) * 16 + l];
            let b = km.samples()[(neg(i, dims[0]) * 16 + neg(j, 16)) * 16 + neg(l, 16)];
            assert!((a.conj() - b).norm() < 1e-10 * a.norm().max(1.0));
        }
        assert!((ks.sup(t) - ks.sup(-t)).abs() < 1e-12);
    }

    #[test]
    fn synthetic_envelope_constants() {
        let n = 16.0;
        let ts = default_times(n);
        for v in [KernelVariant::R2T, KernelVariant::RT2] {
            let samples: Vec<(f64, f64)> = ts.iter().map(|&t| (t, v.bound(t, n))).collect();
            let r = envelope_constants(v, n, &samples).unwrap();
            for c in &r.regimes {
                assert!((c.constant - 1.0).abs() < 1e-12);
            }
        }
        assert!(matches!(
            envelope_constants(KernelVariant::RT2, n, &[(0.0, 1.0)]),
            Err(Error::InsufficientRange(_))
        ));
    }

    #[test]
    fn short_regime_constant_from_time_zero() {
        let r = dispersive_check(KernelVariant::RT2, 16.0, None).unwrap();
        let c0 = r.rows[0].ratio;
        assert_eq!(r.rows[0].t, 0.0);
        assert!((8.0..=64.0 * 1.2).contains(&c0), "{c0}");
        assert!(r.regimes[0].constant >= c0);
    }

    #[test]
    fn psi_shape() {
        let psi = Psi::new();
        assert!((psi.eval(1.0) - 1.01).abs() < 1e-12);
        assert!((psi.eval(-1.0) - 1.01).abs() < 1e-12);
        assert_eq!(psi.eval(2.0), 0.0);
        for i in 0..=20 {
            assert!(psi.eval(i as f64 / 20.0) >= 1.01 - 1e-12);
        }
        assert!(psi.max() > 1.01);
    }

    #[test]
    fn j1_bound() {
        let d = j_decomposition(KernelVariant::RT2, 16.0, 4.0, 1.0 / 64.0).unwrap();
        assert!(d.j1_hat_sup <= 4.0 * d.a * d.psi_max);
        assert!(d.j2_sup > 0.0 && d.j3_sup > 0.0 && d.j4_sup > 0.0);
        assert!(j_decomposition(KernelVariant::RT2, 16.0, 4.0, 0.1).is_err());
    }
}
