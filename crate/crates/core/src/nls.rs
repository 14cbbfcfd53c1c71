//! Split-step solver for the defocusing equation
//! `i u_t + Delta u = |u|^{mu-1} u` on a periodized `R x T^2` (any grid works).
//!
//! With `phi_hat(xi) = int phi e^{-2 pi i x xi}`, `Delta` acts as
//! `-4 pi^2 |xi|^2`, so the linear substep over `dt` is the free propagator at
//! time `2 pi dt`. The state lives in physical space on the full grid and is
//! never truncated: both substeps are exact isometries of the discrete `L^2`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::field::{PhysicalField, SpectralField};
use crate::fit::{loglog_fit, FitOptions};
use crate::grid::Grid;

/// Blow-up guard: `sup |u|` may not exceed this multiple of its initial value.
pub const BLOWUP_FACTOR: f64 = 1e6;

/// Grid headroom over the data cutoff: every axis must resolve `padding * N`.
pub const DEFAULT_PADDING: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlsOptions {
    /// 1 for the defocusing equation, 0 for the free flow.
    pub coupling: f64,
    pub padding: f64,
}

impl Default for NlsOptions {
    fn default() -> Self {
        Self {
            coupling: 1.0,
            padding: DEFAULT_PADDING,
        }
    }
}

/// Steps between blow-up checks inside [`NlsState::advance`].
const GUARD_EVERY: usize = 64;

/// `|u|^{mu-1}` from `|u|^2`, avoiding `powf` for integer and half-integer powers.
#[inline]
fn modulus_power(r2: f64, half_exp: f64, kind: PowerKind) -> f64 {
    match kind {
        PowerKind::Int(k) => r2.powi(k),
        PowerKind::Half(k) => r2.powi(k) * r2.sqrt(),
        PowerKind::Real => r2.powf(half_exp),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum PowerKind {
    Int(i32),
    Half(i32),
    Real,
}

fn power_kind(half_exp: f64) -> PowerKind {
    if half_exp.fract() == 0.0 {
        PowerKind::Int(half_exp as i32)
    } else if (2.0 * half_exp).fract() == 0.0 {
        PowerKind::Half(half_exp.floor() as i32)
    } else {
        PowerKind::Real
    }
}

/// `u <- u exp(-i tau c |u|^{mu-1})`; leaves `|u|` unchanged pointwise.
pub fn nonlinear_phase(samples: &mut [Complex64], mu: f64, coupling: f64, tau: f64) {
    let half = 0.5 * (mu - 1.0);
    let kind = power_kind(half);
    for v in samples.iter_mut() {
        let a = -tau * coupling * modulus_power(v.norm_sqr(), half, kind);
        let (s, c) = a.sin_cos();
        *v *= Complex64::new(c, s);
    }
}

/// `M[u] = int |u|^2`.
pub fn mass(u: &PhysicalField) -> f64 {
    u.l2_norm().powi(2)
}

/// `int |grad u|^2 = 4 pi^2 int |xi|^2 |u_hat|^2`.
pub fn kinetic(u: &SpectralField) -> f64 {
    let sq = u.grid().freq_sq();
    let four_pi2 = 4.0 * core::f64::consts::PI * core::f64::consts::PI;
    u.coeffs().iter().zip(&sq).map(|(c, r2)| r2 * c.norm_sqr()).sum::<f64>() * u.grid().freq_weight() * four_pi2
}

/// `E[u] = int |grad u|^2 / 2 + c |u|^{mu+1} / (mu+1)`, the potential term by
/// quadrature on the grid.
pub fn energy(u: &PhysicalField, mu: f64, coupling: f64) -> f64 {
    let pot: f64 = u.samples().iter().map(|v| v.norm().powf(mu + 1.0)).sum::<f64>() * u.grid().cell_volume();
    0.5 * kinetic(&u.forward()) + coupling * pot / (mu + 1.0)
}

#[derive(Debug, Clone)]
pub struct NlsState {
    grid: Arc<Grid>,
    samples: Vec<Complex64>,
    linear: Vec<Complex64>,
    t: f64,
    dt: f64,
    mu: f64,
    coupling: f64,
    pub mass0: f64,
    pub energy0: f64,
    sup0: f64,
}

impl NlsState {
    /// Defocusing flow of `u0` with step `dt`; `cutoff` is the frequency scale
    /// of the data and must satisfy `dt N^2 <= 1/4`.
    pub fn new(u0: &SpectralField, mu: f64, dt: f64, cutoff: f64) -> Result<Self> {
        Self::with_options(u0, mu, dt, cutoff, NlsOptions::default())
    }

    pub fn with_options(u0: &SpectralField, mu: f64, dt: f64, cutoff: f64, opts: NlsOptions) -> Result<Self> {
        let coupling = opts.coupling;
        if !(mu >= 1.0) {
            return Err(Error::ParameterOutOfRange(alloc::format!("need mu >= 1, got {mu}")));
        }
        if !(dt != 0.0 && dt.abs() * cutoff * cutoff <= 0.25 + 1e-12) {
            return Err(Error::ParameterOutOfRange(alloc::format!(
                "need 0 < |dt| N^2 <= 1/4, got dt = {dt}, N = {cutoff}"
            )));
        }
        let grid = u0.grid().clone();
        for axis in 0..grid.spec().d() {
            let available = grid.spec().max_freq(axis);
            if available < opts.padding * cutoff {
                return Err(Error::NyquistViolation {
                    axis,
                    required: opts.padding * cutoff,
                    available,
                });
            }
        }
        let phys = u0.inverse();
        let sup0 = phys.sup_abs();
        if sup0 == 0.0 {
            return Err(Error::ZeroData);
        }
        let two_pi = 2.0 * core::f64::consts::PI;
        Ok(Self {
            linear: grid.propagator(two_pi * dt),
            mass0: mass(&phys),
            energy0: energy(&phys, mu, coupling),
            samples: phys.into_samples(),
            grid,
            t: 0.0,
            dt,
            mu,
            coupling,
            sup0,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn physical(&self) -> PhysicalField {
        PhysicalField::new(self.grid.clone(), self.samples.clone()).expect("own grid")
    }

    pub fn spectral(&self) -> SpectralField {
        self.physical().forward()
    }

    pub fn mass(&self) -> f64 {
        mass(&self.physical())
    }

    pub fn energy(&self) -> f64 {
        energy(&self.physical(), self.mu, self.coupling)
    }

    pub fn mass_drift(&self) -> f64 {
        (self.mass() - self.mass0).abs() / self.mass0
    }

    pub fn energy_drift(&self) -> f64 {
        (self.energy() - self.energy0).abs() / self.energy0.abs()
    }

    pub fn hs_norm(&self, s: f64) -> f64 {
        self.spectral().hs_norm(s)
    }

    /// Runs backwards in time from now on.
    pub fn reverse(&mut self) {
        self.dt = -self.dt;
        for v in self.linear.iter_mut() {
            *v = v.conj();
        }
    }

    fn linear_step(&mut self) {
        self.grid.forward_in_place(&mut self.samples);
        for (v, e) in self.samples.iter_mut().zip(&self.linear) {
            *v *= e;
        }
        self.grid.inverse_in_place(&mut self.samples);
    }

    fn guard(&self) -> Result<()> {
        let sup = self.samples.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let limit = BLOWUP_FACTOR * self.sup0;
        if !(sup <= limit) {
            return Err(Error::BlowupGuard { t: self.t, sup, limit });
        }
        Ok(())
    }

    /// One Strang step: half phase, linear step, half phase.
    pub fn split_step(&mut self) -> Result<()> {
        self.advance(1)
    }

    /// `steps` Strang steps; adjacent half phases are merged into full ones,
    /// which is exact because the phase leaves `|u|` unchanged.
    pub fn advance(&mut self, steps: usize) -> Result<()> {
        if steps == 0 {
            return Ok(());
        }
        let (mu, c, dt) = (self.mu, self.coupling, self.dt);
        nonlinear_phase(&mut self.samples, mu, c, 0.5 * dt);
        for k in 0..steps {
            self.linear_step();
            let tau = if k + 1 == steps { 0.5 * dt } else { dt };
            nonlinear_phase(&mut self.samples, mu, c, tau);
            self.t += dt;
            if (k + 1) % GUARD_EVERY == 0 {
                self.guard()?;
            }
        }
        self.guard()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub hs: f64,
    pub mass_rel_drift: f64,
    pub energy_rel_drift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthRecord {
    pub s: f64,
    pub mu: f64,
    /// `||u(0)||_{H^s}`.
    pub a: f64,
    pub max_hs: f64,
    pub exponent: f64,
    /// Points used by the fit (0 when the envelope never left `A`).
    pub fit_points: usize,
    pub omega: Option<f64>,
}

/// Growth exponent from the max-so-far envelope: the log-log slope of
/// `max_{t' <= t} ||u(t')||_{H^s} - A` against `t` over the second half of
/// the series. Increments below `1e-9 A` count as no growth.
pub fn fit_growth(series: &[SeriesRow], a: f64) -> (f64, usize) {
    let horizon = series.last().map_or(0.0, |r| r.t);
    let mut envelope = a;
    let mut pts = Vec::new();
    for r in series {
        envelope = envelope.max(r.hs);
        if r.t >= 0.5 * horizon && r.t > 0.0 {
            pts.push((r.t, envelope - a));
        }
    }
    let grown: Vec<(f64, f64)> = pts.iter().cloned().filter(|p| p.1 > 1e-9 * a).collect();
    if grown.len() < 3 {
        return (0.0, 0);
    }
    let xs: Vec<f64> = grown.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = grown.iter().map(|p| p.1).collect();
    match loglog_fit(&xs, &ys, "t", FitOptions { min_distinct: 3 }) {
        Ok(f) => (f.slope, grown.len()),
        Err(_) => (0.0, 0),
    }
}

/// Evolves `u0` to `horizon`, recording at every unit of time.
#[allow(clippy::too_many_arguments)]
pub fn run_trajectory(
    u0: &SpectralField,
    mu: f64,
    s: f64,
    horizon: f64,
    dt: f64,
    cutoff: f64,
    omega: Option<f64>,
    opts: NlsOptions,
) -> Result<(GrowthRecord, Vec<SeriesRow>)> {
    let mut st = NlsState::with_options(u0, mu, dt, cutoff, opts)?;
    let per_unit = (1.0 / dt).round();
    if (per_unit * dt - 1.0).abs() > 1e-12 {
        return Err(Error::ParameterOutOfRange(alloc::format!("1/dt = {} is not an integer", 1.0 / dt)));
    }
    let units = horizon.round() as usize;
    let a = st.hs_norm(s);
    let row = |st: &NlsState| SeriesRow {
        t: st.time(),
        hs: st.hs_norm(s),
        mass_rel_drift: st.mass_drift(),
        energy_rel_drift: st.energy_drift(),
    };
    let mut series = alloc::vec![row(&st)];
    for _ in 0..units {
        st.advance(per_unit as usize)?;
        series.push(row(&st));
    }
    let max_hs = series.iter().fold(a, |m, r| m.max(r.hs));
    let (exponent, fit_points) = fit_growth(&series, a);
    Ok((
        GrowthRecord {
            s,
            mu,
            a,
            max_hs,
            exponent,
            fit_points,
            omega,
        },
        series,
    ))
}

/// Smooth random datum: complex Gaussian coefficients times
/// `exp(-|xi|^2 / (2 (N/4)^2))` on `|xi| <= N`, scaled to `sup |u| = amplitude`.
pub fn nls_datum<R: Rng + ?Sized>(grid: Arc<Grid>, cutoff: f64, amplitude: f64, rng: &mut R) -> Result<SpectralField> {
    let w = cutoff / 4.0;
    let raw = SpectralField::from_fn(grid, |xi| {
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        if r2 <= cutoff * cutoff {
            let a: f64 = StandardNormal.sample(rng);
            let b: f64 = StandardNormal.sample(rng);
            Complex64::new(a, b) * (-r2 / (2.0 * w * w)).exp()
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let sup = raw.inverse().sup_abs();
    if sup == 0.0 {
        return Err(Error::ZeroData);
    }
    Ok(raw.scale(Complex64::new(amplitude / sup, 0.0)).with_tag("nls-datum"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, WaveguideSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> Arc<Grid> {
        let spec = WaveguideSpec::new(1, 2, 2.0, &[32, 16, 16]).unwrap();
        Arc::new(build_grid(&spec, Some(4.0)).unwrap())
    }

    #[test]
    fn phase_keeps_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = nls_datum(grid(), 4.0, 1.3, &mut rng).unwrap().inverse();
        for mu in [3.5, 4.0, 5.0, 4.3] {
            let mut v = u.samples().to_vec();
            nonlinear_phase(&mut v, mu, 1.0, 0.37);
            for (a, b) in v.iter().zip(u.samples()) {
                assert!((a.norm() - b.norm()).abs() <= 1e-15 * b.norm().max(1.0));
            }
        }
        for (h, k) in [(1.5, PowerKind::Half(1)), (2.0, PowerKind::Int(2)), (1.65, PowerKind::Real)] {
            assert_eq!(power_kind(h), k);
            assert!((modulus_power(2.3, h, k) - 2.3f64.powf(h)).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_field_and_single_mode_energy() {
        let g = grid();
        let z = SpectralField::zeros(g.clone()).inverse();
        assert_eq!((mass(&z), energy(&z, 5.0, 1.0)), (0.0, 0.0));
        // u = a e^{2 pi i k.y} on the torus directions, constant along the line
        let a = 0.7;
        let k = [1.0, 2.0];
        let u = PhysicalField::from_fn(g.clone(), |x| {
            let ph = k[0] * x[1] + k[1] * x[2];
            Complex64::new(0.0, 2.0 * core::f64::consts::PI * ph).exp() * a
        });
        let vol = g.volume();
        let k2 = k[0] * k[0] + k[1] * k[1];
        let four_pi2 = 4.0 * core::f64::consts::PI * core::f64::consts::PI;
        let want = 0.5 * four_pi2 * a * a * k2 * vol + a.powi(6) / 6.0 * vol;
        assert!((energy(&u, 5.0, 1.0) - want).abs() < 1e-10 * want);
    }

    #[test]
    fn linear_flow_conserves_kinetic_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u0 = nls_datum(grid(), 4.0, 1.0, &mut rng).unwrap();
        let mut st = NlsState::with_options(&u0, 4.0, 1.0 / 64.0, 4.0, NlsOptions { coupling: 0.0, ..Default::default() }).unwrap();
        st.advance(50).unwrap();
        assert!(st.energy_drift() < 1e-10);
        // and agrees with the free propagator at time 2 pi t
        let want = u0.propagate(2.0 * core::f64::consts::PI * st.time());
        let got = st.spectral();
        assert!(got.axpy(Complex64::new(-1.0, 0.0), &want).unwrap().l2_norm() < 1e-10 * want.l2_norm());
    }

    #[test]
    fn mass_reversibility_and_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u0 = nls_datum(grid(), 4.0, 1.0, &mut rng).unwrap();
        let mut st = NlsState::new(&u0, 4.0, 1.0 / 64.0, 4.0).unwrap();
        st.advance(1000).unwrap();
        assert!(st.mass_drift() < 1e-10, "{}", st.mass_drift());
        let mut back = NlsState::new(&u0, 4.0, 1.0 / 64.0, 4.0).unwrap();
        back.advance(100).unwrap();
        back.reverse();
        back.advance(100).unwrap();
        let diff = back.spectral().axpy(Complex64::new(-1.0, 0.0), &u0).unwrap().l2_norm();
        assert!(diff < 1e-8 * u0.l2_norm(), "{diff}");
        // single steps and fused steps agree
        let mut a = NlsState::new(&u0, 4.0, 1.0 / 64.0, 4.0).unwrap();
        let mut b = a.clone();
        for _ in 0..10 {
            a.split_step().unwrap();
        }
        b.advance(10).unwrap();
        let d = a.spectral().axpy(Complex64::new(-1.0, 0.0), &b.spectral()).unwrap().l2_norm();
        assert!(d < 1e-12 * u0.l2_norm());
        assert!(NlsState::new(&u0, 4.0, 1.0 / 8.0, 4.0).is_err());
    }

    #[test]
    fn growth_fit_edge_cases() {
        let flat: Vec<SeriesRow> = (0..=10)
            .map(|t| SeriesRow {
                t: t as f64,
                hs: 1.0,
                mass_rel_drift: 0.0,
                energy_rel_drift: 0.0,
            })
            .collect();
        assert_eq!(fit_growth(&flat, 1.0), (0.0, 0));
        let grow: Vec<SeriesRow> = (0..=20)
            .map(|t| SeriesRow {
                t: t as f64,
                hs: 1.0 + (t as f64).powf(0.5),
                mass_rel_drift: 0.0,
                energy_rel_drift: 0.0,
            })
            .collect();
        let (e, n) = fit_growth(&grow, 1.0);
        assert!((e - 0.5).abs() < 1e-12 && n == 11);
    }
}
