//! Separable data `phi_hat(xi) = prod_a f_a(xi_a)` and exact one-dimensional
//! evaluators of the free flow of each factor.
//!
//! For separable data `|e^{it Delta} phi|` is a product of one-dimensional
//! moduli, so space-time norms and level sets reduce to work on 1-D arrays.
//! Euclidean factors are evaluated on the whole line (not a periodized box):
//! short times by FFT on a box that contains the spreading solution, long
//! times through the lens identity
//! `u(t,x) = (2it)^{-1/2} e^{i pi x^2/(2t)} g_t^(x/(2t))`, `g_t = phi e^{i pi y^2/(2t)}`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::cutoff::{chi, BoxCutoff};
use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::field::SpectralField;
use crate::grid::{chirp, AxisKind, Grid};

/// Half-widths of physical box per unit of spectral smoothness scale; the
/// inverse transform of `chi` is below `1e-10` of its peak beyond `|y| = 30`.
pub const DECAY_BOX: f64 = 64.0;

/// One-dimensional spectral profile of a separable datum.
#[derive(Debug, Clone, PartialEq)]
pub enum AxisProfile {
    /// `chi` box, optionally modulated by `sum_r c_r e^{-2 pi i xi y_r}`
    /// (a superposition of translates `y_r` in physical space).
    Bump {
        cutoff: BoxCutoff,
        shifts: Vec<(f64, Complex64)>,
    },
    /// A single torus mode with unit coefficient.
    Mode(i64),
    /// Explicit torus coefficients for `k = lo, lo+1, ...`.
    Coeffs { lo: i64, values: Vec<Complex64> },
}

impl AxisProfile {
    pub fn bump(cutoff: BoxCutoff) -> Self {
        AxisProfile::Bump {
            cutoff,
            shifts: Vec::new(),
        }
    }

    pub fn eval(&self, xi: f64) -> Complex64 {
        match self {
            AxisProfile::Bump { cutoff, shifts } => {
                let c = cutoff.eval(xi);
                if c == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                if shifts.is_empty() {
                    return Complex64::new(c, 0.0);
                }
                let s: Complex64 = shifts.iter().map(|(y, a)| a * chirp(-xi * y)).sum();
                s * c
            }
            AxisProfile::Mode(k) => {
                if xi == *k as f64 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            AxisProfile::Coeffs { lo, values } => {
                let r = xi.round();
                if r != xi {
                    return Complex64::new(0.0, 0.0);
                }
                let i = r as i64 - lo;
                if i >= 0 && (i as usize) < values.len() {
                    values[i as usize]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
        }
    }

    /// Largest `|xi|` in the support.
    pub fn reach(&self) -> f64 {
        match self {
            AxisProfile::Bump { cutoff, .. } => cutoff.reach(),
            AxisProfile::Mode(k) => k.abs() as f64,
            AxisProfile::Coeffs { lo, values } => {
                let hi = lo + values.len() as i64 - 1;
                lo.abs().max(hi.abs()) as f64
            }
        }
    }

    /// Physical box needed to hold the datum on a Euclidean axis.
    fn physical_box(&self) -> Option<f64> {
        match self {
            AxisProfile::Bump { cutoff, shifts } => {
                let spread = shifts.iter().fold(0.0f64, |m, (y, _)| m.max(y.abs()));
                Some(DECAY_BOX / cutoff.half_width + 2.0 * spread)
            }
            _ => None,
        }
    }

    fn integer_support(&self) -> core::ops::RangeInclusive<i64> {
        match self {
            AxisProfile::Bump { cutoff, .. } => cutoff.integer_support(),
            AxisProfile::Mode(k) => *k..=*k,
            AxisProfile::Coeffs { lo, values } => *lo..=(lo + values.len() as i64 - 1),
        }
    }

    /// `int |f|^2 dxi` on a Euclidean axis, `sum_k |f(k)|^2` on a torus axis.
    pub fn l2_norm_sq(&self, kind: AxisKind) -> f64 {
        match (kind, self) {
            (AxisKind::Line, AxisProfile::Bump { cutoff, shifts }) => {
                let spread = shifts.iter().fold(0.0f64, |m, (y, _)| m.max(y.abs()));
                let (a, b) = (
                    cutoff.center - 2.0 * cutoff.half_width,
                    cutoff.center + 2.0 * cutoff.half_width,
                );
                // smooth integrand with flat ends: the trapezoid rule converges fast
                let n = 4096usize.max((64.0 * (b - a) * spread).ceil() as usize);
                let h = (b - a) / n as f64;
                (1..n).map(|i| self.eval(a + i as f64 * h).norm_sqr()).sum::<f64>() * h
            }
            (AxisKind::Line, _) => f64::INFINITY,
            (AxisKind::Torus, _) => self
                .integer_support()
                .map(|k| self.eval(k as f64).norm_sqr())
                .sum(),
        }
    }
}

/// Product datum on `R^m x T^n`: axes `0..m` Euclidean, the rest periodic.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableData {
    pub m: usize,
    pub n: usize,
    pub axes: Vec<AxisProfile>,
}

impl SeparableData {
    pub fn new(m: usize, n: usize, axes: Vec<AxisProfile>) -> Result<Self> {
        if m == 0 || n == 0 || !(2..=3).contains(&(m + n)) {
            return Err(Error::DimensionError { m, n });
        }
        if axes.len() != m + n {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} axis profiles for d = {}",
                axes.len(),
                m + n
            )));
        }
        for a in &axes[..m] {
            if !matches!(a, AxisProfile::Bump { .. }) {
                return Err(Error::ParameterOutOfRange(
                    "Euclidean factors must be square integrable bumps".into(),
                ));
            }
        }
        Ok(Self { m, n, axes })
    }

    pub fn kind(&self, axis: usize) -> AxisKind {
        if axis < self.m {
            AxisKind::Line
        } else {
            AxisKind::Torus
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.axes
            .iter()
            .enumerate()
            .map(|(a, p)| p.l2_norm_sq(self.kind(a)))
            .product::<f64>()
            .sqrt()
    }

    /// Largest frequency reached on any axis.
    pub fn reach(&self) -> f64 {
        self.axes.iter().fold(0.0, |m, a| m.max(a.reach()))
    }

    /// Samples the datum on a grid lattice.
    pub fn realize(&self, grid: Arc<Grid>) -> Result<SpectralField> {
        let spec = grid.spec();
        if spec.m != self.m || spec.n != self.n {
            return Err(Error::ShapeMismatch(alloc::format!(
                "datum on R^{} x T^{}, grid on R^{} x T^{}",
                self.m,
                self.n,
                spec.m,
                spec.n
            )));
        }
        for (axis, p) in self.axes.iter().enumerate() {
            if p.reach() > spec.max_freq(axis) {
                return Err(Error::NyquistViolation {
                    axis,
                    required: p.reach(),
                    available: spec.max_freq(axis),
                });
            }
        }
        let factors: Vec<Vec<Complex64>> = (0..spec.d())
            .map(|a| grid.axis_freqs(a).iter().map(|&x| self.axes[a].eval(x)).collect())
            .collect();
        let coeffs = grid.separable(&factors);
        SpectralField::new(grid, coeffs, "separable")
    }

    /// Fraction of `|phi_hat|^2` mass with `|xi|` outside `[lo, hi]`, after the
    /// box cutoff `prod chi(xi_i / N)` when one is given.
    pub fn mass_outside_shell(&self, lo: f64, hi: f64, cutoff: Option<f64>) -> f64 {
        let proj = |x: f64| cutoff.map_or(1.0, |n| chi(x / n).powi(2));
        // per-axis (xi^2, weight) tables, then an exact nested sum
        let tables: Vec<Vec<(f64, f64)>> = self
            .axes
            .iter()
            .enumerate()
            .map(|(a, p)| match self.kind(a) {
                AxisKind::Torus => p
                    .integer_support()
                    .map(|k| ((k * k) as f64, p.eval(k as f64).norm_sqr() * proj(k as f64)))
                    .filter(|e| e.1 > 0.0)
                    .collect(),
                AxisKind::Line => {
                    let r = p.reach();
                    let n = 2048;
                    let h = 2.0 * r / n as f64;
                    (0..=n)
                        .map(|i| {
                            let x = -r + i as f64 * h;
                            (x * x, p.eval(x).norm_sqr() * proj(x) * h)
                        })
                        .filter(|e| e.1 > 0.0)
                        .collect()
                }
            })
            .collect();
        let mut combined: Vec<(f64, f64)> = vec![(0.0, 1.0)];
        for t in &tables {
            let mut next = Vec::with_capacity(combined.len() * t.len());
            for &(r2, w) in &combined {
                for &(s2, v) in t {
                    next.push((r2 + s2, w * v));
                }
            }
            combined = next;
        }
        let total: f64 = combined.iter().map(|e| e.1).sum();
        let out: f64 = combined
            .iter()
            .filter(|(r2, _)| {
                let r = r2.sqrt();
                r < lo || r > hi
            })
            .map(|e| e.1)
            .sum();
        if total > 0.0 {
            out / total
        } else {
            0.0
        }
    }
}

/// Oversampling factor making `|u|^p` Riemann sums exact for even `p`.
pub fn oversampling(p: f64) -> usize {
    ((p / 2.0).ceil().max(1.0) as usize).next_power_of_two()
}

fn plan(len: usize) -> Result<FftPlan> {
    FftPlan::new(len)
}

/// Moduli or values of one factor at one time, with the measure of each sample.
#[derive(Debug, Clone)]
pub struct FactorSlice {
    pub values: Vec<Complex64>,
    pub positions: Vec<f64>,
    pub cell: f64,
}

/// Free flow of a square-integrable datum on the line.
#[derive(Debug, Clone)]
pub struct LineFactor {
    band: f64,
    box0: f64,
    t_switch: f64,
    direct_len: f64,
    direct_plan: FftPlan,
    direct_modes: Vec<(usize, f64, Complex64)>,
    lens_len: f64,
    lens_plan: FftPlan,
    lens_data: Vec<(usize, f64, Complex64)>,
    dy: f64,
    edge_fraction: f64,
}

impl LineFactor {
    /// `spectrum` must vanish for `|xi| > band`; the datum must be negligible
    /// outside `[-box0/2, box0/2]`.
    pub fn new(spectrum: &dyn Fn(f64) -> Complex64, band: f64, box0: f64, p: f64) -> Result<Self> {
        if !(band > 0.0 && box0 > 0.0) {
            return Err(Error::ParameterOutOfRange(alloc::format!(
                "line factor needs positive band and box, got {band}, {box0}"
            )));
        }
        let over = oversampling(p) as f64;
        let t_switch = box0 / (4.0 * band);

        let direct_len = 2.0 * box0;
        let direct_m = ((direct_len * 2.0 * over * band).ceil() as usize).next_power_of_two();
        let direct_plan = plan(direct_m)?;
        let mut direct_modes = Vec::new();
        for j in 0..direct_m {
            let xi = Grid::signed_index(j, direct_m) as f64 / direct_len;
            if xi.abs() <= band {
                let c = spectrum(xi);
                if c != Complex64::new(0.0, 0.0) {
                    direct_modes.push((j, xi, c));
                }
            }
        }

        // data samples at spacing dy <= 1/(4 band) resolve g_t for every t >= t_switch
        let m0 = ((4.0 * band * box0).ceil() as usize).next_power_of_two().max(2);
        let dy = box0 / m0 as f64;
        let mut phi = vec![Complex64::new(0.0, 0.0); m0];
        for (j, v) in phi.iter_mut().enumerate() {
            let xi = Grid::signed_index(j, m0) as f64 / box0;
            if xi.abs() <= band {
                *v = spectrum(xi);
            }
        }
        plan(m0)?.inverse(&mut phi);
        let lens_m = m0 * oversampling(p);
        let lens_len = lens_m as f64 * dy;
        let mut total = 0.0;
        let mut edge = 0.0;
        let mut lens_data = Vec::with_capacity(m0);
        for (j, v) in phi.iter().enumerate() {
            let v = v / box0;
            let s = Grid::signed_index(j, m0);
            let y = s as f64 * dy;
            let w = v.norm_sqr();
            total += w;
            if y.abs() >= box0 / 2.0 - box0 / 16.0 {
                edge += w;
            }
            let idx = if s >= 0 { s as usize } else { (lens_m as i64 + s) as usize };
            lens_data.push((idx, y, v));
        }
        Ok(Self {
            band,
            box0,
            t_switch,
            direct_len,
            direct_plan,
            direct_modes,
            lens_len,
            lens_plan: plan(lens_m)?,
            lens_data,
            dy,
            edge_fraction: if total > 0.0 { edge / total } else { 0.0 },
        })
    }

    pub fn band(&self) -> f64 {
        self.band
    }

    pub fn box_length(&self) -> f64 {
        self.box0
    }

    pub fn switch_time(&self) -> f64 {
        self.t_switch
    }

    /// Fraction of `|phi|^2` within `box0/16` of the data box edge.
    pub fn edge_fraction(&self) -> f64 {
        self.edge_fraction
    }

    fn direct(&self, t: f64, want_phase: bool) -> FactorSlice {
        let m = self.direct_plan.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for &(j, xi, c) in &self.direct_modes {
            buf[j] = c * chirp(-t * xi * xi);
        }
        self.direct_plan.inverse(&mut buf);
        let s = 1.0 / self.direct_len;
        buf.iter_mut().for_each(|v| *v *= s);
        let h = self.direct_len / m as f64;
        let positions = if want_phase {
            (0..m).map(|j| Grid::signed_index(j, m) as f64 * h).collect()
        } else {
            Vec::new()
        };
        FactorSlice {
            values: buf,
            positions,
            cell: h,
        }
    }

    fn lens(&self, t: f64, want_phase: bool) -> FactorSlice {
        let m = self.lens_plan.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        let inv4t = 1.0 / (4.0 * t);
        for &(j, y, v) in &self.lens_data {
            buf[j] = v * chirp(y * y * inv4t);
        }
        self.lens_plan.forward(&mut buf);
        let amp = self.dy / (2.0 * t).sqrt();
        let cell = 2.0 * t / self.lens_len;
        if want_phase {
            let front = Complex64::from_polar(amp, -PI / 4.0);
            let positions: Vec<f64> =
                (0..m).map(|j| Grid::signed_index(j, m) as f64 * cell).collect();
            for (v, &x) in buf.iter_mut().zip(&positions) {
                *v *= front * chirp(x * x * inv4t);
            }
            FactorSlice {
                values: buf,
                positions,
                cell,
            }
        } else {
            buf.iter_mut().for_each(|v| *v *= amp);
            FactorSlice {
                values: buf,
                positions: Vec::new(),
                cell,
            }
        }
    }

    /// `u(t, x)` with positions; for `t < 0` uses time reversal of the conjugate.
    pub fn eval(&self, t: f64) -> FactorSlice {
        self.slice(t, true)
    }

    /// Values whose moduli equal `|u(t, .)|` (phases are not meaningful).
    pub fn moduli_slice(&self, t: f64) -> FactorSlice {
        self.slice(t, false)
    }

    fn slice(&self, t: f64, want_phase: bool) -> FactorSlice {
        debug_assert!(t >= 0.0, "line factors evolve forward in time");
        let t = t.abs();
        if t <= self.t_switch {
            self.direct(t, want_phase)
        } else {
            self.lens(t, want_phase)
        }
    }
}

/// Free flow of a trigonometric polynomial on the unit circle.
#[derive(Debug, Clone)]
pub struct TorusFactor {
    modes: Vec<(i64, Complex64)>,
    plan: FftPlan,
}

impl TorusFactor {
    pub fn new(modes: Vec<(i64, Complex64)>, p: f64) -> Result<Self> {
        let k = modes.iter().fold(0i64, |m, (k, _)| m.max(k.abs())) as usize;
        let m = ((p.ceil() as usize) * k + 1).max(2 * k + 1).max(2).next_power_of_two();
        Ok(Self {
            modes,
            plan: plan(m)?,
        })
    }

    pub fn len(&self) -> usize {
        self.plan.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plan.is_empty()
    }

    pub fn eval(&self, t: f64) -> FactorSlice {
        let m = self.plan.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for &(k, c) in &self.modes {
            let j = k.rem_euclid(m as i64) as usize;
            buf[j] += c * chirp(-t * (k * k) as f64);
        }
        self.plan.inverse(&mut buf);
        let h = 1.0 / m as f64;
        FactorSlice {
            values: buf,
            positions: (0..m).map(|j| Grid::signed_index(j, m) as f64 * h).collect(),
            cell: h,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Factor {
    Line(LineFactor),
    Torus(TorusFactor),
}

impl Factor {
    /// Evaluator for one axis of `data`, after the box projector `chi(xi / N)`.
    pub fn for_axis(profile: &AxisProfile, kind: AxisKind, cutoff: Option<f64>, p: f64) -> Result<Self> {
        let proj = |xi: f64| cutoff.map_or(1.0, |n| chi(xi / n));
        let reach = match cutoff {
            Some(n) => profile.reach().min(2.0 * n),
            None => profile.reach(),
        };
        match kind {
            AxisKind::Line => {
                let box0 = profile.physical_box().ok_or_else(|| {
                    Error::ParameterOutOfRange("Euclidean factor without decay scale".into())
                })?;
                let f = |xi: f64| profile.eval(xi) * proj(xi);
                Ok(Factor::Line(LineFactor::new(&f, reach.max(1e-300), box0, p)?))
            }
            AxisKind::Torus => {
                let modes: Vec<(i64, Complex64)> = profile
                    .integer_support()
                    .filter(|k| (*k as f64).abs() <= reach)
                    .map(|k| (k, profile.eval(k as f64) * proj(k as f64)))
                    .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
                    .collect();
                Ok(Factor::Torus(TorusFactor::new(modes, p)?))
            }
        }
    }

    pub fn eval(&self, t: f64) -> FactorSlice {
        match self {
            Factor::Line(l) => l.eval(t),
            Factor::Torus(f) => f.eval(t),
        }
    }

    pub fn moduli(&self, t: f64) -> (Vec<f64>, f64) {
        let s = match self {
            Factor::Line(l) => l.moduli_slice(t),
            Factor::Torus(f) => f.eval(t),
        };
        (s.values.iter().map(|v| v.norm()).collect(), s.cell)
    }

    pub fn edge_fraction(&self) -> f64 {
        match self {
            Factor::Line(l) => l.edge_fraction(),
            Factor::Torus(_) => 0.0,
        }
    }
}
