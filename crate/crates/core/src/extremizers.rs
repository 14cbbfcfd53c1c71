//! Initial data saturating the three branches of the lower bound, and the
//! slope report comparing measured ratios with the predicted exponents.
//!
//! Families are labelled by Fourier support:
//! * `Phi1`: the box `[-N, N]^d` (pure `N` growth),
//! * `Phi2`: width `T^{-1/2}` on the Euclidean factor, zero mode on the torus,
//! * `Phi3`: width `T^{-1/2}` on the Euclidean factor, `[0, N]^n` on the torus.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::cutoff::BoxCutoff;
use crate::error::{Error, Result};
use crate::evolution::ProductFlow;
use crate::field::SpectralField;
use crate::fit::{fit_exponents, ExponentFit, FitOptions};
use crate::grid::Grid;
use crate::separable::{AxisProfile, Factor, SeparableData};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Phi1,
    Phi2,
    Phi3,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Phi1 => "phi1",
            FamilyKind::Phi2 => "phi2",
            FamilyKind::Phi3 => "phi3",
        }
    }

    /// Predicted `(T, N)` exponents of the Strichartz ratio.
    pub fn predicted_slopes(self, m: usize, n: usize, p: f64) -> (f64, f64) {
        let (m, n) = (m as f64, n as f64);
        let d = m + n;
        let t_part = (m + 2.0) / (2.0 * p) - m / 4.0;
        let n_part = n / 2.0 - (n + 2.0) / p;
        match self {
            FamilyKind::Phi1 => (0.0, d / 2.0 - (d + 2.0) / p),
            FamilyKind::Phi2 => (t_part, 0.0),
            FamilyKind::Phi3 => (t_part, n_part),
        }
    }
}

impl core::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi1" => Ok(FamilyKind::Phi1),
            "phi2" => Ok(FamilyKind::Phi2),
            "phi3" => Ok(FamilyKind::Phi3),
            _ => Err(Error::ParameterOutOfRange(alloc::format!("unknown family {s}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremizerFamily {
    pub kind: FamilyKind,
    pub cutoff: f64,
    pub horizon: f64,
    pub data: SeparableData,
}

fn check_params(m: usize, n: usize, cutoff: f64, horizon: f64) -> Result<()> {
    if m == 0 || n == 0 || !(2..=3).contains(&(m + n)) {
        return Err(Error::DimensionError { m, n });
    }
    if !(cutoff > 0.0) || !(horizon > 0.0) {
        return Err(Error::ParameterOutOfRange(alloc::format!(
            "N = {cutoff}, T = {horizon}"
        )));
    }
    Ok(())
}

/// `phi1_hat = chi_{[-N,N]^m} chi_{[-N,N]^n}`.
pub fn build_phi1(m: usize, n: usize, cutoff: f64) -> Result<ExtremizerFamily> {
    check_params(m, n, cutoff, 1.0)?;
    let axis = AxisProfile::bump(BoxCutoff::on_interval(-cutoff, cutoff));
    Ok(ExtremizerFamily {
        kind: FamilyKind::Phi1,
        cutoff,
        horizon: 1.0,
        data: SeparableData::new(m, n, alloc::vec![axis; m + n])?,
    })
}

/// `phi2_hat = chi_{[0,T^{-1/2}]^m}(xi_1) 1_{xi_2 = 0}`; requires `T >= 1`.
pub fn build_phi2(m: usize, n: usize, horizon: f64) -> Result<ExtremizerFamily> {
    check_params(m, n, 1.0, horizon)?;
    if horizon < 1.0 {
        return Err(Error::ParameterOutOfRange(alloc::format!(
            "phi2 needs T >= 1, got {horizon}"
        )));
    }
    let line = AxisProfile::bump(BoxCutoff::on_interval(0.0, horizon.powf(-0.5)));
    let mut axes = alloc::vec![line; m];
    axes.extend(core::iter::repeat_n(AxisProfile::Mode(0), n));
    Ok(ExtremizerFamily {
        kind: FamilyKind::Phi2,
        // smallest cutoff leaving the datum unchanged
        cutoff: 1.0,
        horizon,
        data: SeparableData::new(m, n, axes)?,
    })
}

/// `phi3_hat = chi_{[0,T^{-1/2}]^m}(xi_1) chi_{[0,N]^n}(xi_2)`.
pub fn build_phi3(m: usize, n: usize, cutoff: f64, horizon: f64) -> Result<ExtremizerFamily> {
    check_params(m, n, cutoff, horizon)?;
    if horizon < 1.0 {
        return Err(Error::ParameterOutOfRange(alloc::format!(
            "phi3 needs T >= 1, got {horizon}"
        )));
    }
    let line = AxisProfile::bump(BoxCutoff::on_interval(0.0, horizon.powf(-0.5)));
    let torus = AxisProfile::bump(BoxCutoff::on_interval(0.0, cutoff));
    let mut axes = alloc::vec![line; m];
    axes.extend(core::iter::repeat_n(torus, n));
    Ok(ExtremizerFamily {
        kind: FamilyKind::Phi3,
        cutoff,
        horizon,
        data: SeparableData::new(m, n, axes)?,
    })
}

impl ExtremizerFamily {
    pub fn build(kind: FamilyKind, m: usize, n: usize, cutoff: f64, horizon: f64) -> Result<Self> {
        let mut f = match kind {
            FamilyKind::Phi1 => build_phi1(m, n, cutoff)?,
            FamilyKind::Phi2 => build_phi2(m, n, horizon)?,
            FamilyKind::Phi3 => build_phi3(m, n, cutoff, horizon)?,
        };
        f.cutoff = cutoff;
        f.horizon = horizon;
        Ok(f)
    }

    pub fn l2_norm(&self) -> f64 {
        self.data.l2_norm()
    }

    pub fn predicted_slopes(&self, p: f64) -> (f64, f64) {
        self.kind.predicted_slopes(self.data.m, self.data.n, p)
    }

    /// Samples the family on a grid; the grid must resolve twice the cutoff.
    pub fn realize(&self, grid: Arc<Grid>) -> Result<SpectralField> {
        grid.spec().check_cutoff(self.cutoff)?;
        Ok(self.data.realize(grid)?.with_tag(self.kind.name()))
    }

    /// Product-engine flow of `P_N phi` (box cutoff).
    pub fn flow(&self, p: f64) -> Result<ProductFlow> {
        ProductFlow::new(&self.data, Some(self.cutoff), p)
    }
}

/// `|e^{it Delta} P_N phi (0)|` from the factor evaluators.
pub fn origin_amplitude(flow: &ProductFlow, t: f64) -> f64 {
    flow.factors()
        .iter()
        .map(|(f, mult)| f.eval(t).values[0].norm().powi(*mult as i32))
        .product()
}

/// `min |u(t,x)| T^{m/2}` over `t in [0, cT]`, `|x_i| <= c T^{1/2}` on the
/// Euclidean axes (the torus factors of `phi2` are constant).
pub fn phi2_plateau(family: &ExtremizerFamily, c: f64, samples: usize) -> Result<f64> {
    if family.kind != FamilyKind::Phi2 {
        return Err(Error::ParameterOutOfRange("plateau check is for phi2".into()));
    }
    let t_big = family.horizon;
    let m = family.data.m as i32;
    let line = Factor::for_axis(&family.data.axes[0], crate::grid::AxisKind::Line, None, 2.0)?;
    let reach = c * t_big.sqrt();
    let mut worst = f64::INFINITY;
    for i in 0..=samples {
        let t = c * t_big * i as f64 / samples as f64;
        let s = line.eval(t);
        let lo = s
            .values
            .iter()
            .zip(&s.positions)
            .filter(|(_, x)| x.abs() <= reach)
            .fold(f64::INFINITY, |a, (v, _)| a.min(v.norm()));
        worst = worst.min(lo.powi(m));
    }
    Ok(worst * t_big.powf(m as f64 / 2.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundReport {
    pub kind: FamilyKind,
    pub p: f64,
    pub fit: ExponentFit,
    pub predicted: (f64, f64),
    pub tolerance: f64,
    pub pass: bool,
}

/// Fits `ratio ~ T^a N^b` over `(T, N, ratio)` and passes iff every fitted
/// slope is at least its prediction minus `tolerance`.
pub fn lower_bound_report(
    family: &ExtremizerFamily,
    p: f64,
    samples: &[(f64, f64, f64)],
    tolerance: f64,
    opts: FitOptions,
) -> Result<LowerBoundReport> {
    let fit = fit_exponents(samples, opts)?;
    let predicted = family.predicted_slopes(p);
    let ok = |got: Option<f64>, want: f64| got.is_none_or(|g| g >= want - tolerance);
    let pass = ok(fit.t_slope, predicted.0) && ok(fit.n_slope, predicted.1);
    Ok(LowerBoundReport {
        kind: family.kind,
        p,
        fit,
        predicted,
        tolerance,
        pass,
    })
}

/// Fourier coefficients of `field` outside the declared support, relative to the total.
pub fn support_leak(family: &ExtremizerFamily, field: &SpectralField) -> f64 {
    let grid = field.grid();
    let mut outside = 0.0;
    let mut total = 0.0;
    let pts: Vec<bool> = grid.map_points(true, |xi| {
        xi.iter()
            .zip(&family.data.axes)
            .all(|(x, a)| a.eval(*x) != Complex64::new(0.0, 0.0))
    });
    for (c, inside) in field.coeffs().iter().zip(pts) {
        total += c.norm_sqr();
        if !inside {
            outside += c.norm_sqr();
        }
    }
    if total > 0.0 {
        outside / total
    } else {
        0.0
    }
}
