//! Estimating `C(p, T, N) = sup ||e^{it Delta} P_N phi||_{L^p([0,T] x X)} / ||phi||_2`
//! from below: probes with known data, and gradient ascent on the unit sphere
//! of `L^2` for the discretized functional `Phi(phi) = ||U phi||_p^p`.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::cutoff::BoxCutoff;
use crate::error::{Error, Result};
use crate::evolution::{Diagnostics, Flow, ProductFlow, Warning};
use crate::exec::{pairwise, Executor};
use crate::extremizers::{ExtremizerFamily, FamilyKind};
use crate::field::{Projector, SpectralField};
use crate::grid::Grid;
use crate::norms::{strichartz_ratio, QuadratureSpec};
use crate::separable::{AxisProfile, SeparableData};

const CHUNK: usize = 16;

/// `Phi(phi) = sum_i w_i int |U(t_i) phi|^p dx` on a full grid, with the
/// refined trapezoid weights of a [`QuadratureSpec`] and `U(t) = e^{it Delta} P_N`.
#[derive(Debug, Clone)]
pub struct Objective {
    grid: Arc<Grid>,
    p: f64,
    weights: Vec<f64>,
    nodes: Vec<(f64, f64)>,
}

impl Objective {
    pub fn new(grid: Arc<Grid>, cutoff: f64, mode: Projector, quad: &QuadratureSpec, p: f64) -> Result<Self> {
        if !(p > 10.0 / 3.0) {
            return Err(Error::ParameterOutOfRange(alloc::format!(
                "the gradient needs p > 10/3, got {p}"
            )));
        }
        let weights = SpectralField::projector_weights(&grid, cutoff, mode)?;
        let nodes = (0..quad.fine_nodes())
            .map(|i| {
                let (t, w, _) = quad.node(i);
                (t, w)
            })
            .collect();
        Ok(Self {
            grid,
            p,
            weights,
            nodes,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    /// FFTs spent by one [`Objective::value`].
    pub fn value_cost(&self) -> u64 {
        self.nodes.len() as u64
    }

    /// FFTs spent by one [`Objective::gradient`].
    pub fn gradient_cost(&self) -> u64 {
        2 * self.nodes.len() as u64
    }

    fn check(&self, phi: &SpectralField) -> Result<()> {
        if !Arc::ptr_eq(phi.grid(), &self.grid) && phi.grid().dims() != self.grid.dims() {
            return Err(Error::ShapeMismatch("field lives on another grid".into()));
        }
        Ok(())
    }

    fn samples_at(&self, coeffs: &[Complex64], t: f64) -> Vec<Complex64> {
        let prop = self.grid.propagator(t);
        let mut buf: Vec<Complex64> = coeffs
            .iter()
            .zip(&self.weights)
            .zip(&prop)
            .map(|((c, w), e)| c * w * e)
            .collect();
        self.grid.inverse_in_place(&mut buf);
        buf
    }

    /// `P_N e^{-it Delta}` applied to physical samples.
    fn pull_back(&self, mut samples: Vec<Complex64>, t: f64, scale: f64, acc: &mut [Complex64]) {
        self.grid.forward_in_place(&mut samples);
        let prop = self.grid.propagator(t);
        for (((a, s), w), e) in acc.iter_mut().zip(&samples).zip(&self.weights).zip(&prop) {
            *a += s * e.conj() * (w * scale);
        }
    }

    /// `U phi` at every node.
    pub fn forward_apply(&self, phi: &SpectralField) -> Result<Vec<Vec<Complex64>>> {
        self.check(phi)?;
        Ok(self.nodes.iter().map(|&(t, _)| self.samples_at(phi.coeffs(), t)).collect())
    }

    /// `U^* G = sum_i w_i P_N e^{-it_i Delta} G_i`, the adjoint under
    /// `<F, G> = sum_i w_i int conj(F_i) G_i dx`.
    pub fn adjoint_apply<E: Executor + ?Sized>(&self, density: &[Vec<Complex64>], exec: &E) -> Result<SpectralField> {
        if density.len() != self.nodes.len() || density.iter().any(|d| d.len() != self.grid.len()) {
            return Err(Error::ShapeMismatch(alloc::format!(
                "density needs {} slices of {} samples",
                self.nodes.len(),
                self.grid.len()
            )));
        }
        let len = self.grid.len();
        let parts = exec.map(self.nodes.len().div_ceil(CHUNK), |c| {
            let mut acc = vec![Complex64::new(0.0, 0.0); len];
            for i in c * CHUNK..((c + 1) * CHUNK).min(self.nodes.len()) {
                let (t, w) = self.nodes[i];
                self.pull_back(density[i].clone(), t, w, &mut acc);
            }
            acc
        });
        let coeffs = pairwise(&parts, &add_vec).unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); len]);
        SpectralField::new(self.grid.clone(), coeffs, "adjoint")
    }

    /// `Phi(phi)`.
    pub fn value<E: Executor + ?Sized>(&self, phi: &SpectralField, exec: &E) -> Result<f64> {
        self.check(phi)?;
        let cell = self.grid.cell_volume();
        let p = self.p;
        let parts = exec.map(self.nodes.len().div_ceil(CHUNK), |c| {
            let mut s = 0.0;
            for i in c * CHUNK..((c + 1) * CHUNK).min(self.nodes.len()) {
                let (t, w) = self.nodes[i];
                let u = self.samples_at(phi.coeffs(), t);
                s += w * cell * u.iter().map(|v| v.norm().powf(p)).sum::<f64>();
            }
            s
        });
        Ok(pairwise(&parts, &|a: &f64, b: &f64| a + b).unwrap_or(0.0))
    }

    /// `Phi^{1/p} / ||phi||_2`.
    pub fn ratio<E: Executor + ?Sized>(&self, phi: &SpectralField, exec: &E) -> Result<f64> {
        let n = phi.l2_norm();
        if n == 0.0 {
            return Err(Error::ZeroData);
        }
        Ok(self.value(phi, exec)?.powf(1.0 / self.p) / n)
    }

    /// `(Phi(phi), grad Phi(phi))` with `grad Phi = p U^*(|U phi|^{p-2} U phi)`,
    /// the Riesz representative for the real part of the spectral inner product.
    pub fn gradient<E: Executor + ?Sized>(&self, phi: &SpectralField, exec: &E) -> Result<(f64, SpectralField)> {
        self.check(phi)?;
        if phi.l2_norm() == 0.0 {
            return Err(Error::ZeroData);
        }
        let len = self.grid.len();
        let cell = self.grid.cell_volume();
        let p = self.p;
        let parts = exec.map(self.nodes.len().div_ceil(CHUNK), |c| {
            let mut acc = vec![Complex64::new(0.0, 0.0); len];
            let mut value = 0.0;
            for i in c * CHUNK..((c + 1) * CHUNK).min(self.nodes.len()) {
                let (t, w) = self.nodes[i];
                let mut u = self.samples_at(phi.coeffs(), t);
                let mut s = 0.0;
                for v in u.iter_mut() {
                    let r = v.norm();
                    let rp2 = if r > 0.0 { r.powf(p - 2.0) } else { 0.0 };
                    s += rp2 * r * r;
                    *v *= rp2;
                }
                value += w * cell * s;
                self.pull_back(u, t, w * p, &mut acc);
            }
            (value, acc)
        });
        let (value, coeffs) = pairwise(&parts, &|a: &(f64, Vec<Complex64>), b: &(f64, Vec<Complex64>)| {
            (a.0 + b.0, add_vec(&a.1, &b.1))
        })
        .unwrap_or_else(|| (0.0, vec![Complex64::new(0.0, 0.0); len]));
        Ok((value, SpectralField::new(self.grid.clone(), coeffs, "gradient")?))
    }
}

#[allow(clippy::ptr_arg)]
fn add_vec(a: &Vec<Complex64>, b: &Vec<Complex64>) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn normalized(phi: &SpectralField) -> Result<SpectralField> {
    let n = phi.l2_norm();
    if n == 0.0 {
        return Err(Error::ZeroData);
    }
    Ok(phi.scale(Complex64::new(1.0 / n, 0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentOptions {
    pub max_iter: usize,
    pub initial_step: f64,
    pub shrink: f64,
    pub armijo: f64,
    /// Backtracking gives up below this step.
    pub min_step: f64,
    /// Budget in FFT units; `None` is unlimited.
    pub budget: Option<u64>,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            initial_step: 1.0,
            shrink: 0.5,
            armijo: 1e-4,
            min_step: 1e-10,
            budget: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIterations,
    /// No step passed the Armijo test.
    Stalled,
    Budget,
}

#[derive(Debug, Clone)]
pub struct AscentTrace {
    pub start: String,
    /// Ratio `Phi^{1/p}` on the unit sphere, one entry per accepted iterate.
    pub ratios: Vec<f64>,
    pub steps: Vec<f64>,
    pub ffts: u64,
    pub stop: StopReason,
    pub best: SpectralField,
    pub diagnostics: Diagnostics,
}

impl AscentTrace {
    pub fn final_ratio(&self) -> f64 {
        *self.ratios.last().expect("the start is recorded")
    }

    pub fn is_monotone(&self) -> bool {
        self.ratios.windows(2).all(|w| w[1] >= w[0])
    }
}

/// Normalized gradient ascent on `||phi||_2 = 1`: step along the tangential
/// gradient, retract by normalizing, backtrack until the Armijo condition holds.
pub fn ascent<E: Executor + ?Sized>(
    obj: &Objective,
    start: &SpectralField,
    opts: &AscentOptions,
    exec: &E,
) -> Result<AscentTrace> {
    let p = obj.p();
    let mut phi = normalized(start)?;
    let mut used = 0u64;
    let mut diagnostics = Diagnostics::default();
    let over = |used: u64, next: u64| opts.budget.is_some_and(|b| used + next > b);

    if over(used, obj.gradient_cost()) {
        diagnostics.push(Warning::BudgetExceeded {
            used: used as f64,
            budget: opts.budget.unwrap_or(0) as f64,
        });
        let v = obj.value(&phi, exec)?;
        return Ok(AscentTrace {
            start: start.tag.clone(),
            ratios: vec![v.powf(1.0 / p)],
            steps: Vec::new(),
            ffts: used + obj.value_cost(),
            stop: StopReason::Budget,
            best: phi,
            diagnostics,
        });
    }
    let (mut value, mut grad) = obj.gradient(&phi, exec)?;
    used += obj.gradient_cost();
    let mut ratios = vec![value.powf(1.0 / p)];
    let mut steps = Vec::new();
    let mut stop = StopReason::MaxIterations;

    'outer: for _ in 0..opts.max_iter {
        let radial = phi.inner(&grad)?.re;
        let tangent = grad.axpy(Complex64::new(-radial, 0.0), &phi)?;
        let tn = tangent.l2_norm();
        if tn == 0.0 || !tn.is_finite() {
            stop = StopReason::Stalled;
            break;
        }
        let dir = tangent.scale(Complex64::new(1.0 / tn, 0.0));
        let mut s = opts.initial_step;
        loop {
            if over(used, obj.value_cost()) {
                stop = StopReason::Budget;
                break 'outer;
            }
            let cand = normalized(&phi.axpy(Complex64::new(s, 0.0), &dir)?)?;
            let v = obj.value(&cand, exec)?;
            used += obj.value_cost();
            if v >= value + opts.armijo * s * tn {
                if over(used, obj.gradient_cost()) {
                    // accept without a fresh gradient, then stop
                    phi = cand;
                    value = v;
                    ratios.push(value.powf(1.0 / p));
                    steps.push(s);
                    stop = StopReason::Budget;
                    break 'outer;
                }
                let (v2, g2) = obj.gradient(&cand, exec)?;
                used += obj.gradient_cost();
                phi = cand;
                value = v2;
                grad = g2;
                ratios.push(value.powf(1.0 / p));
                steps.push(s);
                break;
            }
            s *= opts.shrink;
            if s < opts.min_step {
                stop = StopReason::Stalled;
                break 'outer;
            }
        }
    }
    if stop == StopReason::Budget {
        diagnostics.push(Warning::BudgetExceeded {
            used: used as f64,
            budget: opts.budget.unwrap_or(0) as f64,
        });
    }
    Ok(AscentTrace {
        start: start.tag.clone(),
        ratios,
        steps,
        ffts: used,
        stop,
        best: phi,
        diagnostics,
    })
}

/// Separable random probe: on each Euclidean axis a sum of four translates of
/// the bump `chi(xi/N)` with complex Gaussian weights, on each torus axis
/// complex Gaussian coefficients for `|k| <= N`.
pub fn random_probe_data<R: Rng + ?Sized>(m: usize, n: usize, cutoff: f64, rng: &mut R) -> Result<SeparableData> {
    let gauss = |rng: &mut R| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    };
    let pos = Uniform::new(-1.0, 1.0).map_err(|_| Error::DomainError("uniform range".into()))?;
    let mut axes = Vec::with_capacity(m + n);
    for _ in 0..m {
        let shifts = (0..4).map(|_| (pos.sample(rng), gauss(rng))).collect();
        axes.push(AxisProfile::Bump {
            cutoff: BoxCutoff::centered(cutoff),
            shifts,
        });
    }
    let k = cutoff.floor() as i64;
    for _ in 0..n {
        let values = (-k..=k).map(|_| gauss(rng)).collect();
        axes.push(AxisProfile::Coeffs { lo: -k, values });
    }
    SeparableData::new(m, n, axes)
}

/// Complex Gaussian coefficients on `|xi| <= N`, zero elsewhere.
pub fn random_grid_field<R: Rng + ?Sized>(grid: Arc<Grid>, cutoff: f64, rng: &mut R) -> SpectralField {
    SpectralField::from_fn(grid, |xi| {
        if xi.iter().map(|x| x * x).sum::<f64>() <= cutoff * cutoff {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
    .with_tag("gaussian")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    pub id: String,
    pub ratio: f64,
    pub err_est: f64,
}

/// Strichartz ratio of a separable probe with the product engine.
pub fn probe_ratio<E: Executor + ?Sized>(
    id: &str,
    data: &SeparableData,
    cutoff: f64,
    p: f64,
    quad: &QuadratureSpec,
    exec: &E,
) -> Result<(ProbeResult, Diagnostics)> {
    let flow = ProductFlow::new(data, Some(cutoff), p)?;
    let r = strichartz_ratio(&flow, p, quad, exec)?;
    Ok((
        ProbeResult {
            id: id.into(),
            ratio: r.ratio,
            err_est: r.err_est,
        },
        flow.diagnostics(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Probes,
    Ascent,
    Both,
}

impl core::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "probes" => Ok(Strategy::Probes),
            "ascent" => Ok(Strategy::Ascent),
            "both" => Ok(Strategy::Both),
            _ => Err(Error::DomainError(alloc::format!("unknown strategy {s:?}"))),
        }
    }
}

/// Grid and time rule for the ascent part of [`estimate_constant`].
#[derive(Debug, Clone)]
pub struct AscentSetup {
    pub grid: Arc<Grid>,
    pub quad: QuadratureSpec,
    pub options: AscentOptions,
    /// Ascent starts: the three families (when they fit on the grid) and
    /// `restarts - 3` Gaussian fields.
    pub restarts: usize,
}

#[derive(Debug, Clone)]
pub struct ConstantEstimate {
    pub p: f64,
    pub horizon: f64,
    pub cutoff: f64,
    /// Best ratio over all probes and ascent runs.
    pub measured: f64,
    pub best: String,
    pub probes: Vec<ProbeResult>,
    pub traces: Vec<AscentTrace>,
    pub diagnostics: Diagnostics,
}

/// Lower estimate of `C(p, T, N)` on `R^m x T^n`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_constant<R: Rng + ?Sized, E: Executor + ?Sized>(
    m: usize,
    n: usize,
    p: f64,
    horizon: f64,
    cutoff: f64,
    strategy: Strategy,
    random_probes: usize,
    setup: Option<&AscentSetup>,
    rng: &mut R,
    exec: &E,
) -> Result<ConstantEstimate> {
    let mut probes = Vec::new();
    let mut traces = Vec::new();
    let mut diagnostics = Diagnostics::default();
    let kinds = [FamilyKind::Phi1, FamilyKind::Phi2, FamilyKind::Phi3];

    if matches!(strategy, Strategy::Probes | Strategy::Both) {
        let quad = QuadratureSpec::for_cutoff(0.0, horizon, cutoff)?;
        for kind in kinds {
            let fam = ExtremizerFamily::build(kind, m, n, cutoff, horizon)?;
            let (r, d) = probe_ratio(kind.name(), &fam.data, fam.cutoff, p, &quad, exec)?;
            diagnostics.merge(&d);
            probes.push(r);
        }
        for j in 0..random_probes {
            let data = random_probe_data(m, n, cutoff, rng)?;
            let (r, d) = probe_ratio(&alloc::format!("random{j}"), &data, cutoff, p, &quad, exec)?;
            diagnostics.merge(&d);
            probes.push(r);
        }
    }
    if matches!(strategy, Strategy::Ascent | Strategy::Both) {
        let setup = setup.ok_or_else(|| Error::ParameterOutOfRange("ascent needs a grid setup".into()))?;
        let obj = Objective::new(setup.grid.clone(), cutoff, Projector::Box, &setup.quad, p)?;
        let mut starts = Vec::new();
        for kind in kinds.iter().take(setup.restarts) {
            let fam = ExtremizerFamily::build(*kind, m, n, cutoff, horizon)?;
            if let Ok(f) = fam.realize(setup.grid.clone()) {
                if f.l2_norm() > 0.0 {
                    starts.push(f);
                }
            }
        }
        while starts.len() < setup.restarts.max(1) {
            starts.push(random_grid_field(setup.grid.clone(), cutoff, rng));
        }
        for s in &starts {
            let tr = ascent(&obj, s, &setup.options, exec)?;
            diagnostics.merge(&tr.diagnostics);
            traces.push(tr);
        }
    }
    let mut measured = 0.0;
    let mut best = String::new();
    for pr in &probes {
        if pr.ratio > measured {
            measured = pr.ratio;
            best = pr.id.clone();
        }
    }
    for tr in &traces {
        let r = tr.ratios.iter().cloned().fold(0.0, f64::max);
        if r > measured {
            measured = r;
            best = alloc::format!("ascent:{}", tr.start);
        }
    }
    if probes.is_empty() && traces.is_empty() {
        return Err(Error::ParameterOutOfRange("no probes and no ascent runs".into()));
    }
    Ok(ConstantEstimate {
        p,
        horizon,
        cutoff,
        measured,
        best,
        probes,
        traces,
        diagnostics,
    })
}
