//! Space-time `L^p` norms, Strichartz ratios, level sets and the layer-cake
//! reconstruction.
//!
//! Time integrals use the trapezoid rule at `dt/2`; the same pass also
//! accumulates the `dt` rule, and the gap between the two is reported as the
//! error estimate. Slices are streamed, never stored.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;


use crate::error::{Error, Result};
use crate::evolution::{Diagnostics, Flow, FullFlow, Slice};
use crate::exec::{pairwise, Executor};
use crate::field::{Projector, SpectralField};

/// Nodes per work item of a time sweep.
const CHUNK: usize = 32;

/// Number of thresholds in the default level-set grid.
pub const DEFAULT_LEVELS: usize = 256;

/// Trapezoid rule on `[t0, t1]` with `steps` intervals of width `dt`, refined once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

impl QuadratureSpec {
    /// Default step `dt <= 1/(8 N^2)`.
    pub fn for_cutoff(t0: f64, t1: f64, cutoff: f64) -> Result<Self> {
        if !(t1 > t0) || !(cutoff > 0.0) {
            return Err(Error::ParameterOutOfRange(alloc::format!(
                "quadrature needs t1 > t0 and N > 0, got [{t0}, {t1}], N = {cutoff}"
            )));
        }
        let steps = ((t1 - t0) * 8.0 * cutoff * cutoff - 1e-9).ceil().max(1.0) as usize;
        Ok(Self { t0, t1, steps })
    }

    /// Explicit step; `(t1 - t0) / dt` must be an integer and `dt N^2 <= 1/4`.
    pub fn with_dt(t0: f64, t1: f64, dt: f64, cutoff: f64) -> Result<Self> {
        if !(t1 > t0) || !(dt > 0.0) {
            return Err(Error::ParameterOutOfRange(alloc::format!(
                "quadrature needs t1 > t0 and dt > 0, got [{t0}, {t1}], dt = {dt}"
            )));
        }
        let ratio = (t1 - t0) / dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) || steps < 1.0 {
            return Err(Error::ParameterOutOfRange(alloc::format!(
                "T/dt = {ratio} is not an integer"
            )));
        }
        if dt * cutoff * cutoff > 0.25 + 1e-12 {
            return Err(Error::ParameterOutOfRange(alloc::format!(
                "dt N^2 = {} exceeds 1/4",
                dt * cutoff * cutoff
            )));
        }
        Ok(Self {
            t0,
            t1,
            steps: steps as usize,
        })
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    /// Nodes of the refined rule.
    pub fn fine_nodes(&self) -> usize {
        2 * self.steps + 1
    }

    /// Time, refined weight and coarse weight of refined node `i`.
    pub fn node(&self, i: usize) -> (f64, f64, f64) {
        let last = 2 * self.steps;
        let h = 0.5 * self.dt();
        let t = if i == last {
            self.t1
        } else {
            self.t0 + i as f64 * h
        };
        let end = i == 0 || i == last;
        let fine = if end { 0.5 * h } else { h };
        let coarse = if i % 2 == 1 {
            0.0
        } else if end {
            h
        } else {
            2.0 * h
        };
        (t, fine, coarse)
    }
}

/// Streams the slices of `flow` over the quadrature nodes in fixed-size chunks
/// and reduces the chunk accumulators pairwise, so the result does not depend
/// on how the executor schedules the chunks.
pub fn sweep<F, E, A>(
    flow: &F,
    quad: &QuadratureSpec,
    exec: &E,
    init: impl Fn() -> A + Sync,
    visit: impl Fn(&mut A, &Slice, f64, f64) + Sync,
    merge: impl Fn(&A, &A) -> A,
) -> A
where
    F: Flow + ?Sized,
    E: Executor + ?Sized,
    A: Clone + Send,
{
    let nodes = quad.fine_nodes();
    let chunks = nodes.div_ceil(CHUNK);
    let parts = exec.map(chunks, |c| {
        let mut acc = init();
        for i in c * CHUNK..((c + 1) * CHUNK).min(nodes) {
            let (t, wf, wc) = quad.node(i);
            let s = flow.slice(t);
            visit(&mut acc, &s, wf, wc);
        }
        acc
    });
    pairwise(&parts, &merge).unwrap_or_else(init)
}

/// A space-time norm at the refined step, with the coarse value for comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormValue {
    pub p: f64,
    pub value: f64,
    pub coarse: f64,
    /// `|value - coarse| / value`.
    pub err_est: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormSweep {
    pub norms: Vec<NormValue>,
    /// `sup_{t,x} |u|` over the refined nodes.
    pub sup: f64,
    pub data_norm: f64,
    pub diagnostics: Diagnostics,
}

impl NormSweep {
    pub fn ratio(&self, p: f64) -> Option<StrichartzRatio> {
        self.norms.iter().find(|n| n.p == p).map(|n| StrichartzRatio {
            p,
            ratio: n.value / self.data_norm,
            err_est: n.err_est,
            diagnostics: self.diagnostics.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrichartzRatio {
    pub p: f64,
    pub ratio: f64,
    pub err_est: f64,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone)]
struct NormAcc {
    fine: Vec<f64>,
    coarse: Vec<f64>,
    sup: f64,
}

/// `||u||_{L^p([t0,t1] x X)}` for every `p` in `ps`, in one pass.
pub fn lp_norms<F, E>(flow: &F, ps: &[f64], quad: &QuadratureSpec, exec: &E) -> Result<NormSweep>
where
    F: Flow + ?Sized,
    E: Executor + ?Sized,
{
    for &p in ps {
        if !(p >= 1.0) {
            return Err(Error::ParameterOutOfRange(alloc::format!("exponent p = {p}")));
        }
    }
    let k = ps.len();
    let acc = sweep(
        flow,
        quad,
        exec,
        || NormAcc {
            fine: vec![0.0; k],
            coarse: vec![0.0; k],
            sup: 0.0,
        },
        |a, s, wf, wc| {
            for (j, &p) in ps.iter().enumerate() {
                let v = s.lp_pow(p);
                a.fine[j] += wf * v;
                a.coarse[j] += wc * v;
            }
            a.sup = a.sup.max(s.sup());
        },
        |x, y| NormAcc {
            fine: x.fine.iter().zip(&y.fine).map(|(a, b)| a + b).collect(),
            coarse: x.coarse.iter().zip(&y.coarse).map(|(a, b)| a + b).collect(),
            sup: x.sup.max(y.sup),
        },
    );
    let norms = ps
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let value = acc.fine[j].powf(1.0 / p);
            let coarse = acc.coarse[j].powf(1.0 / p);
            let err_est = if value > 0.0 {
                (value - coarse).abs() / value
            } else {
                0.0
            };
            NormValue {
                p,
                value,
                coarse,
                err_est,
            }
        })
        .collect();
    Ok(NormSweep {
        norms,
        sup: acc.sup,
        data_norm: flow.data_norm(),
        diagnostics: flow.diagnostics(),
    })
}

/// `||e^{it Delta} P_N phi||_{L^p([t0,t1] x X)}` on the grid of `phi`.
pub fn lp_spacetime_norm<E: Executor + ?Sized>(
    phi: &SpectralField,
    p: f64,
    quad: &QuadratureSpec,
    cutoff: f64,
    mode: Projector,
    exec: &E,
) -> Result<NormValue> {
    let flow = match FullFlow::new(phi, cutoff, mode, quad.t1) {
        Ok(f) => f,
        // the zero field has zero norm
        Err(Error::ZeroData) => {
            return Ok(NormValue {
                p,
                value: 0.0,
                coarse: 0.0,
                err_est: 0.0,
            })
        }
        Err(e) => return Err(e),
    };
    Ok(lp_norms(&flow, &[p], quad, exec)?.norms[0])
}

/// `||e^{it Delta} P_N phi||_{L^p} / ||phi||_2` for any engine.
pub fn strichartz_ratio<F, E>(flow: &F, p: f64, quad: &QuadratureSpec, exec: &E) -> Result<StrichartzRatio>
where
    F: Flow + ?Sized,
    E: Executor + ?Sized,
{
    if !(flow.data_norm() > 0.0) {
        return Err(Error::ZeroData);
    }
    let sweep = lp_norms(flow, &[p], quad, exec)?;
    Ok(sweep.ratio(p).expect("requested exponent"))
}

/// `sup_{t,x} |u| / ||phi||_2` over the refined nodes.
pub fn normalized_sup<F, E>(flow: &F, quad: &QuadratureSpec, exec: &E) -> f64
where
    F: Flow + ?Sized,
    E: Executor + ?Sized,
{
    let s = sweep(
        flow,
        quad,
        exec,
        || 0.0f64,
        |a, s, _, _| *a = a.max(s.sup()),
        |a, b| a.max(*b),
    );
    s / flow.data_norm()
}

/// Measures `|E_lambda| = |{(t,x) : |u(t,x)| > lambda ||phi||_2}|`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetProfile {
    /// Thresholds in units of `||phi||_2`, ascending.
    pub lambdas: Vec<f64>,
    pub measures: Vec<f64>,
    /// Space-time volume `(t1 - t0) L^m` when the space is periodized.
    pub total_volume: Option<f64>,
    pub t_span: (f64, f64),
    pub diagnostics: Diagnostics,
}

/// `count` geometric thresholds on `[1e-6 top, top]`.
pub fn default_lambdas(top: f64, count: usize) -> Vec<f64> {
    let lo = 1e-6 * top;
    let r = (top / lo).ln() / (count - 1) as f64;
    (0..count)
        .map(|k| if k + 1 == count { top } else { lo * (r * k as f64).exp() })
        .collect()
}

/// Level-set measures of the normalized flow. With `lambdas = None` the
/// default grid is spanned up to the measured `sup |u| / ||phi||_2`.
pub fn level_set_profile<F, E>(
    flow: &F,
    quad: &QuadratureSpec,
    lambdas: Option<&[f64]>,
    exec: &E,
) -> Result<LevelSetProfile>
where
    F: Flow + ?Sized,
    E: Executor + ?Sized,
{
    let norm = flow.data_norm();
    if !(norm > 0.0) {
        return Err(Error::ZeroData);
    }
    let lambdas: Vec<f64> = match lambdas {
        Some(l) => {
            if l.is_empty() || l.windows(2).any(|w| !(w[0] < w[1])) || !(l[0] > 0.0) {
                return Err(Error::ParameterOutOfRange(
                    "thresholds must be positive and strictly increasing".to_string(),
                ));
            }
            l.to_vec()
        }
        None => default_lambdas(normalized_sup(flow, quad, exec), DEFAULT_LEVELS),
    };
    let scaled: Vec<f64> = lambdas.iter().map(|l| l * norm).collect();
    let k = scaled.len();
    let measures = sweep(
        flow,
        quad,
        exec,
        || vec![0.0; k],
        |a, s, wf, _| s.accumulate_levels(&scaled, wf, a),
        |x, y| x.iter().zip(y).map(|(a, b)| a + b).collect(),
    );
    Ok(LevelSetProfile {
        lambdas,
        measures,
        total_volume: flow.space_volume().map(|v| v * (quad.t1 - quad.t0)),
        t_span: (quad.t0, quad.t1),
        diagnostics: flow.diagnostics(),
    })
}

/// `(p int_0^infty lambda^{p-1} |E_lambda| d lambda)^{1/p}` with `|E|`
/// interpolated linearly between thresholds and held at `|E_{lambda_0}|` below
/// the first one. The top threshold must have empty level set.
pub fn layer_cake_norm(profile: &LevelSetProfile, p: f64) -> Result<f64> {
    let l = &profile.lambdas;
    let e = &profile.measures;
    if l.len() < 2 || l.len() != e.len() {
        return Err(Error::GridTooCoarse(alloc::format!(
            "{} thresholds for {} measures",
            l.len(),
            e.len()
        )));
    }
    if *e.last().unwrap() != 0.0 {
        return Err(Error::GridTooCoarse(alloc::format!(
            "level set at the top threshold {} has measure {}",
            l[l.len() - 1],
            e[e.len() - 1]
        )));
    }
    if !(p > 0.0) {
        return Err(Error::ParameterOutOfRange(alloc::format!("exponent p = {p}")));
    }
    let mut total = e[0] * l[0].powf(p);
    for k in 0..l.len() - 1 {
        let (a, b) = (l[k], l[k + 1]);
        let s = (e[k + 1] - e[k]) / (b - a);
        let c = e[k] - s * a;
        total += c * (b.powf(p) - a.powf(p)) + s * p / (p + 1.0) * (b.powf(p + 1.0) - a.powf(p + 1.0));
    }
    Ok(total.max(0.0).powf(1.0 / p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// `sup_{lambda > lambda_min} |E_lambda| lambda^e`.
    pub constant: f64,
    pub at_lambda: f64,
    pub points: usize,
}

/// Largest value of `|E_lambda| lambda^e` over thresholds above `lambda_min`
/// with nonempty level sets; needs at least five such thresholds.
pub fn levelset_decay_fit(profile: &LevelSetProfile, e: f64, lambda_min: f64) -> Result<DecayFit> {
    let mut best = DecayFit {
        constant: 0.0,
        at_lambda: lambda_min,
        points: 0,
    };
    for (&l, &m) in profile.lambdas.iter().zip(&profile.measures) {
        if l > lambda_min && m > 0.0 {
            best.points += 1;
            let v = m * l.powf(e);
            if v > best.constant {
                best.constant = v;
                best.at_lambda = l;
            }
        }
    }
    if best.points < 5 {
        return Err(Error::InsufficientRange(alloc::format!(
            "{} nonempty level sets above lambda = {lambda_min}, need 5",
            best.points
        )));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoff::BoxCutoff;
    use crate::evolution::ProductFlow;
    use crate::exec::Sequential;
    use crate::grid::{build_grid, WaveguideSpec};
    use crate::separable::{AxisProfile, SeparableData};
    use alloc::sync::Arc;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(m: usize, n: usize, l: f64, dims: &[usize]) -> Arc<crate::grid::Grid> {
        Arc::new(build_grid(&WaveguideSpec::new(m, n, l, dims).unwrap(), None).unwrap())
    }

    fn random_field(g: &Arc<crate::grid::Grid>, cutoff: f64, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SpectralField::from_fn(g.clone(), |xi| {
            let r2: f64 = xi.iter().map(|x| x * x).sum();
            let c = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            if r2 <= cutoff * cutoff {
                c
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    #[test]
    fn quadrature_nodes() {
        let q = QuadratureSpec::for_cutoff(0.0, 1.0, 4.0).unwrap();
        assert_eq!(q.steps, 128);
        let (wf, wc): (f64, f64) = (0..q.fine_nodes()).map(|i| q.node(i)).fold((0.0, 0.0), |a, n| (a.0 + n.1, a.1 + n.2));
        assert!((wf - 1.0).abs() < 1e-14 && (wc - 1.0).abs() < 1e-14);
        assert_eq!(q.node(q.fine_nodes() - 1).0, 1.0);
        assert!(QuadratureSpec::with_dt(0.0, 1.0, 0.3, 1.0).is_err());
        assert!(QuadratureSpec::with_dt(0.0, 1.0, 0.25, 2.0).is_err());
        assert_eq!(QuadratureSpec::with_dt(0.0, 1.0, 1.0 / 64.0, 4.0).unwrap().steps, 64);
    }

    #[test]
    fn plane_wave_norm_and_ratio() {
        let g = grid(1, 2, 8.0, &[128, 16, 16]);
        let c = Complex64::new(0.6, -0.8) * 1.5;
        // mode at xi = (2/8, 1, -2), |xi|^2 < 9
        let phi = SpectralField::from_fn(g.clone(), |xi| {
            if xi == [0.25, 1.0, -2.0] {
                c * 8.0
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let t = 2.0;
        let q = QuadratureSpec::for_cutoff(0.0, t, 3.0).unwrap();
        let flow = FullFlow::new(&phi, 3.0, Projector::Sharp, t).unwrap();
        let sw = lp_norms(&flow, &[4.0, 6.0], &q, &Sequential).unwrap();
        for n in &sw.norms {
            let exact = 1.5 * (t * 8.0).powf(1.0 / n.p);
            assert!((n.value / exact - 1.0).abs() < 1e-12);
            let r = sw.ratio(n.p).unwrap().ratio;
            assert!((r - (t * 8.0).powf(1.0 / n.p) / 8f64.sqrt()).abs() < 1e-12);
        }
        let prof = level_set_profile(&flow, &q, Some(&[0.1, 0.5, 0.52, 0.6]), &Sequential).unwrap();
        // normalized modulus 1.5 / (1.5 sqrt 8)
        let step = 1.0 / 8f64.sqrt();
        for (l, m) in prof.lambdas.iter().zip(&prof.measures) {
            let want = if *l < step { 16.0 } else { 0.0 };
            assert!((m - want).abs() < 1e-12, "{l}: {m}");
        }
        let zero = SpectralField::zeros(g);
        let v = lp_spacetime_norm(&zero, 4.0, &q, 3.0, Projector::Sharp, &Sequential).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn ratio_homogeneity_and_translation() {
        let g = grid(1, 2, 16.0, &[256, 16, 16]);
        let phi = random_field(&g, 3.0, 7);
        let q = QuadratureSpec::for_cutoff(0.0, 0.25, 3.0).unwrap();
        let r = |f: &SpectralField| {
            let flow = FullFlow::new(f, 3.0, Projector::Sharp, 0.25).unwrap();
            strichartz_ratio(&flow, 4.0, &q, &Sequential).unwrap().ratio
        };
        let base = r(&phi);
        assert!((r(&phi.scale(Complex64::new(2.0, 0.0))) / base - 1.0).abs() < 1e-12);
        // translation by one grid cell in each direction is a phase on the lattice
        let shifted = SpectralField::from_fn(g.clone(), |xi| {
            crate::grid::chirp(-(xi[0] * 0.25 + xi[1] / 16.0 + xi[2] * 3.0 / 16.0))
        });
        let moved = SpectralField::new(
            g.clone(),
            phi.coeffs().iter().zip(shifted.coeffs()).map(|(a, b)| a * b).collect(),
            "",
        )
        .unwrap();
        assert!((r(&moved) / base - 1.0).abs() < 1e-10);
        let zero = SpectralField::zeros(g);
        assert_eq!(
            FullFlow::new(&zero, 3.0, Projector::Sharp, 0.25).unwrap_err(),
            Error::ZeroData
        );
    }

    #[test]
    fn refinement_and_layer_cake() {
        let g = grid(1, 2, 16.0, &[256, 16, 16]);
        let phi = random_field(&g, 3.0, 11);
        let q = QuadratureSpec::for_cutoff(0.0, 0.5, 3.0).unwrap();
        let flow = FullFlow::new(&phi, 3.0, Projector::Smooth, 0.5).unwrap();
        let ps = [2.0, 10.0 / 3.0, 4.0, 6.0];
        let sw = lp_norms(&flow, &ps, &q, &Sequential).unwrap();
        assert!(sw.norms[2].err_est < 1e-4, "{:?}", sw.norms[2]);
        let prof = level_set_profile(&flow, &q, None, &Sequential).unwrap();
        assert!(prof.measures.windows(2).all(|w| w[0] >= w[1]));
        assert!(prof.measures[0] <= prof.total_volume.unwrap() * (1.0 + 1e-12));
        for n in &sw.norms {
            let lc = layer_cake_norm(&prof, n.p).unwrap();
            let direct = n.value / sw.data_norm;
            assert!((lc / direct - 1.0).abs() < 0.01, "p={}: {lc} vs {direct}", n.p);
        }
        // conservation: ||u||_{L^2_{t,x}}^2 = T ||P phi||^2
        let pn = flow.projected().l2_norm() / sw.data_norm;
        assert!((sw.norms[0].value.powi(2) / sw.data_norm.powi(2) / (0.5 * pn * pn) - 1.0).abs() < 1e-10);
        let mut bad = prof.clone();
        bad.measures[DEFAULT_LEVELS - 1] = 1.0;
        assert!(matches!(layer_cake_norm(&bad, 4.0), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn product_layer_cake_and_decay_fit() {
        let data = SeparableData::new(
            1,
            2,
            vec![
                AxisProfile::bump(BoxCutoff::on_interval(0.0, 0.5)),
                AxisProfile::bump(BoxCutoff::on_interval(0.0, 3.0)),
                AxisProfile::bump(BoxCutoff::on_interval(0.0, 3.0)),
            ],
        )
        .unwrap();
        let flow = ProductFlow::new(&data, Some(4.0), 4.0).unwrap();
        let q = QuadratureSpec::for_cutoff(0.0, 1.0, 4.0).unwrap();
        let sw = lp_norms(&flow, &[4.0], &q, &Sequential).unwrap();
        let top = normalized_sup(&flow, &q, &Sequential);
        let lambdas = default_lambdas(top, 200);
        let prof = level_set_profile(&flow, &q, Some(&lambdas[120..]), &Sequential).unwrap();
        assert!(prof.total_volume.is_none());
        let fit = levelset_decay_fit(&prof, 10.0 / 3.0, 0.0).unwrap();
        assert!(fit.constant > 0.0 && fit.points >= 5);
        assert!(matches!(
            levelset_decay_fit(&prof, 10.0 / 3.0, top),
            Err(Error::InsufficientRange(_))
        ));
        let full = level_set_profile(&flow, &q, Some(&lambdas), &Sequential).unwrap();
        let lc = layer_cake_norm(&full, 4.0).unwrap();
        assert!((lc / (sw.norms[0].value / sw.data_norm) - 1.0).abs() < 0.01);
    }

    #[test]
    fn synthetic_decay_profile() {
        let lambdas: Vec<f64> = (0..40).map(|k| 1.1f64.powi(k)).collect();
        let measures: Vec<f64> = lambdas.iter().map(|l| l.powf(-10.0 / 3.0)).collect();
        let prof = LevelSetProfile {
            lambdas,
            measures,
            total_volume: None,
            t_span: (0.0, 1.0),
            diagnostics: Diagnostics::default(),
        };
        let fit = levelset_decay_fit(&prof, 10.0 / 3.0, 2.0).unwrap();
        assert!((fit.constant - 1.0).abs() < 1e-12);
    }
}
