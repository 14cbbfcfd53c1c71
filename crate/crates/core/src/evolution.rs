//! Evaluators of `|e^{it Delta} P_N phi|` at a single time, shared by the
//! norm, level-set and constant modules.
//!
//! A [`Slice`] is a product of one-dimensional (or full-grid) modulus arrays.
//! The full-grid engine returns one marginal; the product engine returns one
//! marginal per distinct axis factor.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Projector, SpectralField};
use crate::grid::Grid;
use crate::separable::{Factor, SeparableData};

/// Mass fraction near a box edge above which results carry a wrap-around warning.
pub const WRAP_THRESHOLD: f64 = 1e-6;

/// Non-fatal conditions attached to a result.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// Mass near the periodization seam of a Euclidean axis.
    WrapAround { fraction: f64 },
    /// Spectral mass outside the dyadic shell an S-norm assumes.
    Localization { fraction: f64 },
    /// A work budget ran out; the result is the best found so far.
    BudgetExceeded { used: f64, budget: f64 },
    /// Spectral mass in the outer band of an NLS working grid.
    OuterBand { fraction: f64 },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Largest edge-mass fraction seen on a Euclidean axis.
    pub wrap_fraction: f64,
    pub warnings: Vec<Warning>,
}

impl Diagnostics {
    pub fn with_wrap(fraction: f64) -> Self {
        let mut d = Self::default();
        d.note_wrap(fraction);
        d
    }

    pub fn note_wrap(&mut self, fraction: f64) {
        self.wrap_fraction = self.wrap_fraction.max(fraction);
        if fraction > WRAP_THRESHOLD
            && !self
                .warnings
                .iter()
                .any(|w| matches!(w, Warning::WrapAround { .. }))
        {
            self.warnings.push(Warning::WrapAround { fraction });
        }
    }

    pub fn push(&mut self, w: Warning) {
        self.warnings.push(w);
    }

    pub fn merge(&mut self, other: &Diagnostics) {
        self.note_wrap(other.wrap_fraction);
        for w in &other.warnings {
            if !matches!(w, Warning::WrapAround { .. }) {
                self.warnings.push(w.clone());
            }
        }
    }

    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }
}

/// Moduli of one factor of the solution, each sample carrying measure `cell`.
/// A multiplicity `k` stands for `k` identical factors on distinct axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    pub moduli: Vec<f64>,
    pub cell: f64,
    pub multiplicity: u32,
}

impl Marginal {
    pub fn new(moduli: Vec<f64>, cell: f64) -> Self {
        Self {
            moduli,
            cell,
            multiplicity: 1,
        }
    }

    pub fn lp_pow(&self, p: f64) -> f64 {
        let s = if p == 2.0 {
            self.moduli.iter().map(|m| m * m).sum::<f64>()
        } else if p.fract() == 0.0 && p < 64.0 {
            let k = p as i32;
            self.moduli.iter().map(|m| m.powi(k)).sum::<f64>()
        } else {
            self.moduli.iter().map(|m| m.powf(p)).sum::<f64>()
        };
        s * self.cell
    }

    pub fn sup(&self) -> f64 {
        self.moduli.iter().fold(0.0, |a, &b| a.max(b))
    }
}

/// `|u(t, .)|` as a product of marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub marginals: Vec<Marginal>,
}

impl Slice {
    /// `int |u(t,x)|^p dx`.
    pub fn lp_pow(&self, p: f64) -> f64 {
        self.marginals
            .iter()
            .map(|m| m.lp_pow(p).powi(m.multiplicity as i32))
            .product()
    }

    pub fn sup(&self) -> f64 {
        self.marginals
            .iter()
            .map(|m| m.sup().powi(m.multiplicity as i32))
            .product()
    }

    /// Adds `weight * |{x : |u(t,x)| > lambdas[k]}|` to `out[k]`.
    ///
    /// `lambdas` must be sorted ascending; only cells above `lambdas[0]` are
    /// visited, so the cost scales with the measure of the lowest level set.
    pub fn accumulate_levels(&self, lambdas: &[f64], weight: f64, out: &mut [f64]) {
        debug_assert_eq!(lambdas.len(), out.len());
        if lambdas.is_empty() {
            return;
        }
        let mut bins = vec![0.0; lambdas.len() + 1];
        let floor = lambdas[0];
        let bin_of = |v: f64| lambdas.partition_point(|&l| l < v);
        if self.marginals.len() == 1 && self.marginals[0].multiplicity == 1 {
            let m = &self.marginals[0];
            for &v in &m.moduli {
                if v > floor {
                    bins[bin_of(v)] += m.cell;
                }
            }
        } else {
            let mut axes: Vec<(Vec<f64>, f64)> = Vec::new();
            for m in &self.marginals {
                let mut sorted = m.moduli.clone();
                sorted.sort_unstable_by(|a, b| b.total_cmp(a));
                while sorted.last() == Some(&0.0) {
                    sorted.pop();
                }
                for _ in 0..m.multiplicity {
                    axes.push((sorted.clone(), m.cell));
                }
            }
            // largest value any completion of a prefix can reach
            let mut tail_max = vec![1.0; axes.len() + 1];
            for a in (0..axes.len()).rev() {
                tail_max[a] = tail_max[a + 1] * axes[a].0.first().copied().unwrap_or(0.0);
            }
            enumerate(&axes, &tail_max, 0, 1.0, 1.0, floor, &mut |v, c| {
                bins[bin_of(v)] += c;
            });
        }
        let mut acc = 0.0;
        for k in (0..lambdas.len()).rev() {
            acc += bins[k + 1];
            out[k] += weight * acc;
        }
    }
}

fn enumerate(
    axes: &[(Vec<f64>, f64)],
    tail_max: &[f64],
    depth: usize,
    value: f64,
    cell: f64,
    floor: f64,
    visit: &mut impl FnMut(f64, f64),
) {
    if depth == axes.len() {
        if value > floor {
            visit(value, cell);
        }
        return;
    }
    let (vals, c) = &axes[depth];
    for &v in vals {
        if value * v * tail_max[depth + 1] <= floor {
            break;
        }
        enumerate(axes, tail_max, depth + 1, value * v, cell * c, floor, visit);
    }
}

/// A solution operator that can be sampled at any time.
pub trait Flow: Sync {
    fn slice(&self, t: f64) -> Slice;
    /// `||phi||_2` of the unprojected datum.
    fn data_norm(&self) -> f64;
    /// Spatial volume when finite (periodized grids); `None` on the whole line.
    fn space_volume(&self) -> Option<f64>;
    fn diagnostics(&self) -> Diagnostics;
    /// Fraction of the projected datum's spectral mass with `|xi|` outside `[lo, hi]`.
    fn mass_outside_shell(&self, lo: f64, hi: f64) -> f64;
    /// Relative cost of one slice, in units of one million FFT butterflies.
    fn cost(&self) -> f64;
}

/// Full-grid engine: the datum lives on a periodized [`Grid`].
#[derive(Debug, Clone)]
pub struct FullFlow {
    projected: SpectralField,
    data_norm: f64,
    diagnostics: Diagnostics,
}

impl FullFlow {
    /// Projects `phi` with `P_{<=N}` in `mode`. The wrap-around diagnostic is
    /// evaluated at `t = 0` and `t = t_max`.
    pub fn new(phi: &SpectralField, cutoff: f64, mode: Projector, t_max: f64) -> Result<Self> {
        let projected = phi.project(cutoff, mode)?;
        let data_norm = phi.l2_norm();
        if data_norm == 0.0 {
            return Err(Error::ZeroData);
        }
        let mut diagnostics = Diagnostics::default();
        diagnostics.note_wrap(projected.inverse().seam_mass_fraction());
        diagnostics.note_wrap(projected.propagate(t_max).inverse().seam_mass_fraction());
        Ok(Self {
            projected,
            data_norm,
            diagnostics,
        })
    }

    pub fn projected(&self) -> &SpectralField {
        &self.projected
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.projected.grid()
    }

    /// Complex samples of `u(t)` on the grid.
    pub fn values(&self, t: f64) -> Vec<Complex64> {
        self.projected.propagate(t).inverse().into_samples()
    }
}

impl Flow for FullFlow {
    fn slice(&self, t: f64) -> Slice {
        let moduli = self.values(t).iter().map(|v| v.norm()).collect();
        Slice {
            marginals: vec![Marginal::new(moduli, self.grid().cell_volume())],
        }
    }

    fn data_norm(&self) -> f64 {
        self.data_norm
    }

    fn space_volume(&self) -> Option<f64> {
        Some(self.grid().volume())
    }

    fn diagnostics(&self) -> Diagnostics {
        self.diagnostics.clone()
    }

    fn mass_outside_shell(&self, lo: f64, hi: f64) -> f64 {
        self.projected.mass_outside_shell(lo, hi)
    }

    fn cost(&self) -> f64 {
        let n = self.grid().len() as f64;
        n * n.log2() * 1e-6
    }
}

/// Product engine for separable data, projected with the box cutoff
/// `prod_i chi(xi_i / N)`.
#[derive(Debug, Clone)]
pub struct ProductFlow {
    data: SeparableData,
    cutoff: Option<f64>,
    factors: Vec<(Factor, u32)>,
    data_norm: f64,
    diagnostics: Diagnostics,
}

impl ProductFlow {
    /// `p` is the largest exponent the slices will be integrated against;
    /// it sets the oversampling of the factor grids.
    pub fn new(data: &SeparableData, cutoff: Option<f64>, p: f64) -> Result<Self> {
        let data_norm = data.l2_norm();
        if !(data_norm > 0.0) {
            return Err(Error::ZeroData);
        }
        let mut groups: Vec<(usize, u32)> = Vec::new();
        for a in 0..data.axes.len() {
            match groups
                .iter_mut()
                .find(|(b, _)| data.kind(*b) == data.kind(a) && data.axes[*b] == data.axes[a])
            {
                Some(g) => g.1 += 1,
                None => groups.push((a, 1)),
            }
        }
        let mut diagnostics = Diagnostics::default();
        let mut factors = Vec::with_capacity(groups.len());
        for (a, mult) in groups {
            let f = Factor::for_axis(&data.axes[a], data.kind(a), cutoff, p)?;
            diagnostics.note_wrap(f.edge_fraction());
            factors.push((f, mult));
        }
        Ok(Self {
            data: data.clone(),
            cutoff,
            factors,
            data_norm,
            diagnostics,
        })
    }

    pub fn data(&self) -> &SeparableData {
        &self.data
    }

    pub fn factors(&self) -> &[(Factor, u32)] {
        &self.factors
    }
}

impl Flow for ProductFlow {
    fn slice(&self, t: f64) -> Slice {
        let marginals = self
            .factors
            .iter()
            .map(|(f, mult)| {
                let (moduli, cell) = f.moduli(t);
                Marginal {
                    moduli,
                    cell,
                    multiplicity: *mult,
                }
            })
            .collect();
        Slice { marginals }
    }

    fn data_norm(&self) -> f64 {
        self.data_norm
    }

    fn space_volume(&self) -> Option<f64> {
        None
    }

    fn diagnostics(&self) -> Diagnostics {
        self.diagnostics.clone()
    }

    fn mass_outside_shell(&self, lo: f64, hi: f64) -> f64 {
        self.data.mass_outside_shell(lo, hi, self.cutoff)
    }

    fn cost(&self) -> f64 {
        self.factors
            .iter()
            .map(|(f, _)| {
                let n = f.moduli(0.0).0.len() as f64;
                n * n.log2() * 1e-6
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoff::BoxCutoff;
    use crate::grid::{build_grid, WaveguideSpec};
    use crate::separable::AxisProfile;

    #[test]
    fn product_levels_match_brute_force() {
        let a = Marginal::new(vec![0.5, 2.0, 1.0, 0.0, 3.0], 0.25);
        let b = Marginal {
            moduli: vec![1.5, 0.2, 0.9],
            cell: 0.5,
            multiplicity: 2,
        };
        let s = Slice {
            marginals: vec![a.clone(), b.clone()],
        };
        let lambdas = [0.01, 0.3, 1.0, 2.0, 4.0, 7.0];
        let mut out = [0.0; 6];
        s.accumulate_levels(&lambdas, 2.0, &mut out);
        for (k, &l) in lambdas.iter().enumerate() {
            let mut m = 0.0;
            for &x in &a.moduli {
                for &y in &b.moduli {
                    for &z in &b.moduli {
                        if x * y * z > l {
                            m += 0.25 * 0.5 * 0.5;
                        }
                    }
                }
            }
            assert!((out[k] - 2.0 * m).abs() < 1e-14, "{k}: {} vs {}", out[k], 2.0 * m);
        }
        let brute: f64 = a.moduli.iter().map(|x| x.powi(3)).sum::<f64>() * 0.25
            * (b.moduli.iter().map(|x| x.powi(3)).sum::<f64>() * 0.5).powi(2);
        assert!((s.lp_pow(3.0) - brute).abs() < 1e-12);
        assert_eq!(s.sup(), 3.0 * 1.5 * 1.5);
    }

    #[test]
    fn product_engine_matches_full_grid() {
        // separable datum realized on a grid large enough to hold it until t = 1/4
        let data = SeparableData::new(
            1,
            2,
            vec![
                AxisProfile::bump(BoxCutoff::centered(2.0)),
                AxisProfile::bump(BoxCutoff::centered(2.0)),
                AxisProfile::bump(BoxCutoff::centered(2.0)),
            ],
        )
        .unwrap();
        let spec = WaveguideSpec::new(1, 2, 64.0, &[2048, 32, 32]).unwrap();
        let grid = Arc::new(build_grid(&spec, Some(4.0)).unwrap());
        let phi = data.realize(grid).unwrap();
        let full = FullFlow::new(&phi, 4.0, Projector::Box, 0.25).unwrap();
        let prod = ProductFlow::new(&data, Some(4.0), 6.0).unwrap();
        assert_eq!(prod.factors().len(), 2);
        assert!((full.data_norm() / prod.data_norm() - 1.0).abs() < 1e-6);
        for &t in &[0.0, 0.05, 0.25] {
            let f = full.slice(t);
            let g = prod.slice(t);
            for p in [2.0, 4.0, 6.0] {
                let r = f.lp_pow(p) / g.lp_pow(p);
                assert!((r - 1.0).abs() < 1e-6, "t={t} p={p}: {r}");
            }
            assert!((f.sup() / g.sup() - 1.0).abs() < 1e-3);
        }
        assert!(prod.diagnostics().is_clean(), "{:?}", prod.diagnostics());
        assert!(full.diagnostics().is_clean(), "{:?}", full.diagnostics());
    }
}
