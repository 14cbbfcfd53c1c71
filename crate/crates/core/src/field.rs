//! Spectral and physical fields on a [`Grid`].
//!
//! Transforms follow `phi_hat(xi) = int phi(x) e^{-2 pi i x.xi} dx`; the
//! spectral inner product carries weight `L^-m` per lattice point, so the pair
//! is unitary. A constant field `c` has `phi_hat(0) = c L^m`.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::cutoff::{chi, dn_profile};
use crate::error::{Error, Result};
use crate::grid::{AxisKind, Grid};

/// How `P_{<=N}` acts on a frequency `xi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projector {
    /// Indicator of `|xi| <= N`.
    Sharp,
    /// `chi(|xi| / N)`.
    Smooth,
    /// `prod_i chi(xi_i / N)`, the cutoff of the kernel `K_N`.
    Box,
}

impl Projector {
    /// Largest frequency the projector can pass, relative to `N`.
    pub fn reach(self) -> f64 {
        match self {
            Projector::Sharp => 1.0,
            Projector::Smooth | Projector::Box => 2.0,
        }
    }

    pub fn weight(self, xi: &[f64], cutoff: f64) -> f64 {
        match self {
            Projector::Sharp => {
                let r2: f64 = xi.iter().map(|x| x * x).sum();
                if r2 <= cutoff * cutoff {
                    1.0
                } else {
                    0.0
                }
            }
            Projector::Smooth => chi(xi.iter().map(|x| x * x).sum::<f64>().sqrt() / cutoff),
            Projector::Box => xi.iter().map(|x| chi(x / cutoff)).product(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
    pub tag: String,
}

#[derive(Debug, Clone)]
pub struct PhysicalField {
    grid: Arc<Grid>,
    samples: Vec<Complex64>,
}

fn check_len(grid: &Grid, len: usize) -> Result<()> {
    if grid.len() != len {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{len} values for a grid of {} points",
            grid.len()
        )));
    }
    Ok(())
}

impl SpectralField {
    pub fn new(grid: Arc<Grid>, coeffs: Vec<Complex64>, tag: impl Into<String>) -> Result<Self> {
        check_len(&grid, coeffs.len())?;
        Ok(Self {
            grid,
            coeffs,
            tag: tag.into(),
        })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let coeffs = alloc::vec![Complex64::new(0.0, 0.0); grid.len()];
        Self {
            grid,
            coeffs,
            tag: String::new(),
        }
    }

    /// Coefficients sampled from a function of the frequency vector.
    pub fn from_fn(grid: Arc<Grid>, f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let coeffs = grid.map_points(true, f);
        Self {
            grid,
            coeffs,
            tag: String::new(),
        }
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    fn with_coeffs(&self, coeffs: Vec<Complex64>) -> Self {
        Self {
            grid: self.grid.clone(),
            coeffs,
            tag: self.tag.clone(),
        }
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.spec() == other.grid.spec() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch("fields live on different grids".into()))
        }
    }

    /// Multiplies coefficient-wise by a real multiplier.
    pub fn scaled_by(&self, weights: &[f64]) -> Self {
        let coeffs = self.coeffs.iter().zip(weights).map(|(c, w)| c * w).collect();
        self.with_coeffs(coeffs)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        self.with_coeffs(self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: Complex64, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + factor * b)
            .collect();
        Ok(self.with_coeffs(coeffs))
    }

    /// `<self, other>` with the spectral measure (conjugate-linear in `self`).
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.same_grid(other)?;
        let s: Complex64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.freq_weight())
    }

    pub fn l2_norm(&self) -> f64 {
        (self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.freq_weight()).sqrt()
    }

    /// `H^s` norm with weight `<xi>^{2s}`, `<xi> = (1 + |xi|^2)^{1/2}`.
    pub fn hs_norm(&self, s: f64) -> f64 {
        let sq = self.grid.freq_sq();
        let total: f64 = self
            .coeffs
            .iter()
            .zip(&sq)
            .map(|(c, r2)| (1.0 + r2).powf(s) * c.norm_sqr())
            .sum();
        (total * self.grid.freq_weight()).sqrt()
    }

    /// Projector weights on this grid, after the Nyquist check.
    pub fn projector_weights(grid: &Grid, cutoff: f64, mode: Projector) -> Result<Vec<f64>> {
        grid.spec().check_cutoff(cutoff)?;
        Ok(match mode {
            Projector::Box => {
                let factors: Vec<Vec<f64>> = (0..grid.spec().d())
                    .map(|a| grid.axis_freqs(a).iter().map(|x| chi(x / cutoff)).collect())
                    .collect();
                grid.separable(&factors)
            }
            _ => grid.map_points(true, |xi| mode.weight(xi, cutoff)),
        })
    }

    /// `P_{<=N}` in the requested mode.
    pub fn project(&self, cutoff: f64, mode: Projector) -> Result<Self> {
        let w = Self::projector_weights(&self.grid, cutoff, mode)?;
        Ok(self.scaled_by(&w))
    }

    /// `D_N`: multiplication by `g(xi / N)`.
    pub fn apply_dn(&self, cutoff: f64, s: f64) -> Result<Self> {
        if !(s >= 1.0) {
            return Err(Error::ParameterOutOfRange(alloc::format!(
                "D_N needs s >= 1, got {s}"
            )));
        }
        let w = self.grid.map_points(true, |xi| {
            let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
            dn_profile(r / cutoff, s)
        });
        Ok(self.scaled_by(&w))
    }

    /// Free evolution: multiplication by `exp(-2 pi i t |xi|^2)`.
    pub fn propagate(&self, t: f64) -> Self {
        let phase = self.grid.propagator(t);
        let coeffs = self.coeffs.iter().zip(&phase).map(|(c, p)| c * p).collect();
        self.with_coeffs(coeffs)
    }

    pub fn inverse(&self) -> PhysicalField {
        let mut samples = self.coeffs.clone();
        self.grid.inverse_in_place(&mut samples);
        PhysicalField {
            grid: self.grid.clone(),
            samples,
        }
    }

    /// Fraction of `|phi_hat|^2` mass outside `lo <= |xi| <= hi`.
    pub fn mass_outside_shell(&self, lo: f64, hi: f64) -> f64 {
        let sq = self.grid.freq_sq();
        let (mut out, mut total) = (0.0, 0.0);
        for (c, r2) in self.coeffs.iter().zip(&sq) {
            let m = c.norm_sqr();
            total += m;
            let r = r2.sqrt();
            if r < lo || r > hi {
                out += m;
            }
        }
        if total > 0.0 {
            out / total
        } else {
            0.0
        }
    }
}

impl PhysicalField {
    pub fn new(grid: Arc<Grid>, samples: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, samples.len())?;
        Ok(Self { grid, samples })
    }

    /// Samples a function of the centered position vector.
    pub fn from_fn(grid: Arc<Grid>, f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let samples = grid.map_points(false, f);
        Self { grid, samples }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn forward(&self) -> SpectralField {
        let mut coeffs = self.samples.clone();
        self.grid.forward_in_place(&mut coeffs);
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
            tag: String::new(),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn conj(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            samples: self.samples.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn sup_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest fraction of `|u|^2` lying within `L/16` of the periodic seam of a
    /// Euclidean axis.
    pub fn seam_mass_fraction(&self) -> f64 {
        let spec = self.grid.spec();
        let total: f64 = self.samples.iter().map(|c| c.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let dims = spec.dims.clone();
        let mut worst: f64 = 0.0;
        for axis in 0..spec.d() {
            if spec.kind(axis) != AxisKind::Line {
                continue;
            }
            let pos = self.grid.axis_positions(axis);
            let edge = spec.box_length / 2.0 - spec.box_length / 16.0;
            let inner: usize = dims[axis + 1..].iter().product();
            let len = dims[axis];
            let mut near = 0.0;
            for (flat, c) in self.samples.iter().enumerate() {
                let j = (flat / inner) % len;
                if pos[j].abs() >= edge {
                    near += c.norm_sqr();
                }
            }
            worst = worst.max(near / total);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, WaveguideSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(m: usize, n: usize, l: f64, dims: &[usize]) -> Arc<Grid> {
        Arc::new(build_grid(&WaveguideSpec::new(m, n, l, dims).unwrap(), None).unwrap())
    }

    fn random_physical(g: &Arc<Grid>, seed: u64) -> PhysicalField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = (0..g.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        PhysicalField::new(g.clone(), s).unwrap()
    }

    #[test]
    fn constant_field_goes_to_zero_mode() {
        let g = grid(1, 2, 4.0, &[16, 8, 8]);
        let c = Complex64::new(0.5, -1.25);
        let f = PhysicalField::from_fn(g.clone(), |_| c);
        let s = f.forward();
        assert!((s.coeffs()[0] - c * 4.0).norm() < 1e-12);
        assert!(s.coeffs()[1..].iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn parseval_and_round_trip() {
        for (m, n, dims) in [(1, 2, [32usize, 8, 8]), (2, 1, [16, 16, 8])] {
            let g = grid(m, n, 3.0, &dims);
            let f = random_physical(&g, 7);
            let s = f.forward();
            assert!((s.l2_norm() / f.l2_norm() - 1.0).abs() < 1e-12);
            let back = s.inverse();
            let err: f64 = back
                .samples()
                .iter()
                .zip(f.samples())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum();
            assert!(err.sqrt() < 1e-12 * f.l2_norm() / g.cell_volume().sqrt());
        }
    }

    #[test]
    fn plane_wave_transform() {
        // e^{2 pi i (x/L*3 + 2y)} sits at lattice point (3/L, 2)
        let g = grid(1, 1, 2.0, &[16, 8]);
        let f = PhysicalField::from_fn(g.clone(), |x| {
            crate::grid::chirp(x[0] * 3.0 / 2.0 + 2.0 * x[1])
        });
        let s = f.forward();
        let idx = 3 * 8 + 2;
        assert!((s.coeffs()[idx] - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn projector_modes() {
        let g = grid(1, 2, 4.0, &[64, 16, 16]);
        let ones = SpectralField::from_fn(g.clone(), |_| Complex64::new(1.0, 0.0));
        let sharp = ones.project(2.0, Projector::Sharp).unwrap();
        let twice = sharp.project(2.0, Projector::Sharp).unwrap();
        assert_eq!(sharp.coeffs(), twice.coeffs());
        let smooth = ones.project(2.0, Projector::Smooth).unwrap();
        assert!(ones.project(4.0, Projector::Sharp).is_ok());
        let sq = g.freq_sq();
        for ((s, m), r2) in sharp.coeffs().iter().zip(smooth.coeffs()).zip(&sq) {
            assert!(m.norm() >= s.norm() - 1e-15);
            if r2.sqrt() >= 4.0 {
                assert_eq!(m.norm(), 0.0);
            }
        }
        assert!(ones.project(5.0, Projector::Box).is_err());
    }

    #[test]
    fn dn_multiplier() {
        let g = grid(1, 2, 1.0, &[32, 32, 32]);
        let f = SpectralField::from_fn(g.clone(), |_| Complex64::new(1.0, 0.0));
        let d = f.apply_dn(2.0, 2.5).unwrap();
        let sq = g.freq_sq();
        for (c, r2) in d.coeffs().iter().zip(&sq) {
            let r = r2.sqrt();
            if r <= 1.0 + 1e-12 {
                assert_eq!(c.re, 1.0);
            }
            if (r - 8.0).abs() < 1e-12 {
                assert!((c.re - 4f64.powf(1.5)).abs() < 1e-12);
            }
        }
        let id = f.apply_dn(2.0, 1.0).unwrap();
        assert_eq!(id.coeffs(), f.coeffs());
        assert!(f.apply_dn(2.0, 0.5).is_err());
    }

    #[test]
    fn propagator_laws() {
        let g = grid(1, 2, 4.0, &[32, 8, 8]);
        let f = random_physical(&g, 3).forward();
        assert_eq!(f.propagate(0.0).coeffs(), f.coeffs());
        let a = f.propagate(0.37);
        assert!((a.l2_norm() / f.l2_norm() - 1.0).abs() < 1e-12);
        let b = f.propagate(0.12).propagate(0.25);
        let diff = a.axpy(Complex64::new(-1.0, 0.0), &b).unwrap().l2_norm();
        assert!(diff < 1e-10 * f.l2_norm());
        // torus mode k = (1, 0) picks up e^{-2 pi i t}
        let mut e = SpectralField::zeros(g.clone());
        e.coeffs_mut()[8] = Complex64::new(1.0, 0.0);
        let t = 0.3;
        let ph = e.propagate(t).coeffs()[8];
        let want = Complex64::new((2.0 * core::f64::consts::PI * t).cos(), -(2.0 * core::f64::consts::PI * t).sin());
        assert!((ph - want).norm() < 1e-14);
    }

    #[test]
    fn conjugation_symmetry() {
        let g = grid(2, 1, 3.0, &[16, 16, 8]);
        let f = random_physical(&g, 11);
        let t = 0.21;
        let lhs = f.conj().forward().propagate(t).inverse();
        let rhs = f.forward().propagate(-t).inverse().conj();
        for (a, b) in lhs.samples().iter().zip(rhs.samples()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn hs_norms() {
        let g = grid(1, 2, 1.0, &[8, 8, 8]);
        let mut f = SpectralField::zeros(g.clone());
        // xi = (1, 1, 1): |xi|^2 = 3
        let idx = (8 + 1) * 8 + 1;
        f.coeffs_mut()[idx] = Complex64::new(1.0, 0.0);
        assert!((f.hs_norm(1.0) - 2.0).abs() < 1e-14);
        let r = random_physical(&g, 5).forward();
        assert!((r.hs_norm(0.0) - r.l2_norm()).abs() < 1e-12 * r.l2_norm());
        let mut prev = 0.0;
        for i in 0..10 {
            let v = r.hs_norm(i as f64 * 0.3);
            assert!(v >= prev);
            prev = v;
        }
    }
}
