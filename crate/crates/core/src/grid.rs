//! Waveguide geometry `R^m x T^n`, its sampling grid and frequency lattice.
//!
//! Axes `0..m` are Euclidean directions periodized to a box of length `L`,
//! axes `m..m+n` are unit-circumference circles. Data is stored row-major
//! with axis 0 slowest. Sample `j` on an axis sits at the centered coordinate
//! `j h` for `j < M/2` and `(j - M) h` otherwise, so the periodic seam of a
//! Euclidean axis lies at `+-L/2`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{transform_axis, FftPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    Line,
    Torus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveguideSpec {
    pub m: usize,
    pub n: usize,
    pub box_length: f64,
    pub dims: Vec<usize>,
}

impl WaveguideSpec {
    pub fn new(m: usize, n: usize, box_length: f64, dims: &[usize]) -> Result<Self> {
        if m == 0 || n == 0 || !(2..=3).contains(&(m + n)) {
            return Err(Error::DimensionError { m, n });
        }
        if dims.len() != m + n {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} grid dims for a {}-dimensional waveguide",
                dims.len(),
                m + n
            )));
        }
        if !(box_length > 0.0 && box_length.is_finite()) {
            return Err(Error::ParameterOutOfRange(alloc::format!(
                "box length {box_length}"
            )));
        }
        for (axis, &len) in dims.iter().enumerate() {
            if !crate::fft::supported_len(len) {
                return Err(Error::UnsupportedLength { axis, len });
            }
        }
        Ok(Self {
            m,
            n,
            box_length,
            dims: dims.to_vec(),
        })
    }

    /// Box length `8 pi N T + 16 sqrt(T) + 10 D` for data of support diameter `D`
    /// evolved up to `t_max` at frequency `N`.
    pub fn default_box_length(cutoff: f64, t_max: f64, support_diameter: f64) -> f64 {
        8.0 * PI * cutoff * t_max + 16.0 * t_max.sqrt() + 10.0 * support_diameter
    }

    pub fn d(&self) -> usize {
        self.m + self.n
    }

    pub fn kind(&self, axis: usize) -> AxisKind {
        if axis < self.m {
            AxisKind::Line
        } else {
            AxisKind::Torus
        }
    }

    pub fn period(&self, axis: usize) -> f64 {
        match self.kind(axis) {
            AxisKind::Line => self.box_length,
            AxisKind::Torus => 1.0,
        }
    }

    pub fn freq_step(&self, axis: usize) -> f64 {
        1.0 / self.period(axis)
    }

    /// Highest representable frequency on an axis (its Nyquist frequency).
    pub fn max_freq(&self, axis: usize) -> f64 {
        (self.dims[axis] / 2) as f64 * self.freq_step(axis)
    }

    /// Requires every axis to resolve frequencies up to `2 * cutoff`.
    pub fn check_cutoff(&self, cutoff: f64) -> Result<()> {
        for axis in 0..self.d() {
            let available = self.max_freq(axis);
            if available < 2.0 * cutoff {
                return Err(Error::NyquistViolation {
                    axis,
                    required: 2.0 * cutoff,
                    available,
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sampling grid with transform plans and quadrature weights.
#[derive(Debug, Clone)]
pub struct Grid {
    spec: WaveguideSpec,
    plans: Vec<FftPlan>,
    cell_volume: f64,
    freq_weight: f64,
}

/// Validates `spec` and, when a projector cutoff is declared, its Nyquist margin.
pub fn build_grid(spec: &WaveguideSpec, cutoff: Option<f64>) -> Result<Grid> {
    let spec = WaveguideSpec::new(spec.m, spec.n, spec.box_length, &spec.dims)?;
    if let Some(n) = cutoff {
        spec.check_cutoff(n)?;
    }
    let plans = spec
        .dims
        .iter()
        .enumerate()
        .map(|(axis, &len)| FftPlan::new(len).map_err(|_| Error::UnsupportedLength { axis, len }))
        .collect::<Result<Vec<_>>>()?;
    let cell_volume = (0..spec.d())
        .map(|a| spec.period(a) / spec.dims[a] as f64)
        .product();
    let freq_weight = spec.box_length.powi(-(spec.m as i32));
    Ok(Grid {
        spec,
        plans,
        cell_volume,
        freq_weight,
    })
}

impl Grid {
    pub fn spec(&self) -> &WaveguideSpec {
        &self.spec
    }

    pub fn dims(&self) -> &[usize] {
        &self.spec.dims
    }

    pub fn len(&self) -> usize {
        self.spec.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spec.is_empty()
    }

    /// Physical cell volume `(L/M)^m (1/M')^n`.
    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    /// Spectral weight `L^-m` (measure `dxi` on each Euclidean axis, counting on `Z^n`).
    pub fn freq_weight(&self) -> f64 {
        self.freq_weight
    }

    /// Space volume `L^m` (each torus factor has unit volume).
    pub fn volume(&self) -> f64 {
        self.spec.box_length.powi(self.spec.m as i32)
    }

    /// Signed lattice index for storage position `j` on an axis of length `len`.
    #[inline]
    pub fn signed_index(j: usize, len: usize) -> i64 {
        if j < len / 2 {
            j as i64
        } else {
            j as i64 - len as i64
        }
    }

    /// Frequencies of an axis in storage order.
    pub fn axis_freqs(&self, axis: usize) -> Vec<f64> {
        let len = self.spec.dims[axis];
        let step = self.spec.freq_step(axis);
        (0..len)
            .map(|j| Self::signed_index(j, len) as f64 * step)
            .collect()
    }

    /// Centered sample coordinates of an axis in storage order.
    pub fn axis_positions(&self, axis: usize) -> Vec<f64> {
        let len = self.spec.dims[axis];
        let h = self.spec.period(axis) / len as f64;
        (0..len)
            .map(|j| Self::signed_index(j, len) as f64 * h)
            .collect()
    }

    /// Evaluates `f` at every lattice point (frequencies if `spectral`, positions otherwise).
    pub fn map_points<T>(&self, spectral: bool, mut f: impl FnMut(&[f64]) -> T) -> Vec<T> {
        let d = self.spec.d();
        let coords: Vec<Vec<f64>> = (0..d)
            .map(|a| {
                if spectral {
                    self.axis_freqs(a)
                } else {
                    self.axis_positions(a)
                }
            })
            .collect();
        let mut idx = vec![0usize; d];
        let mut point: Vec<f64> = coords.iter().map(|c| c[0]).collect();
        let mut out = Vec::with_capacity(self.len());
        for _ in 0..self.len() {
            out.push(f(&point));
            for a in (0..d).rev() {
                idx[a] += 1;
                if idx[a] < self.spec.dims[a] {
                    point[a] = coords[a][idx[a]];
                    break;
                }
                idx[a] = 0;
                point[a] = coords[a][0];
            }
        }
        out
    }

    /// Outer product of per-axis factors, in storage order.
    pub fn separable<T>(&self, factors: &[Vec<T>]) -> Vec<T>
    where
        T: Copy + core::ops::Mul<Output = T>,
    {
        debug_assert_eq!(factors.len(), self.spec.d());
        let mut out: Vec<T> = factors[0].clone();
        for f in &factors[1..] {
            let mut next = Vec::with_capacity(out.len() * f.len());
            for &a in &out {
                for &b in f {
                    next.push(a * b);
                }
            }
            out = next;
        }
        out
    }

    /// `|xi|^2` at every lattice point.
    pub fn freq_sq(&self) -> Vec<f64> {
        let parts: Vec<Vec<f64>> = (0..self.spec.d())
            .map(|a| self.axis_freqs(a).iter().map(|x| x * x).collect())
            .collect();
        let mut out = parts[0].clone();
        for f in &parts[1..] {
            let mut next = Vec::with_capacity(out.len() * f.len());
            for &a in &out {
                for &b in f {
                    next.push(a + b);
                }
            }
            out = next;
        }
        out
    }

    /// Free propagator multiplier `exp(-2 pi i t |xi|^2)`, built per axis.
    pub fn propagator(&self, t: f64) -> Vec<Complex64> {
        let factors: Vec<Vec<Complex64>> = (0..self.spec.d())
            .map(|a| self.axis_freqs(a).iter().map(|&xi| chirp(-t * xi * xi)).collect())
            .collect();
        self.separable(&factors)
    }

    /// Unscaled DFT along every axis.
    pub fn fft(&self, data: &mut [Complex64], inverse: bool) {
        for axis in 0..self.spec.d() {
            transform_axis(data, &self.spec.dims, axis, &self.plans[axis], inverse);
        }
    }

    /// Physical samples to spectral coefficients: `h_vol * DFT`.
    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        self.fft(data, false);
        let s = self.cell_volume;
        data.iter_mut().for_each(|v| *v *= s);
    }

    /// Spectral coefficients to physical samples: `L^-m * IDFT`.
    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        self.fft(data, true);
        let s = self.freq_weight;
        data.iter_mut().for_each(|v| *v *= s);
    }
}

/// `exp(2 pi i x)` with the argument reduced mod 1 first.
#[inline]
pub fn chirp(x: f64) -> Complex64 {
    let r = x - x.round();
    let theta = 2.0 * PI * r;
    Complex64::new(theta.cos(), theta.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_of_rt2_grid() {
        let spec = WaveguideSpec::new(1, 2, 32.0, &[256, 64, 64]).unwrap();
        let grid = build_grid(&spec, None).unwrap();
        let f = grid.axis_freqs(0);
        assert!((f[1] - 1.0 / 32.0).abs() < 1e-15);
        let k = grid.axis_freqs(1);
        let (lo, hi) = k.iter().fold((f64::MAX, f64::MIN), |(l, h), &x| (l.min(x), h.max(x)));
        assert_eq!((lo, hi), (-32.0, 31.0));
        assert_eq!(grid.len(), 256 * 64 * 64);
    }

    #[test]
    fn nyquist_violation() {
        let spec = WaveguideSpec::new(1, 2, 32.0, &[256, 64, 64]).unwrap();
        let err = build_grid(&spec, Some(64.0)).unwrap_err();
        assert!(matches!(err, Error::NyquistViolation { .. }));
        // the Euclidean axis resolves only up to 256 / 64 = 4
        assert!(build_grid(&spec, Some(2.0)).is_ok());
        assert!(build_grid(&spec, Some(2.5)).is_err());
    }

    #[test]
    fn r2t_grid_and_dimension_errors() {
        let spec = WaveguideSpec::new(2, 1, 16.0, &[128, 128, 32]).unwrap();
        assert_eq!(build_grid(&spec, None).unwrap().len(), 128 * 128 * 32);
        assert!(matches!(
            WaveguideSpec::new(2, 2, 1.0, &[4, 4, 4, 4]),
            Err(Error::DimensionError { m: 2, n: 2 })
        ));
        assert!(matches!(
            WaveguideSpec::new(0, 2, 1.0, &[4, 4]),
            Err(Error::DimensionError { .. })
        ));
        assert!(matches!(
            WaveguideSpec::new(1, 1, 1.0, &[20, 4]),
            Err(Error::UnsupportedLength { axis: 0, len: 20 })
        ));
    }

    #[test]
    fn cell_and_frequency_weights() {
        let spec = WaveguideSpec::new(1, 1, 8.0, &[64, 16]).unwrap();
        let grid = build_grid(&spec, None).unwrap();
        assert!((grid.cell_volume() - (8.0 / 64.0) / 16.0).abs() < 1e-15);
        assert!((grid.freq_weight() - 1.0 / 8.0).abs() < 1e-15);
        let pos = grid.axis_positions(0);
        assert_eq!(pos[32], -4.0);
        assert_eq!(pos[31], 31.0 * 0.125);
    }

    #[test]
    fn map_points_matches_separable_order() {
        let spec = WaveguideSpec::new(1, 2, 2.0, &[4, 8, 2]).unwrap();
        let grid = build_grid(&spec, None).unwrap();
        let pts = grid.map_points(true, |xi| xi[0] * 100.0 + xi[1] * 10.0 + xi[2]);
        let factors = [
            grid.axis_freqs(0).iter().map(|x| x * 100.0).collect::<Vec<_>>(),
            grid.axis_freqs(1).iter().map(|x| x * 10.0).collect(),
            grid.axis_freqs(2).clone(),
        ];
        let mut sum = factors[0].clone();
        for f in &factors[1..] {
            sum = sum.iter().flat_map(|a| f.iter().map(move |b| a + b)).collect();
        }
        assert_eq!(pts, sum);
        let sq = grid.freq_sq();
        let direct = grid.map_points(true, |xi| xi.iter().map(|x| x * x).sum::<f64>());
        assert_eq!(sq, direct);
    }
}
