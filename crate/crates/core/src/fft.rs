//! Iterative radix-2 FFT with an optional radix-3 outer stage, and separable
//! n-dimensional transforms.
//!
//! Sign convention: `forward` computes `X[k] = sum_j x[j] e^{-2 pi i jk/n}`,
//! `inverse` the same sum with `+i` and no normalization.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Grid axes accept `2^a` and `3 * 2^a` samples, `a >= 1`.
pub fn supported_len(len: usize) -> bool {
    len >= 2 && len.is_multiple_of(2) && (len.is_power_of_two() || (len.is_multiple_of(3) && (len / 3).is_power_of_two()))
}

/// Precomputed twiddles for one length `2^a` or `3 * 2^a`.
///
/// Plans are immutable once built, so they are shared freely between workers.
#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    // power-of-two part
    half_len: usize,
    // stage twiddles laid out contiguously: stage with half-size h occupies [h-1, 2h-1)
    forward_tw: Vec<Complex64>,
    inverse_tw: Vec<Complex64>,
    bitrev: Vec<u32>,
    // e^{-2 pi i k/n} for k < 2n/3 when the length carries a factor 3
    outer_tw: Vec<Complex64>,
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self> {
        let three = len != 0 && len.is_multiple_of(3) && (len / 3).is_power_of_two();
        if len == 0 || !(len.is_power_of_two() || three) {
            return Err(Error::UnsupportedLength { axis: 0, len });
        }
        let m = if three { len / 3 } else { len };
        let bits = m.trailing_zeros();
        let mut forward_tw = Vec::with_capacity(m.saturating_sub(1));
        let mut half = 1;
        while half < m {
            for k in 0..half {
                let theta = -PI * (k as f64) / (half as f64);
                forward_tw.push(Complex64::new(theta.cos(), theta.sin()));
            }
            half *= 2;
        }
        let inverse_tw = forward_tw.iter().map(|w| w.conj()).collect();
        let bitrev = (0..m as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        let outer_tw = if three {
            (0..2 * m)
                .map(|k| {
                    let theta = -2.0 * PI * k as f64 / len as f64;
                    Complex64::new(theta.cos(), theta.sin())
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            len,
            half_len: m,
            forward_tw,
            inverse_tw,
            bitrev,
            outer_tw,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Scratch length needed by [`FftPlan::process`].
    pub fn scratch_len(&self) -> usize {
        if self.outer_tw.is_empty() {
            0
        } else {
            self.len
        }
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.scratch_len()];
        self.process(buf, &mut scratch, false);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.scratch_len()];
        self.process(buf, &mut scratch, true);
    }

    /// Transforms `buf` in place; `scratch` needs at least `scratch_len()` entries.
    pub fn process(&self, buf: &mut [Complex64], scratch: &mut [Complex64], inverse: bool) {
        assert_eq!(buf.len(), self.len, "buffer length does not match plan");
        if self.outer_tw.is_empty() {
            if inverse {
                self.run_pow2::<true>(buf);
            } else {
                self.run_pow2::<false>(buf);
            }
            return;
        }
        let m = self.half_len;
        let s = &mut scratch[..self.len];
        for r in 0..3 {
            for j in 0..m {
                s[r * m + j] = buf[3 * j + r];
            }
            let part = &mut s[r * m..(r + 1) * m];
            if inverse {
                self.run_pow2::<true>(part);
            } else {
                self.run_pow2::<false>(part);
            }
        }
        // X[k + qm] = sum_r w^{rk} e^{-2 pi i rq/3} Y_r[k]
        let (c, h) = (-0.5, 0.75f64.sqrt());
        let sgn = if inverse { -1.0 } else { 1.0 };
        for k in 0..m {
            let (mut w1, mut w2) = (self.outer_tw[k], self.outer_tw[2 * k]);
            if inverse {
                w1 = w1.conj();
                w2 = w2.conj();
            }
            let a = s[k];
            let b = s[m + k] * w1;
            let d = s[2 * m + k] * w2;
            let sum = b + d;
            let diff = b - d;
            // e^{-2 pi i/3} = c - i h
            let rot = Complex64::new(sgn * h * diff.im, -sgn * h * diff.re);
            buf[k] = a + sum;
            buf[k + m] = a + sum * c + rot;
            buf[k + 2 * m] = a + sum * c - rot;
        }
    }

    fn run_pow2<const INVERSE: bool>(&self, buf: &mut [Complex64]) {
        let n = self.half_len;
        if n == 1 {
            return;
        }
        for (i, &r) in self.bitrev.iter().enumerate() {
            let r = r as usize;
            if i < r {
                buf.swap(i, r);
            }
        }
        // size-2 stage has unit twiddles
        for pair in buf.chunks_exact_mut(2) {
            let (a, b) = (pair[0], pair[1]);
            pair[0] = a + b;
            pair[1] = a - b;
        }
        let table = if INVERSE { &self.inverse_tw } else { &self.forward_tw };
        let mut half = 2;
        while half < n {
            let size = half * 2;
            let tw = &table[half - 1..size - 1];
            for block in buf.chunks_exact_mut(size) {
                let (lo, hi) = block.split_at_mut(half);
                for ((a, b), w) in lo.iter_mut().zip(hi.iter_mut()).zip(tw) {
                    let t = *b * *w;
                    *b = *a - t;
                    *a += t;
                }
            }
            half = size;
        }
    }
}

/// Number of strided lines gathered together when transforming a non-contiguous axis.
const LINE_BLOCK: usize = 8;

/// Transforms `data` (row-major, `dims[0]` slowest) along every axis.
pub fn transform_nd(data: &mut [Complex64], dims: &[usize], plans: &[&FftPlan], inverse: bool) {
    debug_assert_eq!(dims.len(), plans.len());
    let total: usize = dims.iter().product();
    assert_eq!(data.len(), total, "data length does not match dims");
    for axis in 0..dims.len() {
        transform_axis(data, dims, axis, plans[axis], inverse);
    }
}

/// Transforms `data` along a single axis.
pub fn transform_axis(
    data: &mut [Complex64],
    dims: &[usize],
    axis: usize,
    plan: &FftPlan,
    inverse: bool,
) {
    let len = dims[axis];
    debug_assert_eq!(plan.len(), len);
    if len == 1 {
        return;
    }
    let inner: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[..axis].iter().product();
    let mut work = vec![Complex64::new(0.0, 0.0); plan.scratch_len()];
    if inner == 1 {
        for line in data.chunks_exact_mut(len) {
            plan.process(line, &mut work, inverse);
        }
        return;
    }
    let mut scratch = vec![Complex64::new(0.0, 0.0); len * LINE_BLOCK];
    for o in 0..outer {
        let base = o * len * inner;
        let mut i0 = 0;
        while i0 < inner {
            let width = LINE_BLOCK.min(inner - i0);
            for j in 0..len {
                let row = base + j * inner + i0;
                for b in 0..width {
                    scratch[b * len + j] = data[row + b];
                }
            }
            for b in 0..width {
                plan.process(&mut scratch[b * len..(b + 1) * len], &mut work, inverse);
            }
            for j in 0..len {
                let row = base + j * inner + i0;
                for b in 0..width {
                    data[row + b] = scratch[b * len + j];
                }
            }
            i0 += width;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (j, &v)| {
                    let theta = sign * 2.0 * PI * ((j * k) % n) as f64 / n as f64;
                    acc + v * Complex64::new(theta.cos(), theta.sin())
                })
            })
            .collect()
    }

    fn sample(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|j| {
                let x = j as f64;
                Complex64::new((0.3 * x).sin() + 0.1 * x, (1.7 * x).cos() - 0.05 * x * x)
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for &n in &[1usize, 2, 3, 4, 6, 8, 12, 16, 48, 64, 96, 128] {
            let x = sample(n);
            let plan = FftPlan::new(n).unwrap();
            let mut fwd = x.clone();
            plan.forward(&mut fwd);
            let reference = naive_dft(&x, -1.0);
            for (a, b) in fwd.iter().zip(&reference) {
                assert!((a - b).norm() < 1e-9 * (1.0 + b.norm()), "n={n}");
            }
            let mut inv = x.clone();
            plan.inverse(&mut inv);
            let reference = naive_dft(&x, 1.0);
            for (a, b) in inv.iter().zip(&reference) {
                assert!((a - b).norm() < 1e-9 * (1.0 + b.norm()), "n={n}");
            }
        }
    }

    #[test]
    fn rejects_unsupported_lengths() {
        assert!(matches!(FftPlan::new(20), Err(Error::UnsupportedLength { len: 20, .. })));
        assert!(FftPlan::new(9).is_err());
        assert!(supported_len(48) && supported_len(64) && !supported_len(3) && !supported_len(1));
        assert!(FftPlan::new(0).is_err());
    }

    #[test]
    fn nd_transform_is_separable() {
        let dims = [4usize, 6, 2];
        let total = 48;
        let plans: Vec<FftPlan> = dims.iter().map(|&d| FftPlan::new(d).unwrap()).collect();
        let refs: Vec<&FftPlan> = plans.iter().collect();
        let x = sample(total);
        let mut y = x.clone();
        transform_nd(&mut y, &dims, &refs, false);
        // brute-force 3D DFT
        for k0 in 0..4 {
            for k1 in 0..6 {
                for k2 in 0..2 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j0 in 0..4 {
                        for j1 in 0..6 {
                            for j2 in 0..2 {
                                let phase = -2.0
                                    * PI
                                    * ((j0 * k0) as f64 / 4.0
                                        + (j1 * k1) as f64 / 6.0
                                        + (j2 * k2) as f64 / 2.0);
                                acc += x[(j0 * 6 + j1) * 2 + j2]
                                    * Complex64::new(phase.cos(), phase.sin());
                            }
                        }
                    }
                    let got = y[(k0 * 6 + k1) * 2 + k2];
                    assert!((got - acc).norm() < 1e-9 * (1.0 + acc.norm()));
                }
            }
        }
        transform_nd(&mut y, &dims, &refs, true);
        for (a, b) in y.iter().zip(&x) {
            assert!((a / total as f64 - b).norm() < 1e-12);
        }
    }
}
