//! Quadratic Weyl sums `S(t, y) = sum_k chi(k/N) e^{2 pi i (y k - t k^2)}` and
//! their envelope near rationals `a/q`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::cutoff::chi;
use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::grid::chirp;

/// Frequencies with nonzero weight: `|k| < 2N`.
fn support(cutoff: f64) -> core::ops::RangeInclusive<i64> {
    let k = (2.0 * cutoff).ceil() as i64;
    -k..=k
}

/// Direct summation of `S(t, y)`.
pub fn weyl_sum(t: f64, y: f64, cutoff: f64) -> Complex64 {
    support(cutoff)
        .map(|k| {
            let w = chi(k as f64 / cutoff);
            if w == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            // chirp reduces the phase mod 1 before the trig call
            chirp(y * k as f64 - (t * (k * k) as f64)) * w
        })
        .sum()
}

/// Samples of `S(t, .)` on `y_j = j / M`, `M = next_pow2(64 N)`.
#[derive(Debug, Clone)]
pub struct WeylSampler {
    cutoff: f64,
    weights: Vec<(i64, f64)>,
    plan: FftPlan,
}

impl WeylSampler {
    pub fn new(cutoff: f64) -> Result<Self> {
        if !(cutoff >= 1.0) {
            return Err(Error::ParameterOutOfRange(alloc::format!(
                "Weyl sums need N >= 1, got {cutoff}"
            )));
        }
        let m = ((64.0 * cutoff).ceil() as usize).next_power_of_two();
        let weights = support(cutoff)
            .map(|k| (k, chi(k as f64 / cutoff)))
            .filter(|e| e.1 > 0.0)
            .collect();
        Ok(Self {
            cutoff,
            weights,
            plan: FftPlan::new(m)?,
        })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.plan.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plan.is_empty()
    }

    pub fn samples(&self, t: f64) -> Vec<Complex64> {
        let m = self.plan.len() as i64;
        let mut buf = vec![Complex64::new(0.0, 0.0); m as usize];
        for &(k, w) in &self.weights {
            buf[k.rem_euclid(m) as usize] += chirp(-t * (k * k) as f64) * w;
        }
        self.plan.inverse(&mut buf);
        buf
    }

    /// `sup_y |S(t, y)|` on the sampling grid.
    pub fn sup(&self, t: f64) -> f64 {
        self.samples(t).iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

/// `N / (q^{1/2} (1 + N |t - a/q|^{1/2}))`.
pub fn weyl_envelope(t: f64, a: i64, q: i64, cutoff: f64) -> f64 {
    let d = (t - a as f64 / q as f64).abs();
    cutoff / ((q as f64).sqrt() * (1.0 + cutoff * d.sqrt()))
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeylRow {
    pub a: i64,
    pub q: i64,
    pub offset: f64,
    pub t: f64,
    pub sup: f64,
    pub envelope: f64,
    pub ratio: f64,
}

/// `sup_y |S(a/q + offset, y)|` against the envelope, for each offset.
pub fn weyl_envelope_check(a: i64, q: i64, cutoff: f64, offsets: &[f64]) -> Result<Vec<WeylRow>> {
    if q < 1 || (q as f64) > cutoff || gcd(a, q) != 1 {
        return Err(Error::ParameterOutOfRange(alloc::format!(
            "need 1 <= q <= N and gcd(a, q) = 1, got a = {a}, q = {q}, N = {cutoff}"
        )));
    }
    let sampler = WeylSampler::new(cutoff)?;
    offsets
        .iter()
        .map(|&off| {
            let t = a as f64 / q as f64 + off;
            if t.abs() <= 4.0 / cutoff {
                return Err(Error::ParameterOutOfRange(alloc::format!(
                    "|t| = {} must exceed 4/N = {}",
                    t.abs(),
                    4.0 / cutoff
                )));
            }
            let sup = sampler.sup(t);
            let envelope = weyl_envelope(t, a, q, cutoff);
            Ok(WeylRow {
                a,
                q,
                offset: off,
                t,
                sup,
                envelope,
                ratio: sup / envelope,
            })
        })
        .collect()
}

/// All reduced fractions `a/q` with `1 <= a <= q <= q_max`.
pub fn reduced_fractions(q_max: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for q in 1..=q_max {
        for a in 1..=q {
            if gcd(a, q) == 1 {
                out.push((a, q));
            }
        }
    }
    out
}
