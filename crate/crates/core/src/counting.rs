//! Lattice points on circles and the measure of thin shells
//! `{ xi in R x Z^2 : ||xi|^2 - C| <= 1/T, |xi_1| <= 2N }`.

use alloc::vec;
use alloc::vec::Vec;


/// `r_2(A)` from the factorization: `4 (d_1(A) - d_3(A))`.
pub fn r2_divisor(a: u64) -> u64 {
    if a == 0 {
        return 1;
    }
    let mut n = a;
    while n.is_multiple_of(2) {
        n /= 2;
    }
    let mut count = 4u64;
    let mut p = 3u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0u64;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            if p % 4 == 1 {
                count *= e + 1;
            } else if e % 2 == 1 {
                return 0;
            }
        }
        p += 2;
    }
    if n > 1 {
        if n % 4 == 1 {
            count *= 2;
        } else {
            return 0;
        }
    }
    count
}

/// `r_2(A)` by enumerating `x` and testing whether `A - x^2` is a square.
pub fn r2_loop(a: u64) -> u64 {
    let mut count = 0;
    let mut x = 0u64;
    while x * x <= a {
        let rest = a - x * x;
        let y = isqrt(rest);
        if y * y == rest {
            // (+-x, +-y), collapsing signs of zero coordinates
            count += match (x == 0, y == 0) {
                (true, true) => 1,
                (true, false) | (false, true) => 2,
                (false, false) => 4,
            };
        }
        x += 1;
    }
    count
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// `r_2(A)`; the two oracles are cross-checked in tests.
pub fn circle_count(a: u64) -> u64 {
    r2_divisor(a)
}

/// `r_2(A)` for every `A <= max` by a sieve over `x^2 + y^2`.
pub fn r2_table(max: u64) -> Vec<u64> {
    let mut out = vec![0u64; max as usize + 1];
    let r = isqrt(max) as i64;
    for x in -r..=r {
        let x2 = (x * x) as u64;
        let rest = max - x2;
        let ry = isqrt(rest) as i64;
        for y in -ry..=ry {
            out[(x2 + (y * y) as u64) as usize] += 1;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxCount {
    /// Smallest `A` attaining the maximum.
    pub a: u64,
    pub count: u64,
    pub range: u64,
}

impl MaxCount {
    /// `range^eps` reference curve.
    pub fn reference(&self, eps: f64) -> f64 {
        (self.range as f64).powf(eps)
    }
}

/// `max r_2(A)` over `0 <= A <= 4N^2`.
pub fn max_circle_count(n: u64) -> MaxCount {
    let range = 4 * n * n;
    let table = r2_table(range);
    let (a, &count) = table
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(&x.0)))
        .expect("nonempty range");
    MaxCount {
        a: a as u64,
        count,
        range,
    }
}

/// Length of `{ xi : ||xi|^2 - s| <= 1/T, |xi| <= 2N }` on the line.
pub fn shell_length(s: f64, horizon: f64, cutoff: f64) -> f64 {
    let hi = (s + 1.0 / horizon).min(4.0 * cutoff * cutoff);
    let lo = (s - 1.0 / horizon).max(0.0);
    if hi <= 0.0 || hi <= lo {
        return 0.0;
    }
    2.0 * (hi.sqrt() - lo.sqrt())
}

/// `|X_A|` with `X_A = { xi_1 : ||xi_1|^2 - A - C| <= 1/T, |xi_1| <= 2N }`.
pub fn x_measure(a: f64, c: f64, horizon: f64, cutoff: f64) -> f64 {
    shell_length(a + c, horizon, cutoff)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureSum {
    pub c: f64,
    pub horizon: f64,
    pub cutoff: f64,
    pub sum: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// `sum_{0 <= A <= 4N^2} |X_A|` against `T^{-1/2} + N/T`.
pub fn measure_sum(c: f64, horizon: f64, cutoff: f64) -> MeasureSum {
    let top = (4.0 * cutoff * cutoff).floor() as u64;
    let sum: f64 = (0..=top).map(|a| x_measure(a as f64, c, horizon, cutoff)).sum();
    let bound = horizon.powf(-0.5) + cutoff / horizon;
    MeasureSum {
        c,
        horizon,
        cutoff,
        sum,
        bound,
        ratio: sum / bound,
    }
}

/// Worst `measure_sum` over `C in [-4N^2, 4N^2]` in steps of `N`.
pub fn worst_measure_sum(horizon: f64, cutoff: f64) -> MeasureSum {
    let k = (4.0 * cutoff).floor() as i64;
    (-k..=k)
        .map(|j| measure_sum(j as f64 * cutoff, horizon, cutoff))
        .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .expect("nonempty scan")
}

/// Measure of the shell `||xi|^2 - C| <= 1/T` on `R x Z^2`, fibred over
/// `|k|^2 = A`: `sum_A r_2(A) |{ xi_1 : |xi_1^2 - (C - A)| <= 1/T }|`.
pub fn annulus_measure(c: f64, horizon: f64, cutoff: f64) -> f64 {
    let top = (4.0 * cutoff * cutoff).floor() as u64;
    let table = r2_table(top);
    table
        .iter()
        .enumerate()
        .filter(|(_, &r)| r > 0)
        .map(|(a, &r)| r as f64 * shell_length(c - a as f64, horizon, cutoff))
        .sum()
}

/// `T^{-1/2} N^{eps} + T^{-1} N^{1 + eps}`, the reference for the annulus.
pub fn annulus_reference(horizon: f64, cutoff: f64, eps: f64) -> f64 {
    horizon.powf(-0.5) * cutoff.powf(eps) + cutoff.powf(1.0 + eps) / horizon
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        assert_eq!(circle_count(0), 1);
        assert_eq!(circle_count(25), 12);
        assert_eq!(circle_count(3), 0);
        assert_eq!(circle_count(65), 16);
        assert_eq!(r2_loop(25), 12);
        assert_eq!(r2_loop(0), 1);
        let t = r2_table(200);
        for a in 0..=200u64 {
            assert_eq!(t[a as usize], r2_loop(a));
            assert_eq!(r2_divisor(a), r2_loop(a), "A = {a}");
            if a % 4 == 3 {
                assert_eq!(t[a as usize], 0);
            }
        }
    }

    #[test]
    fn max_counts() {
        let m8 = max_circle_count(8);
        assert_eq!((m8.a, m8.count), (65, 16));
        let mut prev = 0;
        for n in [1, 2, 4, 8, 16, 32] {
            let m = max_circle_count(n);
            assert!(m.count >= prev);
            prev = m.count;
        }
    }

    #[test]
    fn x_measure_closed_forms() {
        let v = x_measure(1.0, 0.0, 4.0, 8.0);
        assert!((v - 2.0 * (1.25f64.sqrt() - 0.75f64.sqrt())).abs() < 1e-15);
        assert!((v - 0.504017).abs() < 1e-6);
        assert_eq!(x_measure(0.0, -1.0, 4.0, 8.0), 0.0);
        assert!((x_measure(0.0, 0.0, 1.0, 8.0) - 2.0).abs() < 1e-15);
        // against a midpoint rule on |xi| <= 2N
        for &(a, c, t) in &[(3.0, 1.5, 2.0), (10.0, -4.0, 8.0), (250.0, 5.0, 1.0)] {
            let n = 8.0;
            let cells = 4_000_000;
            let h = 4.0 * n / cells as f64;
            let q = (0..cells)
                .filter(|&i| {
                    let x = -2.0 * n + (i as f64 + 0.5) * h;
                    (x * x - a - c).abs() <= 1.0 / t
                })
                .count() as f64
                * h;
            assert!((q - x_measure(a, c, t, n)).abs() < 1e-5, "{q}");
        }
    }

    #[test]
    fn measure_sums() {
        let m = measure_sum(0.0, 1.0, 16.0);
        assert!(m.sum <= 10.0 * 17.0);
        assert!(measure_sum(0.0, 1e12, 8.0).sum < 1e-4);
        assert!(worst_measure_sum(4.0, 8.0).ratio >= m.ratio.min(measure_sum(0.0, 4.0, 8.0).ratio));
    }

    #[test]
    fn annulus() {
        assert!((annulus_measure(0.0, 1.0, 8.0) - 2.0).abs() < 1e-12);
        assert_eq!(annulus_measure(-8.0 * 64.0, 1.0, 8.0), 0.0);
        // independent fibre-wise grid count over k in Z^2
        let (c, t, n) = (37.3, 2.0, 8.0);
        let mut grid = 0.0;
        let cells = 40_000;
        let h = 4.0 * n / cells as f64;
        for k1 in -16i64..=16 {
            for k2 in -16i64..=16 {
                let a = (k1 * k1 + k2 * k2) as f64;
                if a > 4.0 * n * n {
                    continue;
                }
                let hits = (0..cells)
                    .filter(|&i| {
                        let x = -2.0 * n + (i as f64 + 0.5) * h;
                        (x * x + a - c).abs() <= 1.0 / t
                    })
                    .count();
                grid += hits as f64 * h;
            }
        }
        let exact = annulus_measure(c, t, n);
        assert!((grid - exact).abs() < 0.05 * exact, "{grid} vs {exact}");
    }
}
