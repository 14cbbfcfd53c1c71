//! Smooth cutoffs: the bump `chi`, the box-scaled variant used for the
//! extremizer supports, and the `D_N` multiplier profile.


#[inline]
fn transition(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// `chi(x) = f(2-|x|) / (f(2-|x|) + f(|x|-1))` with `f(t) = exp(-1/t)` for `t > 0`.
///
/// Exactly 1 on `[-1, 1]`, exactly 0 outside `(-2, 2)`, smooth in between.
pub fn chi(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 {
        return 1.0;
    }
    if a >= 2.0 {
        return 0.0;
    }
    let up = transition(2.0 - a);
    let down = transition(a - 1.0);
    up / (up + down)
}

/// Quintic smoothstep on `[0, 1]`, clamped outside.
pub fn smoothstep5(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (x * (6.0 * x - 15.0) + 10.0)
}

/// Profile of the `D_N` multiplier: 1 for `|y| <= 1`, `|y|^(s-1)` for `|y| >= 2`,
/// and `exp(theta(|y|-1) (s-1) ln|y|)` in between.
pub fn dn_profile(y: f64, s: f64) -> f64 {
    let a = y.abs();
    if a <= 1.0 {
        return 1.0;
    }
    let blend = if a >= 2.0 { 1.0 } else { smoothstep5(a - 1.0) };
    (blend * (s - 1.0) * a.ln()).exp()
}

/// `chi` rescaled to an interval: `chi((x - center) / half_width)`.
///
/// Equal to 1 on `[center - w, center + w]` and supported in
/// `[center - 2w, center + 2w]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxCutoff {
    pub center: f64,
    pub half_width: f64,
}

impl BoxCutoff {
    /// Cutoff that is identically 1 on `[a, b]`.
    pub fn on_interval(a: f64, b: f64) -> Self {
        Self {
            center: 0.5 * (a + b),
            half_width: 0.5 * (b - a),
        }
    }

    pub fn centered(half_width: f64) -> Self {
        Self {
            center: 0.0,
            half_width,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        chi((x - self.center) / self.half_width)
    }

    /// Largest `|x|` where the cutoff can be nonzero.
    pub fn reach(&self) -> f64 {
        self.center.abs() + 2.0 * self.half_width
    }

    /// Integer points with nonzero weight.
    pub fn integer_support(&self) -> core::ops::RangeInclusive<i64> {
        let lo = (self.center - 2.0 * self.half_width).floor() as i64;
        let hi = (self.center + 2.0 * self.half_width).ceil() as i64;
        lo..=hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        // trapezoid; the integrands here are smooth with flat ends
        let h = (b - a) / n as f64;
        let mut acc = 0.5 * (f(a) + f(b));
        for i in 1..n {
            acc += f(a + i as f64 * h);
        }
        acc * h
    }

    #[test]
    fn chi_plateau_and_support() {
        for &x in &[0.0, 0.3, -0.99, 1.0, -1.0] {
            assert_eq!(chi(x), 1.0);
        }
        for &x in &[2.0, -2.0, 2.5, -17.0] {
            assert_eq!(chi(x), 0.0);
        }
        assert!((chi(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=1000 {
            let v = chi(1.0 + i as f64 / 1000.0);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn chi_integrals() {
        // chi(x) + chi(3 - x) = 1 on [1, 2] makes the integral exactly 3
        let i1 = integrate(chi, -2.0, 2.0, 20_000);
        assert!((i1 - 3.0).abs() < 1e-10);
        // oracle: mpmath quad of chi^2 over [-2, 2]
        let i2 = integrate(|x| chi(x) * chi(x), -2.0, 2.0, 20_000);
        assert!((i2 - 2.811_410_505_546_703).abs() < 1e-9, "{i2}");
    }

    #[test]
    fn dn_profile_ends() {
        assert_eq!(dn_profile(0.5, 3.0), 1.0);
        assert!((dn_profile(4.0, 3.0) - 16.0).abs() < 1e-12);
        assert!((dn_profile(-2.0, 2.5) - 2f64.powf(1.5)).abs() < 1e-12);
        let mut prev = 1.0;
        for i in 0..=400 {
            let v = dn_profile(1.0 + i as f64 / 200.0, 2.0);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        for i in 0..50 {
            assert_eq!(dn_profile(i as f64 * 0.3, 1.0), 1.0);
        }
    }

    #[test]
    fn box_cutoff() {
        let b = BoxCutoff::on_interval(0.0, 4.0);
        assert_eq!(b.eval(0.0), 1.0);
        assert_eq!(b.eval(4.0), 1.0);
        assert_eq!(b.eval(6.0), 0.0);
        assert_eq!(b.eval(-2.0), 0.0);
        assert!(b.eval(5.0) > 0.0);
        assert_eq!(b.reach(), 6.0);
        assert_eq!(b.integer_support(), -2..=6);
    }
}
