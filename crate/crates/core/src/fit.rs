//! Log-log least squares for scaling exponents in `T` and `N`.

use alloc::vec::Vec;


use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Distinct values an axis needs before it is fitted.
    pub min_distinct: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { min_distinct: 4 }
    }
}

/// `ln y = intercept + slope ln x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

/// `ln v = intercept + t_slope ln T + n_slope ln N`; a slope is `None` when
/// its axis was held fixed in the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub t_slope: Option<f64>,
    pub n_slope: Option<f64>,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

fn distinct(xs: &[f64]) -> usize {
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
    v.len()
}

fn check_positive(xs: &[f64]) -> Result<()> {
    if xs.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::DomainError(
            "log-log fit needs positive finite values".into(),
        ));
    }
    Ok(())
}

fn r_squared(ys: &[f64], predicted: impl Fn(usize) -> f64) -> f64 {
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = ys.iter().enumerate().map(|(i, y)| (y - predicted(i)).powi(2)).sum();
    if ss_tot <= 1e-300 {
        if ss_res <= 1e-24 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_fit(xs: &[f64], ys: &[f64], axis: &'static str, opts: FitOptions) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{} abscissae for {} values",
            xs.len(),
            ys.len()
        )));
    }
    check_positive(xs)?;
    check_positive(ys)?;
    let d = distinct(xs);
    if d < opts.min_distinct.max(2) {
        return Err(Error::InsufficientSweep {
            axis,
            distinct: d,
            needed: opts.min_distinct.max(2),
        });
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = r_squared(&ly, |i| intercept + slope * lx[i]);
    Ok(LineFit {
        slope,
        intercept,
        r2,
        points: xs.len(),
    })
}

/// Joint fit over samples `(T, N, value)`. Axes with a single value are held
/// fixed; axes that vary need `min_distinct` values.
pub fn fit_exponents(samples: &[(f64, f64, f64)], opts: FitOptions) -> Result<ExponentFit> {
    let ts: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ns: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let vs: Vec<f64> = samples.iter().map(|s| s.2).collect();
    let (dt, dn) = (distinct(&ts), distinct(&ns));
    let needed = opts.min_distinct.max(2);
    for (axis, d) in [("T", dt), ("N", dn)] {
        if d > 1 && d < needed {
            return Err(Error::InsufficientSweep {
                axis,
                distinct: d,
                needed,
            });
        }
    }
    match (dt > 1, dn > 1) {
        (false, false) => Err(Error::InsufficientSweep {
            axis: "T",
            distinct: dt,
            needed,
        }),
        (true, false) => {
            let f = loglog_fit(&ts, &vs, "T", opts)?;
            Ok(ExponentFit {
                t_slope: Some(f.slope),
                n_slope: None,
                intercept: f.intercept,
                r2: f.r2,
                points: f.points,
            })
        }
        (false, true) => {
            let f = loglog_fit(&ns, &vs, "N", opts)?;
            Ok(ExponentFit {
                t_slope: None,
                n_slope: Some(f.slope),
                intercept: f.intercept,
                r2: f.r2,
                points: f.points,
            })
        }
        (true, true) => {
            check_positive(&ts)?;
            check_positive(&ns)?;
            check_positive(&vs)?;
            bivariate(&ts, &ns, &vs)
        }
    }
}

fn bivariate(ts: &[f64], ns: &[f64], vs: &[f64]) -> Result<ExponentFit> {
    let rows: Vec<[f64; 3]> = ts
        .iter()
        .zip(ns)
        .map(|(t, n)| [1.0, t.ln(), n.ln()])
        .collect();
    let ly: Vec<f64> = vs.iter().map(|v| v.ln()).collect();
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for (r, y) in rows.iter().zip(&ly) {
        for i in 0..3 {
            b[i] += r[i] * y;
            for j in 0..3 {
                a[i][j] += r[i] * r[j];
            }
        }
    }
    let x = solve3(a, b).ok_or(Error::DegenerateDesign)?;
    let r2 = r_squared(&ly, |i| rows[i].iter().zip(&x).map(|(r, c)| r * c).sum());
    Ok(ExponentFit {
        t_slope: Some(x[1]),
        n_slope: Some(x[2]),
        intercept: x[0],
        r2,
        points: ts.len(),
    })
}

/// Gaussian elimination with partial pivoting; `None` for a (near) singular system.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-10 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn grid_samples(f: impl Fn(f64, f64) -> f64) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for &t in &[1.0, 4.0, 16.0, 64.0] {
            for &n in &[8.0, 16.0, 32.0, 64.0] {
                out.push((t, n, f(t, n)));
            }
        }
        out
    }

    #[test]
    fn exact_power_laws() {
        let s = grid_samples(|t, n| 3.0 * t.powf(0.125) * n.powf(0.25));
        let f = fit_exponents(&s, FitOptions::default()).unwrap();
        assert!((f.t_slope.unwrap() - 0.125).abs() < 1e-12);
        assert!((f.n_slope.unwrap() - 0.25).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        let c = fit_exponents(&grid_samples(|_, _| 2.5), FitOptions::default()).unwrap();
        assert!(c.t_slope.unwrap().abs() < 1e-12 && c.n_slope.unwrap().abs() < 1e-12);
        let ns = [8.0, 16.0, 32.0, 64.0];
        let one = loglog_fit(&ns, &ns.map(|n: f64| n.powf(2.0 / 3.0)), "N", FitOptions::default()).unwrap();
        assert!((one.slope - 2.0 / 3.0).abs() < 1e-12 && (one.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let mut s = Vec::new();
            for i in 0..7 {
                for j in 0..5 {
                    let (t, n) = (2f64.powi(i), 8.0 * 2f64.powi(j));
                    let g: f64 = StandardNormal.sample(&mut rng);
                    s.push((t, n, t.powf(0.125) * n.powf(0.25) * (1.0 + 0.05 * g)));
                }
            }
            let f = fit_exponents(&s, FitOptions::default()).unwrap();
            assert!((f.t_slope.unwrap() - 0.125).abs() < 0.03);
            assert!((f.n_slope.unwrap() - 0.25).abs() < 0.03);
        }
    }

    #[test]
    fn sweep_errors() {
        let fixed_t = vec![(4.0, 8.0, 1.0), (4.0, 16.0, 2.0), (4.0, 32.0, 3.0)];
        assert_eq!(
            fit_exponents(&fixed_t, FitOptions::default()).unwrap_err(),
            Error::InsufficientSweep {
                axis: "N",
                distinct: 3,
                needed: 4
            }
        );
        assert!(fit_exponents(&fixed_t, FitOptions { min_distinct: 3 }).is_ok());
        let all_same = vec![(4.0, 8.0, 1.0); 5];
        assert!(matches!(
            fit_exponents(&all_same, FitOptions::default()),
            Err(Error::InsufficientSweep { axis: "T", .. })
        ));
        // T = N^2 makes the two regressors collinear
        let collinear: Vec<(f64, f64, f64)> =
            [2.0f64, 4.0, 8.0, 16.0].iter().map(|&n| (n * n, n, n)).collect();
        assert_eq!(
            fit_exponents(&collinear, FitOptions::default()).unwrap_err(),
            Error::DegenerateDesign
        );
    }
}
