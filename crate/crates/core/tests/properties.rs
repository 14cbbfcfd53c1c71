use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wgl_core::counting::{r2_divisor, r2_loop};
use wgl_core::grid::{build_grid, chirp, Grid, WaveguideSpec};
use wgl_core::field::SpectralField;
use wgl_core::nls::nonlinear_phase;
use wgl_core::theory::{continuity, Source, Q};

fn grid(m: usize, dims: &[usize], l: f64) -> Arc<Grid> {
    Arc::new(build_grid(&WaveguideSpec::new(m, dims.len() - m, l, dims).unwrap(), None).unwrap())
}

fn random_field(g: Arc<Grid>, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpectralField::from_fn(g, |_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn round_trip_and_parseval(seed in any::<u64>(), which in 0usize..3) {
        let g = match which {
            0 => grid(1, &[32, 8, 8], 4.0),
            1 => grid(2, &[16, 16, 8], 2.0),
            _ => grid(1, &[24, 12, 6], 3.0),
        };
        let u = random_field(g, seed);
        let phys = u.inverse();
        prop_assert!(rel(phys.l2_norm(), u.l2_norm()) < 1e-12);
        let back = phys.forward();
        let err = back.axpy(Complex64::new(-1.0, 0.0), &u).unwrap().l2_norm();
        prop_assert!(err < 1e-12 * u.l2_norm());
    }

    #[test]
    fn propagator_is_a_unitary_group(seed in any::<u64>(), s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let u = random_field(grid(1, &[32, 8, 8], 4.0), seed);
        let a = u.propagate(s).propagate(t);
        let b = u.propagate(s + t);
        prop_assert!(rel(a.l2_norm(), u.l2_norm()) < 1e-12);
        let err = a.axpy(Complex64::new(-1.0, 0.0), &b).unwrap().l2_norm();
        prop_assert!(err < 1e-9 * u.l2_norm());
        let ip = u.propagate(t).inner(&u.propagate(t)).unwrap();
        prop_assert!(rel(ip.re, u.l2_norm().powi(2)) < 1e-12);
    }

    #[test]
    fn chirp_is_periodic(x in -1e6f64..1e6, k in -1000i64..1000) {
        let a = chirp(x);
        let b = chirp(x + k as f64);
        prop_assert!((a.norm() - 1.0).abs() < 1e-14);
        prop_assert!((a - b).norm() < 1e-9 * (1.0 + x.abs() * 1e-6));
    }

    #[test]
    fn circle_count_oracles_agree(a in 0u64..2_000_000) {
        prop_assert_eq!(r2_divisor(a), r2_loop(a));
        prop_assert_eq!(r2_divisor(a) % 4, if a == 0 { 1 } else { 0 });
    }

    #[test]
    fn phase_step_is_an_isometry(seed in any::<u64>(), mu in 3.0f64..5.0, tau in -1.0f64..1.0) {
        let u = random_field(grid(1, &[16, 8, 8], 2.0), seed).inverse();
        let mut v = u.samples().to_vec();
        nonlinear_phase(&mut v, mu, 1.0, tau);
        for (a, b) in v.iter().zip(u.samples()) {
            prop_assert!((a.norm() - b.norm()).abs() <= 1e-14);
        }
    }

    #[test]
    fn branches_meet_at_thresholds(m in 1usize..3, n in 1usize..3, k in 0usize..40) {
        prop_assume!(m + n <= 3);
        // p = 10/3 + (k+1)/15 sweeps (10/3, 6]
        let p = Q::new(10, 3) + Q::new(k as i64 + 1, 15);
        for source in [Source::C0, Source::C1, Source::C2, Source::C3] {
            if let Ok(checks) = continuity(source, m, n, p) {
                for c in checks {
                    prop_assert!(c.agree, "{:?}", c);
                }
            }
        }
    }
}
