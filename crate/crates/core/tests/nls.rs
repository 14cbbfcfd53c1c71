use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wgl_core::grid::{build_grid, Grid, WaveguideSpec};
use wgl_core::nls::*;
use wgl_core::theory::{omega, ratio_to_f64};

fn small_grid() -> Arc<Grid> {
    let spec = WaveguideSpec::new(1, 2, 2.0, &[24, 12, 12]).unwrap();
    Arc::new(build_grid(&spec, None).unwrap())
}

#[test]
fn tiny_data_does_not_grow() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u0 = nls_datum(small_grid(), 4.0, 1e-6, &mut rng).unwrap();
    let (rec, series) = run_trajectory(&u0, 4.0, 2.0, 20.0, 1.0 / 64.0, 4.0, None, NlsOptions::default()).unwrap();
    assert_eq!(series.len(), 21);
    assert!(rec.exponent.abs() <= 0.05, "{rec:?}");
    assert!(rec.max_hs >= rec.a * (1.0 - 1e-6));
}

#[test]
fn small_energy_quintic_stays_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let g = small_grid();
    let unit = nls_datum(g.clone(), 4.0, 1.0, &mut rng).unwrap();
    let e1 = energy(&unit.inverse(), 5.0, 1.0);
    let u0 = unit.scale(Complex64::new((0.009 / e1).sqrt(), 0.0));
    assert!(energy(&u0.inverse(), 5.0, 1.0) <= 0.01);
    let om = ratio_to_f64(omega(2.into(), 5.into()).unwrap());
    let (rec, series) = run_trajectory(&u0, 5.0, 2.0, 50.0, 1.0 / 64.0, 4.0, Some(om), NlsOptions::default()).unwrap();
    assert!(rec.max_hs <= 2.0 * rec.a, "{rec:?}");
    assert!(series.iter().all(|r| r.mass_rel_drift <= 1e-10));
    assert_eq!(rec.omega, Some(300.0));
}

#[test]
fn strang_order_two() {
    let spec = WaveguideSpec::new(1, 2, 2.0, &[32, 16, 16]).unwrap();
    let g = Arc::new(build_grid(&spec, None).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u0 = nls_datum(g, 4.0, 1.0, &mut rng).unwrap();
    let drift = |k: usize| {
        let mut st = NlsState::new(&u0, 4.0, 1.0 / k as f64, 4.0).unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..16 {
            st.advance(k / 16).unwrap();
            worst = worst.max(st.energy_drift());
        }
        worst
    };
    let ratio = drift(512) / drift(1024);
    assert!((3.2..=4.8).contains(&ratio), "{ratio}");
}

#[test]
fn padding_is_enforced() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u0 = nls_datum(small_grid(), 4.0, 1.0, &mut rng).unwrap();
    // each axis resolves 6 = 1.5 * 4 but not 2 * 4
    assert!(NlsState::new(&u0, 4.0, 1.0 / 64.0, 4.0).is_ok());
    let strict = NlsOptions { padding: 2.0, ..Default::default() };
    assert!(NlsState::with_options(&u0, 4.0, 1.0 / 64.0, 4.0, strict).is_err());
}
