use super::*;
use crate::field::Grid2D;
use crate::semigroup::{damped_heat, heat, heat_kernel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn gaussian(grid: Grid2D, mass: f64, s: f64) -> ScalarField {
    ScalarField::from_fn(grid, |x, y| mass * heat_kernel(s, x, y))
}

fn random_field(grid: Grid2D, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ScalarField::new(grid, v).unwrap()
}

#[test]
fn lp_of_constant() {
    let l = 3.0;
    let grid = Grid2D::new(16, l).unwrap();
    let f = ScalarField::constant(grid, -2.0);
    for &p in &[1.0, 2.0, 3.5] {
        assert!((lp_norm(&f, p) - 2.0 * l.powf(2.0 / p)).abs() < 1e-12);
    }
    assert_eq!(lp_norm(&f, f64::INFINITY), 2.0);
}

#[test]
fn lp_of_gaussian() {
    let grid = Grid2D::new(128, 32.0).unwrap();
    let (m, s) = (0.7, 0.5);
    let g = gaussian(grid, m, s);
    assert!((lp_norm(&g, 1.0) - m).abs() < 1e-10);
    assert!((lp_norm(&g, f64::INFINITY) - m / (4.0 * PI * s)).abs() < 1e-12);
}

#[test]
fn l2_matches_parseval() {
    let grid = Grid2D::new(32, 5.0).unwrap();
    let f = random_field(grid, 3);
    let a = lp_norm(&f, 2.0).powi(2);
    let b = f.to_spectral().parseval_l2_squared();
    assert!((a - b).abs() < 1e-10 * a);
}

#[test]
fn hs_norm_identities() {
    let grid = Grid2D::new(32, 2.0 * PI).unwrap();
    let f = random_field(grid, 8);
    assert!((hs_norm(&f, 0.0) - lp_norm(&f, 2.0)).abs() < 1e-10 * lp_norm(&f, 2.0));
    // cos(k.x) = half of two unit modes
    let (a, k1, k2) = (1.7, 3.0, -2.0);
    let c = ScalarField::from_fn(grid, |x, y| a * (k1 * x + k2 * y).cos());
    for &s in &[-1.0, 0.5, 1.0, 2.0] {
        let want = (1.0 + k1 * k1 + k2 * k2).powf(0.5 * s) * a * grid.l() / 2f64.sqrt();
        assert!((hs_norm(&c, s) - want).abs() < 1e-10 * want);
    }
    let (g1, g2) = gradient(&f);
    let h1 = hs_norm(&f, 1.0).powi(2);
    let split = lp_norm(&f, 2.0).powi(2) + lp_norm(&g1, 2.0).powi(2) + lp_norm(&g2, 2.0).powi(2);
    // the gradient drops the unpaired Nyquist modes of a white-noise field
    let smooth = crate::semigroup::heat(0.05, &f).unwrap();
    let (s1, s2) = gradient(&smooth);
    let h1s = hs_norm(&smooth, 1.0).powi(2);
    let splits =
        lp_norm(&smooth, 2.0).powi(2) + lp_norm(&s1, 2.0).powi(2) + lp_norm(&s2, 2.0).powi(2);
    assert!((h1s - splits).abs() < 1e-10 * h1s);
    assert!(h1 >= split);
}

#[test]
fn sigma_values() {
    assert_eq!(sigma(0.0), 0.0);
    assert!((sigma(1.0) - 0.5f64.sqrt()).abs() < 1e-15);
    assert!((sigma(99.0) - 0.99499).abs() < 1e-5);
    let mut prev = 0.0;
    for j in 1..200 {
        let s = sigma(j as f64 * 0.37);
        assert!(s > prev && s < 1.0);
        prev = s;
    }
}

#[test]
fn besov_of_zero_and_preconditions() {
    let grid = Grid2D::new(32, 8.0).unwrap();
    let probe = TimeGrid::geometric(1e-4, 1e3, 40).unwrap();
    let z = besov_norm(&ScalarField::zeros(grid), -2.0, f64::INFINITY, &probe).unwrap();
    assert_eq!(z.value, 0.0);
    assert!(!z.at_boundary);
    let f = gaussian(grid, 1.0, 0.5);
    assert!(besov_norm(&f, 0.0, 1.0, &probe).is_err());
    let short = TimeGrid::geometric(1e-2, 1e2, 40).unwrap();
    assert!(besov_norm(&f, -1.0, 1.0, &short).is_err());
}

#[test]
fn besov_of_gaussian() {
    let s0 = 0.5;
    let m = 1.3;
    let grid = Grid2D::new(128, 64.0).unwrap();
    let probe = TimeGrid::geometric(100.0 * s0 * 1e-6, 100.0 * s0, 61).unwrap();
    let b = besov_norm(&gaussian(grid, m, s0), -2.0, f64::INFINITY, &probe).unwrap();
    let expect = m / (4.0 * PI) * 100.0 / 101.0;
    assert!(
        (b.value - expect).abs() / expect < 0.02,
        "{} vs {expect}",
        b.value
    );
    // t M / (4 pi (t + s0)) keeps growing, so the probe cannot resolve the sup
    assert!(b.at_boundary);
}

#[test]
fn thm1_norms_of_free_evolution() {
    let grid = Grid2D::new(64, 24.0).unwrap();
    let tg = TimeGrid::geometric(1e-3, 10.0, 32).unwrap();
    let z = Trajectory::zeros(grid, &tg, true);
    let r = xy_norms_thm1(&z, &z).unwrap();
    assert!(r.entries.values().all(|e| e.value == 0.0));

    let m = 0.01;
    let u0 = gaussian(grid, m, 0.5);
    let u = Trajectory::from_fn(grid, &tg, true, |t| heat(t, &u0).unwrap()).unwrap();
    let r = xy_norms_thm1(&u, &z).unwrap();
    assert!((r.get("u_l1_sup") - m).abs() < 1e-12 * m);
    assert!(r.get("X") <= 2.0 * lp_norm(&u0, 1.0));
    assert!(r.all_finite_nonnegative());
}

#[test]
fn thm2_l2t_integral_of_single_mode() {
    let grid = Grid2D::new(32, 2.0 * PI).unwrap();
    let tg = TimeGrid::geometric(1e-3, 10.0, 64).unwrap();
    let k2: f64 = 2.0;
    let u0 = ScalarField::from_fn(grid, |x, y| 0.3 * (x + y).cos());
    let u = Trajectory::from_fn(grid, &tg, true, |t| heat(t, &u0).unwrap()).unwrap();
    let z = Trajectory::zeros(grid, &tg, true);
    let r = xy_norms_thm2(&u, &z).unwrap();
    let t_end = tg.t_max();
    let exact = (lp_norm(&u0, 2.0).powi(2) * (1.0 - (-2.0 * t_end * k2).exp()) / 2.0).sqrt();
    let got = r.get("u_grad_l2t_l2");
    assert!((got - exact).abs() / exact < 0.005, "{got} vs {exact}");
    assert!(r.entry("l2t_dropped_segment_u").is_none());
    let rz = xy_norms_thm2(&z, &z).unwrap();
    assert!(rz.entries.values().all(|e| e.value == 0.0));
}

#[test]
fn thm2_sigma_term_bounded_by_h1_datum() {
    let grid = Grid2D::new(64, 24.0).unwrap();
    let tg = TimeGrid::geometric(1e-3, 10.0, 48).unwrap();
    let w0 = ScalarField::from_fn(grid, |x, y| 0.2 * (-(x * x + y * y) / 2.0).exp());
    let w = Trajectory::from_fn(grid, &tg, true, |t| damped_heat(t, &w0).unwrap()).unwrap();
    let r = xy_norms_thm2(&w, &w).unwrap();
    let sig = r.get("w_sigma_grad_linf");
    assert!(sig > 0.0 && sig <= hs_norm(&w0, 1.0));
}

#[test]
fn thm2_reports_dropped_segment_without_datum() {
    let grid = Grid2D::new(16, 4.0).unwrap();
    let tg = TimeGrid::geometric(1e-2, 1.0, 8).unwrap();
    let u0 = ScalarField::from_fn(grid, |x, _| (PI * x / 2.0).sin());
    let u = Trajectory::from_fn(grid, &tg, false, |t| heat(t, &u0).unwrap()).unwrap();
    let r = xy_norms_thm2(&u, &u).unwrap();
    assert!(r.get("l2t_dropped_segment_u") > 0.0);
}

#[test]
fn norm_reports_agree_under_spatial_refinement() {
    let tg = TimeGrid::geometric(1e-3, 10.0, 24).unwrap();
    let run = |n: usize| {
        let grid = Grid2D::new(n, 24.0).unwrap();
        let u0 = gaussian(grid, 0.05, 0.5);
        let w0 = ScalarField::from_fn(grid, |x, y| 0.1 * (-(x * x + y * y) / 3.0).exp());
        let u = Trajectory::from_fn(grid, &tg, true, |t| heat(t, &u0).unwrap()).unwrap();
        let w = Trajectory::from_fn(grid, &tg, true, |t| damped_heat(t, &w0).unwrap()).unwrap();
        (
            xy_norms_thm1(&u, &w).unwrap(),
            xy_norms_thm2(&u, &w).unwrap(),
        )
    };
    let (a1, a2) = run(64);
    let (b1, b2) = run(128);
    for (a, b) in [(&a1, &b1), (&a2, &b2)] {
        for (name, e) in &a.entries {
            let v = b.get(name);
            assert!(
                (e.value - v).abs() <= 0.01 * v.abs().max(1e-300),
                "{name}: {} vs {v}",
                e.value
            );
        }
    }
}

#[test]
fn norm_report_json_shape() {
    let mut r = NormReport::default();
    r.insert("b", 2.0, "l1_linf", Some(0.5));
    r.insert("a", 1.0, "h1b_h1", None);
    let s = serde_json::to_string(&r).unwrap();
    assert_eq!(
        s,
        r#"{"a":{"value":1.0,"setting":"h1b_h1"},"b":{"value":2.0,"setting":"l1_linf","argmax_time":0.5}}"#
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norms_homogeneous_and_subadditive(seed in 0u64..10_000, alpha in -4.0f64..4.0) {
        let grid = Grid2D::new(16, 3.0).unwrap();
        let f = random_field(grid, seed);
        let g = random_field(grid, seed ^ 0xabc);
        let sum = f.add(&g).unwrap();
        for &p in &[1.0, 2.0, 3.0, f64::INFINITY] {
            let nf = lp_norm(&f, p);
            prop_assert!((lp_norm(&f.scale(alpha), p) - alpha.abs() * nf).abs() <= 1e-12 * (1.0 + nf));
            prop_assert!(lp_norm(&sum, p) <= nf + lp_norm(&g, p) + 1e-12);
        }
        for &s in &[-1.0, 0.0, 1.0] {
            let nf = hs_norm(&f, s);
            prop_assert!((hs_norm(&f.scale(alpha), s) - alpha.abs() * nf).abs() <= 1e-12 * (1.0 + nf));
            prop_assert!(hs_norm(&sum, s) <= nf + hs_norm(&g, s) + 1e-12);
        }
    }

    #[test]
    fn hs_norm_monotone_in_s(seed in 0u64..10_000, s1 in -2.0f64..2.0, ds in 0.0f64..2.0) {
        let grid = Grid2D::new(16, 3.0).unwrap();
        let f = random_field(grid, seed);
        prop_assert!(hs_norm(&f, s1) <= hs_norm(&f, s1 + ds) * (1.0 + 1e-14));
    }
}
