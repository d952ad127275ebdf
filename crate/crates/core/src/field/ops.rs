//! Differentiation and dealiased products.

use num_complex::Complex64;

use super::{Grid2D, ScalarField, SpectralField};
use crate::error::Result;

/// Modes kept by the 2/3 rule: `3 |k_i| < n` on both axes.
pub fn dealias_mask(grid: &Grid2D) -> Vec<bool> {
    let n = grid.n() as i64;
    let keep: Vec<bool> = (0..grid.n())
        .map(|i| 3 * grid.freq_index(i).abs() < n)
        .collect();
    let mut out = Vec::with_capacity(grid.len());
    for &a in &keep {
        for &b in &keep {
            out.push(a && b);
        }
    }
    out
}

/// Zeroes every mode outside the 2/3-rule band.
pub fn truncate(s: &mut SpectralField) {
    let mask = dealias_mask(s.grid());
    for (c, keep) in s.coeffs_mut().iter_mut().zip(mask) {
        if !keep {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// Dealiased product in spectral space. Both factors are truncated to the
/// 2/3 band, multiplied in real space and the result truncated again, so
/// every retained mode of the output is alias-free.
pub fn product_spectral(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    a.grid().check_same(b.grid())?;
    let mut a = a.clone();
    let mut b = b.clone();
    truncate(&mut a);
    truncate(&mut b);
    let ra = a.to_real();
    let rb = b.to_real();
    let prod: Vec<f64> = ra
        .values()
        .iter()
        .zip(rb.values())
        .map(|(x, y)| x * y)
        .collect();
    let mut out = ScalarField::from_vec_unchecked(*a.grid(), prod).to_spectral();
    truncate(&mut out);
    Ok(out)
}

pub fn pointwise_product(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    Ok(product_spectral(&f.to_spectral(), &g.to_spectral())?.to_real())
}

/// Spectral gradient `(i xi_1 F, i xi_2 F)`. The unpaired Nyquist frequency
/// of each axis is set to zero so real fields stay real.
pub fn gradient_spectral(f: &SpectralField) -> (SpectralField, SpectralField) {
    let grid = *f.grid();
    let n = grid.n();
    let k = grid.wavenumbers();
    let mut g1 = f.clone();
    let mut g2 = f.clone();
    for i1 in 0..n {
        let k1 = if grid.is_nyquist(i1) { 0.0 } else { k[i1] };
        for i2 in 0..n {
            let k2 = if grid.is_nyquist(i2) { 0.0 } else { k[i2] };
            let idx = i1 * n + i2;
            let c = f.coeffs()[idx];
            g1.coeffs_mut()[idx] = Complex64::new(-k1 * c.im, k1 * c.re);
            g2.coeffs_mut()[idx] = Complex64::new(-k2 * c.im, k2 * c.re);
        }
    }
    (g1, g2)
}

pub fn gradient(f: &ScalarField) -> (ScalarField, ScalarField) {
    let (a, b) = gradient_spectral(&f.to_spectral());
    (a.to_real(), b.to_real())
}

/// Spectral divergence `i xi_1 G_1 + i xi_2 G_2` (Nyquist zeroed as in
/// [`gradient_spectral`]). The DC mode of the output is exactly zero.
pub fn divergence_spectral(g1: &SpectralField, g2: &SpectralField) -> Result<SpectralField> {
    g1.grid().check_same(g2.grid())?;
    let grid = *g1.grid();
    let n = grid.n();
    let k = grid.wavenumbers();
    let mut out = SpectralField::zeros(grid);
    for i1 in 0..n {
        let k1 = if grid.is_nyquist(i1) { 0.0 } else { k[i1] };
        for i2 in 0..n {
            let k2 = if grid.is_nyquist(i2) { 0.0 } else { k[i2] };
            let idx = i1 * n + i2;
            let s = g1.coeffs()[idx] * k1 + g2.coeffs()[idx] * k2;
            out.coeffs_mut()[idx] = Complex64::new(-s.im, s.re);
        }
    }
    Ok(out)
}

pub fn divergence(g1: &ScalarField, g2: &ScalarField) -> Result<ScalarField> {
    Ok(divergence_spectral(&g1.to_spectral(), &g2.to_spectral())?.to_real())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::MultiplierSpec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    fn random_field(grid: Grid2D, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ScalarField::new(grid, v).unwrap()
    }

    /// Zero-padded product on a 2n grid, restricted to the modes of the
    /// n grid that survive the 2/3 rule.
    fn padded_product_oracle(f: &ScalarField, g: &ScalarField) -> SpectralField {
        let grid = *f.grid();
        let n = grid.n();
        let big = Grid2D::new(2 * n, grid.l()).unwrap();
        let embed = |s: &SpectralField| {
            let mut t = s.clone();
            truncate(&mut t);
            let mut out = SpectralField::zeros(big);
            for i1 in 0..n {
                for i2 in 0..n {
                    let j1 = (grid.freq_index(i1)).rem_euclid(2 * n as i64) as usize;
                    let j2 = (grid.freq_index(i2)).rem_euclid(2 * n as i64) as usize;
                    out.coeffs_mut()[j1 * 2 * n + j2] = t.coeff(i1, i2) * 4.0;
                }
            }
            out.to_real()
        };
        let a = embed(&f.to_spectral());
        let b = embed(&g.to_spectral());
        let prod: Vec<f64> = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| x * y)
            .collect();
        let ps = ScalarField::new(big, prod).unwrap().to_spectral();
        let mut out = SpectralField::zeros(grid);
        for i1 in 0..n {
            for i2 in 0..n {
                let j1 = (grid.freq_index(i1)).rem_euclid(2 * n as i64) as usize;
                let j2 = (grid.freq_index(i2)).rem_euclid(2 * n as i64) as usize;
                out.coeffs_mut()[i1 * n + i2] = ps.coeff(j1, j2) / 4.0;
            }
        }
        truncate(&mut out);
        out
    }

    #[test]
    fn product_matches_padded_oracle() {
        let grid = Grid2D::new(32, 3.0).unwrap();
        let f = random_field(grid, 1);
        let g = random_field(grid, 2);
        let got = product_spectral(&f.to_spectral(), &g.to_spectral()).unwrap();
        let want = padded_product_oracle(&f, &g);
        let scale = want.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
        let err = got
            .coeffs()
            .iter()
            .zip(want.coeffs())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err / scale < 1e-10, "relative error {}", err / scale);
    }

    #[test]
    fn product_identity_and_trig() {
        let grid = Grid2D::new(32, 2.0 * PI).unwrap();
        let f = ScalarField::from_fn(grid, |x, y| (2.0 * x).sin() + (x - 3.0 * y).cos());
        let one = ScalarField::constant(grid, 1.0);
        assert!(max_diff(&pointwise_product(&f, &one).unwrap(), &f) < 1e-13);
        let c = ScalarField::from_fn(grid, |x, y| (2.0 * x + y).cos());
        let sq = pointwise_product(&c, &c).unwrap();
        let expect = ScalarField::from_fn(grid, |x, y| 0.5 + 0.5 * (4.0 * x + 2.0 * y).cos());
        assert!(max_diff(&sq, &expect) < 1e-13);
    }

    #[test]
    fn gradient_of_constant_and_sine() {
        let l = 5.0;
        let grid = Grid2D::new(32, l).unwrap();
        let (a, b) = gradient(&ScalarField::constant(grid, 2.5));
        assert!(a.values().iter().chain(b.values()).all(|v| v.abs() < 1e-13));
        let w = 2.0 * PI / l;
        let f = ScalarField::from_fn(grid, |x, _| (w * x).sin());
        let (a, b) = gradient(&f);
        let expect = ScalarField::from_fn(grid, |x, _| w * (w * x).cos());
        assert!(max_diff(&a, &expect) < 1e-12);
        assert!(b.values().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn divergence_of_gradient_is_laplacian_in_spectral_space() {
        let grid = Grid2D::new(32, 4.0).unwrap();
        let mut s = random_field(grid, 5).to_spectral();
        // drop the unpaired Nyquist rows/columns, where odd symbols vanish
        let n = grid.n();
        for i1 in 0..n {
            for i2 in 0..n {
                if grid.is_nyquist(i1) || grid.is_nyquist(i2) {
                    s.coeffs_mut()[i1 * n + i2] = Complex64::new(0.0, 0.0);
                }
            }
        }
        let (g1, g2) = gradient_spectral(&s);
        let lap = divergence_spectral(&g1, &g2).unwrap();
        let sym = MultiplierSpec::Laplacian.symbol_on(&grid).unwrap();
        for ((a, c), m) in lap.coeffs().iter().zip(s.coeffs()).zip(&sym) {
            let b = c * m;
            assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn divergence_has_zero_mean(seed in 0u64..1000) {
            let grid = Grid2D::new(16, 2.0).unwrap();
            let d = divergence(&random_field(grid, seed), &random_field(grid, seed + 1)).unwrap();
            prop_assert!(d.integral().abs() < 1e-12);
        }

        #[test]
        fn product_is_symmetric_and_bilinear(seed in 0u64..1000, alpha in -3.0f64..3.0) {
            let grid = Grid2D::new(16, 2.0).unwrap();
            let f = random_field(grid, seed);
            let g = random_field(grid, seed + 7);
            let h = random_field(grid, seed + 13);
            let fg = pointwise_product(&f, &g).unwrap();
            let gf = pointwise_product(&g, &f).unwrap();
            prop_assert!(max_diff(&fg, &gf) < 1e-13);
            let lhs = pointwise_product(&f.lin_comb(alpha, &h, 1.0).unwrap(), &g).unwrap();
            let rhs = fg.lin_comb(alpha, &pointwise_product(&h, &g).unwrap(), 1.0).unwrap();
            prop_assert!(max_diff(&lhs, &rhs) < 1e-12);
        }

        #[test]
        fn round_trip_is_identity(seed in 0u64..1000) {
            let grid = Grid2D::new(32, 1.5).unwrap();
            let f = random_field(grid, seed);
            let back = f.to_spectral().to_real();
            prop_assert!(max_diff(&f, &back) < 1e-13);
        }
    }
}
