use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Grid2D, ScalarField};
use crate::error::{KsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X1,
    X2,
}

/// Symbol `m(xi)` of a Fourier multiplier `m(D)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MultiplierSpec {
    /// `exp(-t |xi|^2)`
    Heat(f64),
    /// `exp(-t (1 + |xi|^2))`
    DampedHeat(f64),
    /// `i xi_axis`
    GradComponent(Axis),
    /// `-|xi|^2`
    Laplacian,
    /// `|xi|^alpha`, alpha > 0, with `|0|^alpha = 0`
    FractionalLaplacian(f64),
    /// Product of the listed symbols.
    Composite(Vec<MultiplierSpec>),
}

impl MultiplierSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Heat(t) | Self::DampedHeat(t) => {
                if !t.is_finite() || *t < 0.0 {
                    return Err(KsError::InvalidMultiplier(format!(
                        "semigroup time must be finite and >= 0, got {t}"
                    )));
                }
            }
            Self::FractionalLaplacian(alpha) => {
                if !alpha.is_finite() || *alpha <= 0.0 {
                    return Err(KsError::InvalidMultiplier(format!(
                        "fractional power must be > 0 (|0|^alpha undefined otherwise), got {alpha}"
                    )));
                }
            }
            Self::Composite(parts) => {
                for p in parts {
                    p.validate()?;
                }
            }
            Self::GradComponent(_) | Self::Laplacian => {}
        }
        Ok(())
    }

    pub fn eval(&self, xi1: f64, xi2: f64) -> Complex64 {
        let r2 = xi1 * xi1 + xi2 * xi2;
        match self {
            Self::Heat(t) => Complex64::new((-t * r2).exp(), 0.0),
            Self::DampedHeat(t) => Complex64::new((-t * (1.0 + r2)).exp(), 0.0),
            Self::GradComponent(Axis::X1) => Complex64::new(0.0, xi1),
            Self::GradComponent(Axis::X2) => Complex64::new(0.0, xi2),
            Self::Laplacian => Complex64::new(-r2, 0.0),
            Self::FractionalLaplacian(alpha) => {
                if r2 == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(r2.powf(0.5 * alpha), 0.0)
                }
            }
            Self::Composite(parts) => parts
                .iter()
                .fold(Complex64::new(1.0, 0.0), |acc, p| acc * p.eval(xi1, xi2)),
        }
    }

    /// Symbol sampled on every grid wavenumber, in storage order.
    pub fn symbol_on(&self, grid: &Grid2D) -> Result<Vec<Complex64>> {
        self.validate()?;
        let k = grid.wavenumbers();
        let mut out = Vec::with_capacity(grid.len());
        for &k1 in &k {
            for &k2 in &k {
                let m = self.eval(k1, k2);
                if !m.re.is_finite() || !m.im.is_finite() {
                    return Err(KsError::InvalidMultiplier(format!(
                        "{self:?} is not finite at xi = ({k1}, {k2})"
                    )));
                }
                out.push(m);
            }
        }
        Ok(out)
    }

    /// `m(D) f = F^{-1}[m(xi) f^(xi)]`, projected back to a real field.
    pub fn apply(&self, f: &ScalarField) -> Result<ScalarField> {
        let symbol = self.symbol_on(f.grid())?;
        let mut s = f.to_spectral();
        for (c, m) in s.coeffs_mut().iter_mut().zip(&symbol) {
            *c *= m;
        }
        Ok(s.to_real())
    }
}

/// Applies `m` to `f` (see [`MultiplierSpec::apply`]).
pub fn multiplier_apply(m: &MultiplierSpec, f: &ScalarField) -> Result<ScalarField> {
    m.apply(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid2D {
        Grid2D::new(32, 2.0 * PI).unwrap()
    }

    fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn heat_at_zero_is_identity() {
        let f = ScalarField::from_fn(grid(), |x, y| (x).sin() * (2.0 * y).cos() + 0.3);
        let g = MultiplierSpec::Heat(0.0).apply(&f).unwrap();
        assert!(max_diff(&f, &g) < 1e-14);
    }

    #[test]
    fn heat_damps_single_mode() {
        let t = 0.37;
        let f = ScalarField::from_fn(grid(), |x, y| (3.0 * x + 2.0 * y).cos());
        let g = MultiplierSpec::Heat(t).apply(&f).unwrap();
        let expect = f.scale((-t * 13.0_f64).exp());
        assert!(max_diff(&g, &expect) < 1e-14);
    }

    #[test]
    fn fractional_laplacian_order_one_is_abs_xi() {
        let f = ScalarField::from_fn(grid(), |x, y| (3.0 * x + 4.0 * y).cos());
        let g = MultiplierSpec::FractionalLaplacian(1.0).apply(&f).unwrap();
        assert!(max_diff(&g, &f.scale(5.0)) < 1e-12);
    }

    #[test]
    fn rejects_non_positive_fractional_power() {
        let f = ScalarField::zeros(grid());
        assert!(MultiplierSpec::FractionalLaplacian(-0.5).apply(&f).is_err());
        assert!(MultiplierSpec::FractionalLaplacian(0.0).apply(&f).is_err());
        assert!(MultiplierSpec::Heat(-1.0).apply(&f).is_err());
        let nested = MultiplierSpec::Composite(vec![
            MultiplierSpec::Heat(0.1),
            MultiplierSpec::FractionalLaplacian(-1.0),
        ]);
        assert!(nested.apply(&f).is_err());
    }

    #[test]
    fn semigroup_modulus_bounded() {
        for &(x, y) in &[(0.0, 0.0), (1.0, -3.0), (40.0, 7.0)] {
            assert!(MultiplierSpec::Heat(0.2).eval(x, y).norm() <= 1.0);
            assert!(MultiplierSpec::DampedHeat(0.2).eval(x, y).norm() <= 1.0);
        }
    }

    #[test]
    fn composite_multiplies_symbols() {
        let m = MultiplierSpec::Composite(vec![
            MultiplierSpec::GradComponent(Axis::X1),
            MultiplierSpec::GradComponent(Axis::X1),
        ]);
        let f = ScalarField::from_fn(grid(), |x, y| (2.0 * x).sin() * y.cos());
        let a = m.apply(&f).unwrap();
        let b = MultiplierSpec::Laplacian
            .apply(&ScalarField::from_fn(grid(), |x, _| (2.0 * x).sin()))
            .unwrap();
        // d^2/dx1^2 of sin(2x1)cos(x2) = -4 sin(2x1) cos(x2)
        let expect = ScalarField::from_fn(grid(), |x, y| -4.0 * (2.0 * x).sin() * y.cos());
        assert!(max_diff(&a, &expect) < 1e-11);
        assert!(b.values().iter().all(|v| v.is_finite()));
    }
}
