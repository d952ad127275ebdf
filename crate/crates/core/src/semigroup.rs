//! Spectral heat semigroups and closed-form heat-kernel norms.
//!
//! The semigroups act exactly in Fourier space; the real-space kernel only
//! appears in [`heat_kernel_norms`], which cross-checks sampled kernel norms
//! against their analytic values and the bounds
//! `||K_t||_p <= t^{-1+1/p}` and `||∇K_t||_p <= t^{-3/2+1/p}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{KsError, Result};
use crate::field::{gradient_spectral, Grid2D, MultiplierSpec, ScalarField};
use crate::norms::lp_norm;

fn check_time(t: f64, strict: bool) -> Result<()> {
    let ok = t.is_finite() && if strict { t > 0.0 } else { t >= 0.0 };
    if !ok {
        let need = if strict { "> 0" } else { ">= 0" };
        return Err(KsError::InvalidTime(format!("t = {t}, expected {need}")));
    }
    Ok(())
}

/// `e^{tΔ} f`.
pub fn heat(t: f64, f: &ScalarField) -> Result<ScalarField> {
    check_time(t, false)?;
    MultiplierSpec::Heat(t).apply(f)
}

/// `e^{t(Δ-1)} f`, computed as `e^{-t} * heat(t, f)`.
pub fn damped_heat(t: f64, f: &ScalarField) -> Result<ScalarField> {
    Ok(heat(t, f)?.scale((-t).exp()))
}

/// `∇ e^{tΔ} f`, t > 0.
pub fn grad_heat(t: f64, f: &ScalarField) -> Result<(ScalarField, ScalarField)> {
    check_time(t, true)?;
    let symbol = MultiplierSpec::Heat(t).symbol_on(f.grid())?;
    let mut s = f.to_spectral();
    for (c, m) in s.coeffs_mut().iter_mut().zip(&symbol) {
        *c *= m;
    }
    let (a, b) = gradient_spectral(&s);
    Ok((a.to_real(), b.to_real()))
}

/// Heat kernel `(4 pi t)^{-1} exp(-|x|^2 / 4t)`.
pub fn heat_kernel(t: f64, x1: f64, x2: f64) -> f64 {
    (-(x1 * x1 + x2 * x2) / (4.0 * t)).exp() / (4.0 * PI * t)
}

/// Exact `||K_t||_{L^p(R^2)} = p^{-1/p} (4 pi t)^{-1+1/p}`.
pub fn kernel_norm_exact(p: f64, t: f64) -> f64 {
    if p.is_infinite() {
        1.0 / (4.0 * PI * t)
    } else {
        p.powf(-1.0 / p) * (4.0 * PI * t).powf(-1.0 + 1.0 / p)
    }
}

/// Exact `|| |∇K_t| ||_{L^p(R^2)}`; for p = 1 this is `sqrt(pi) / (2 sqrt(t))`.
pub fn grad_kernel_norm_exact(p: f64, t: f64) -> f64 {
    if p.is_infinite() {
        // max of r/(2t) K_t(r), attained at r = sqrt(2t)
        return (-0.5f64).exp() / (2.0f64.sqrt() * 4.0 * PI * t.powf(1.5));
    }
    // ∫ (r/2t)^p K^p dA = 2 pi (4 pi t)^{-p} (2t)^{-p} ∫ r^{p+1} e^{-p r^2/4t} dr
    let radial = 0.5 * (4.0 * t / p).powf(0.5 * p + 1.0) * gamma(0.5 * p + 1.0);
    let integral = 2.0 * PI * (4.0 * PI * t).powf(-p) * (2.0 * t).powf(-p) * radial;
    integral.powf(1.0 / p)
}

pub fn kernel_bound(p: f64, t: f64) -> f64 {
    t.powf(-1.0 + 1.0 / p)
}

pub fn grad_kernel_bound(p: f64, t: f64) -> f64 {
    t.powf(-1.5 + 1.0 / p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    Heat,
    Gradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelNormEntry {
    pub kind: KernelKind,
    pub p: f64,
    pub t: f64,
    /// Norm of the sampled kernel.
    pub value: f64,
    pub exact: f64,
    pub bound: f64,
}

impl KernelNormEntry {
    pub fn ratio(&self) -> f64 {
        self.value / self.bound
    }

    pub fn relative_error(&self) -> f64 {
        (self.value - self.exact).abs() / self.exact
    }

    pub fn within_bound(&self) -> bool {
        self.value <= self.bound
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KernelNormTable {
    pub entries: Vec<KernelNormEntry>,
}

fn fmt_exponent(p: f64) -> String {
    if p.is_infinite() {
        "inf".to_string()
    } else {
        format!("{p}")
    }
}

impl KernelNormTable {
    pub fn all_within_bound(&self) -> bool {
        self.entries.iter().all(KernelNormEntry::within_bound)
    }

    /// CSV with columns `p,t,value,bound,ratio`; gradient-kernel rows follow
    /// the heat-kernel rows and are written as a second block with the same
    /// columns when `kind` is mixed.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,t,value,bound,ratio\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{:e},{:e},{:e}\n",
                fmt_exponent(e.p),
                e.t,
                e.value,
                e.bound,
                e.ratio()
            ));
        }
        out
    }
}

fn check_resolution(grid: &Grid2D, t: f64) -> Result<()> {
    let width = (4.0 * t).sqrt();
    if width < 4.0 * grid.h() || width > grid.l() / 8.0 {
        return Err(KsError::Resolution(format!(
            "kernel width sqrt(4t) = {width:.4} outside [4h, l/8] = [{:.4}, {:.4}]",
            4.0 * grid.h(),
            grid.l() / 8.0
        )));
    }
    Ok(())
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(KsError::InvalidArgument(format!(
            "exponent p = {p} outside [1, inf]"
        )));
    }
    Ok(())
}

/// Samples `K_t` on the grid (centered at the origin) and tabulates its
/// discrete L^p norms against the exact values and the bound `t^{-1+1/p}`.
pub fn heat_kernel_norms(grid: &Grid2D, p_list: &[f64], t_list: &[f64]) -> Result<KernelNormTable> {
    let mut entries = Vec::new();
    for &t in t_list {
        check_time(t, true)?;
        check_resolution(grid, t)?;
        let k = ScalarField::from_fn(*grid, |x1, x2| heat_kernel(t, x1, x2));
        for &p in p_list {
            check_exponent(p)?;
            entries.push(KernelNormEntry {
                kind: KernelKind::Heat,
                p,
                t,
                value: lp_norm(&k, p),
                exact: kernel_norm_exact(p, t),
                bound: kernel_bound(p, t),
            });
        }
    }
    Ok(KernelNormTable { entries })
}

/// Same as [`heat_kernel_norms`] for `|∇K_t| = |x| / (2t) K_t`.
pub fn grad_kernel_norms(grid: &Grid2D, p_list: &[f64], t_list: &[f64]) -> Result<KernelNormTable> {
    let mut entries = Vec::new();
    for &t in t_list {
        check_time(t, true)?;
        check_resolution(grid, t)?;
        let k = ScalarField::from_fn(*grid, |x1, x2| {
            (x1 * x1 + x2 * x2).sqrt() / (2.0 * t) * heat_kernel(t, x1, x2)
        });
        for &p in p_list {
            check_exponent(p)?;
            entries.push(KernelNormEntry {
                kind: KernelKind::Gradient,
                p,
                t,
                value: lp_norm(&k, p),
                exact: grad_kernel_norm_exact(p, t),
                bound: grad_kernel_bound(p, t),
            });
        }
    }
    Ok(KernelNormTable { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::grad_magnitude;

    fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    fn gaussian(grid: Grid2D, mass: f64, s: f64) -> ScalarField {
        ScalarField::from_fn(grid, |x, y| mass * heat_kernel(s, x, y))
    }

    #[test]
    fn heat_at_zero_and_negative_time() {
        let g = Grid2D::new(32, 10.0).unwrap();
        let f = gaussian(g, 1.0, 0.5);
        assert!(max_diff(&heat(0.0, &f).unwrap(), &f) < 1e-15);
        assert!(heat(-0.1, &f).is_err());
        assert!(damped_heat(-0.1, &f).is_err());
        assert!(grad_heat(0.0, &f).is_err());
    }

    #[test]
    fn gaussian_convolution_identity() {
        for &(s, t) in &[(0.1, 0.1), (0.5, 0.3), (1.0, 1.0)] {
            let l = 20.0 * f64::sqrt(s + t) * 1.2;
            let grid = Grid2D::new(128, l).unwrap();
            let got = heat(t, &gaussian(grid, 2.0, s)).unwrap();
            let want = gaussian(grid, 2.0, s + t);
            let peak = 2.0 / (4.0 * PI * (s + t));
            assert!(max_diff(&got, &want) / peak < 1e-8, "s={s} t={t}");
        }
    }

    #[test]
    fn mass_conserved_and_sup_non_increasing() {
        let grid = Grid2D::new(64, 16.0).unwrap();
        let f = ScalarField::from_fn(grid, |x, y| {
            heat_kernel(0.2, x - 1.0, y) + 0.5 * heat_kernel(0.4, x + 2.0, y - 1.0)
        });
        let m0 = f.integral();
        let mut prev = lp_norm(&f, f64::INFINITY);
        for &t in &[0.01, 0.1, 1.0, 3.0] {
            let u = heat(t, &f).unwrap();
            assert!((u.integral() - m0).abs() < 1e-12 * m0);
            assert!((lp_norm(&u, 1.0) - lp_norm(&f, 1.0)).abs() < 1e-10);
            let sup = lp_norm(&u, f64::INFINITY);
            assert!(sup <= prev + 1e-15);
            prev = sup;
        }
    }

    #[test]
    fn damped_heat_is_scaled_heat_bit_for_bit() {
        let grid = Grid2D::new(32, 6.0).unwrap();
        let f = gaussian(grid, 1.0, 0.3);
        let t = 0.7;
        let a = damped_heat(t, &f).unwrap();
        let b = heat(t, &f).unwrap().scale((-t).exp());
        assert!(a
            .values()
            .iter()
            .zip(b.values())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
        let one = damped_heat(t, &ScalarField::constant(grid, 1.0)).unwrap();
        assert!(one.values().iter().all(|v| (v - (-t).exp()).abs() < 1e-15));
    }

    #[test]
    fn damped_heat_single_mode() {
        let grid = Grid2D::new(32, 2.0 * PI).unwrap();
        let f = ScalarField::from_fn(grid, |x, y| (2.0 * x - y).cos());
        let t = 0.4;
        let got = damped_heat(t, &f).unwrap();
        assert!(max_diff(&got, &f.scale((-t * 6.0f64).exp())) < 1e-14);
    }

    #[test]
    fn semigroup_law() {
        let grid = Grid2D::new(64, 8.0).unwrap();
        let f = ScalarField::from_fn(grid, |x, y| (x * 0.8).sin() * (-y * y).exp() + 0.1);
        let a = heat(0.3, &heat(0.45, &f).unwrap()).unwrap();
        let b = heat(0.75, &f).unwrap();
        assert!(max_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn grad_heat_of_gaussian_matches_closed_form() {
        let (s, t) = (0.3, 0.4);
        let grid = Grid2D::new(128, 16.0).unwrap();
        let (gx, gy) = grad_heat(t, &gaussian(grid, 1.0, s)).unwrap();
        let st = s + t;
        let ex = ScalarField::from_fn(grid, |x, y| -x / (2.0 * st) * heat_kernel(st, x, y));
        let ey = ScalarField::from_fn(grid, |x, y| -y / (2.0 * st) * heat_kernel(st, x, y));
        assert!(max_diff(&gx, &ex) < 1e-9);
        assert!(max_diff(&gy, &ey) < 1e-9);
        let (cx, cy) = grad_heat(t, &ScalarField::constant(grid, 3.0)).unwrap();
        assert!(cx
            .values()
            .iter()
            .chain(cy.values())
            .all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn grad_heat_of_discrete_delta_has_gradient_kernel_mass() {
        let grid = Grid2D::new(256, 32.0).unwrap();
        let n = grid.n();
        let mut delta = ScalarField::zeros(grid).into_values();
        delta[(n / 2) * n + n / 2] = 1.0 / grid.cell_area();
        let delta = ScalarField::new(grid, delta).unwrap();
        for &t in &[0.1, 0.5, 1.0] {
            let (gx, gy) = grad_heat(t, &delta).unwrap();
            let l1 = lp_norm(&grad_magnitude(&gx, &gy), 1.0);
            let exact = PI.sqrt() / (2.0 * t.sqrt());
            assert!((l1 - exact).abs() / exact < 0.01, "t={t}: {l1} vs {exact}");
            assert!(l1 <= t.powf(-0.5));
        }
    }

    #[test]
    fn exact_norm_values() {
        assert!((kernel_norm_exact(1.0, 0.3) - 1.0).abs() < 1e-15);
        assert!((kernel_norm_exact(f64::INFINITY, 1.0) - 0.0795774715).abs() < 1e-9);
        assert!((kernel_norm_exact(2.0, 1.0) - 0.1994711402).abs() < 1e-9);
        assert!((grad_kernel_norm_exact(1.0, 0.25) - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn kernel_table_ratio_independent_of_t() {
        let grid = Grid2D::new(256, 32.0).unwrap();
        let ps = [1.0, 2.0, 4.0, f64::INFINITY];
        let table = heat_kernel_norms(&grid, &ps, &[0.1, 0.5, 1.0]).unwrap();
        assert!(table.all_within_bound());
        for e in &table.entries {
            assert!(e.relative_error() < 0.01, "{e:?}");
            // value/bound = p^{-1/p} (4 pi)^{-1+1/p} for every t
            let expect = kernel_norm_exact(e.p, 1.0);
            assert!((e.ratio() - expect).abs() / expect < 0.01);
        }
        let grad = grad_kernel_norms(&grid, &[1.0, 2.0, f64::INFINITY], &[0.1, 0.5, 1.0]).unwrap();
        assert!(grad.all_within_bound());
        assert!(grad.entries.iter().all(|e| e.relative_error() < 0.01));
        let csv = table.to_csv();
        assert!(csv.starts_with("p,t,value,bound,ratio\n"));
        assert!(csv.contains("\ninf,"));
    }

    #[test]
    fn kernel_table_rejects_unresolved_time() {
        let grid = Grid2D::new(64, 32.0).unwrap();
        assert!(matches!(
            heat_kernel_norms(&grid, &[1.0], &[0.01]),
            Err(KsError::Resolution(_))
        ));
        assert!(matches!(
            heat_kernel_norms(&grid, &[1.0], &[50.0]),
            Err(KsError::Resolution(_))
        ));
    }
}
