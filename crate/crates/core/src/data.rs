//! Initial data on the torus.

use std::f64::consts::PI;

use crate::error::{KsError, Result};
use crate::field::{Grid2D, ScalarField};

/// `M/(4π s0) exp(-|x|²/(4 s0))`: the heat kernel at time `s0` with mass `M`.
pub fn gaussian(grid: Grid2D, mass: f64, s0: f64) -> Result<ScalarField> {
    if !(mass.is_finite() && mass >= 0.0) || !(s0.is_finite() && s0 > 0.0) {
        return Err(KsError::InvalidArgument(format!(
            "gaussian needs mass >= 0 and width > 0 (got mass={mass}, s0={s0})"
        )));
    }
    Ok(ScalarField::from_fn(grid, |x1, x2| {
        mass / (4.0 * PI * s0) * (-(x1 * x1 + x2 * x2) / (4.0 * s0)).exp()
    }))
}

/// `a cos(k·x)` with integer wavevector `k` (in units of `2π/l`).
pub fn mode(grid: Grid2D, amplitude: f64, k: [i64; 2]) -> Result<ScalarField> {
    let n = grid.n() as i64;
    if k.iter().any(|&ki| 3 * ki.abs() >= n) {
        return Err(KsError::InvalidArgument(format!(
            "wavevector {k:?} outside the dealiased band of n={n}"
        )));
    }
    let w = 2.0 * PI / grid.l();
    let (k1, k2) = (k[0] as f64 * w, k[1] as f64 * w);
    Ok(ScalarField::from_fn(grid, |x1, x2| {
        amplitude * (k1 * x1 + k2 * x2).cos()
    }))
}

/// `1_{[a,b]}(x1)` averaged over one grid cell in `x1`.
pub fn stripe(grid: Grid2D, a: f64, b: f64) -> Result<ScalarField> {
    if !(b > a) || b - a >= grid.l() {
        return Err(KsError::InvalidArgument(format!(
            "stripe [{a}, {b}] must be non-empty and fit the box"
        )));
    }
    let h = grid.h();
    Ok(ScalarField::from_fn(grid, |x1, _| {
        cell_average(x1, a, b, h)
    }))
}

/// `1_{[a,b]^2}` averaged over one grid cell in each direction.
pub fn square(grid: Grid2D, a: f64, b: f64) -> Result<ScalarField> {
    if !(b > a) || b - a >= grid.l() {
        return Err(KsError::InvalidArgument(format!(
            "square [{a}, {b}]² must be non-empty and fit the box"
        )));
    }
    let h = grid.h();
    Ok(ScalarField::from_fn(grid, |x1, x2| {
        cell_average(x1, a, b, h) * cell_average(x2, a, b, h)
    }))
}

/// Mean of `1_{[a,b]}` over `[x - h/2, x + h/2]`.
fn cell_average(x: f64, a: f64, b: f64, h: f64) -> f64 {
    let lo = (x - 0.5 * h).max(a);
    let hi = (x + 0.5 * h).min(b);
    ((hi - lo) / h).clamp(0.0, 1.0)
}
