//! Lower bound `t^{1/2}|∂₁e^{tΔ}1_{[0,1]}(x1)| ≥ c0` for `0 < t < 1/64` and
//! `√t < x1 < 2√t`: the gradient of the heat flow of indicator data is not
//! small in `t^{1/2}L^∞` as `t → 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::data::stripe;
use crate::error::{KsError, Result};
use crate::field::Grid2D;

/// `(1/√π)∫_1^3 z e^{-z²} dz = (e^{-1} - e^{-9})/(2√π)`
pub fn counterexample_c0() -> f64 {
    ((-1.0f64).exp() - (-9.0f64).exp()) / (2.0 * PI.sqrt())
}

/// `(1/(2√π)) |e^{-x²/4t} - e^{-(x-1)²/4t}|`
fn closed_form(t: f64, x1: f64) -> f64 {
    ((-x1 * x1 / (4.0 * t)).exp() - (-(x1 - 1.0).powi(2) / (4.0 * t)).exp()).abs()
        / (2.0 * PI.sqrt())
}

fn in_window(t: f64, x1: f64) -> bool {
    t > 0.0 && t < 1.0 / 64.0 && x1 > t.sqrt() && x1 < 2.0 * t.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexamplePoint {
    pub t: f64,
    pub x1: f64,
    pub value: f64,
    pub in_window: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterexampleVerdict {
    Holds,
    Fails,
    OutsideHypothesis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub c0: f64,
    pub points: Vec<CounterexamplePoint>,
    pub verdict: CounterexampleVerdict,
}

fn report(points: Vec<CounterexamplePoint>) -> CounterexampleReport {
    let verdict = if points.iter().any(|p| !p.in_window) {
        CounterexampleVerdict::OutsideHypothesis
    } else if points.iter().all(|p| p.holds) {
        CounterexampleVerdict::Holds
    } else {
        CounterexampleVerdict::Fails
    };
    CounterexampleReport {
        c0: counterexample_c0(),
        points,
        verdict,
    }
}

fn point(c0: f64, t: f64, x1: f64) -> CounterexamplePoint {
    let value = closed_form(t, x1);
    CounterexamplePoint {
        t,
        x1,
        value,
        in_window: in_window(t, x1),
        holds: value >= c0,
    }
}

/// Closed-form profile at one time.
pub fn counterexample_profile(t: f64, x1_points: &[f64]) -> CounterexampleReport {
    let c0 = counterexample_c0();
    report(x1_points.iter().map(|&x| point(c0, t, x)).collect())
}

/// Ten points inside the window: five times, two positions each.
pub fn counterexample_sweep() -> CounterexampleReport {
    let c0 = counterexample_c0();
    let mut pts = Vec::new();
    for t in [0.006, 0.008, 0.010, 0.012, 0.015] {
        for a in [1.25, 1.75] {
            pts.push(point(c0, t, a * f64::sqrt(t)));
        }
    }
    report(pts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridComparison {
    pub t: f64,
    pub x1: f64,
    pub closed_form: f64,
    pub grid: f64,
    pub rel_err: f64,
}

/// Evaluates `t^{1/2}|∂₁e^{tΔ}v0|` for the one-cell-averaged stripe on an
/// `n`-grid of side `l`, by direct Fourier summation at off-grid `x1`.
pub fn counterexample_grid_check(
    n: usize,
    l: f64,
    points: &[(f64, f64)],
) -> Result<Vec<GridComparison>> {
    let grid = Grid2D::new(n, l)?;
    if l < 4.0 {
        return Err(KsError::Resolution(format!(
            "box side {l} too small for the stripe"
        )));
    }
    let spec = stripe(grid, 0.0, 1.0)?.to_spectral();
    // the stripe is x2-independent: only the k2 = 0 column carries energy
    let row: Vec<(f64, Complex64)> = (0..n)
        .filter(|&i| !grid.is_nyquist(i))
        .map(|i| (grid.wavenumber(i), spec.coeff(i, 0)))
        .collect();
    let norm = 1.0 / (n * n) as f64;
    Ok(points
        .iter()
        .map(|&(t, x1)| {
            let d: Complex64 = row
                .iter()
                .map(|&(k, c)| {
                    c * Complex64::new(0.0, k)
                        * (-t * k * k).exp()
                        * Complex64::from_polar(1.0, k * (x1 + 0.5 * l))
                })
                .sum();
            let g = t.sqrt() * (d.re * norm).abs();
            let cf = closed_form(t, x1);
            GridComparison {
                t,
                x1,
                closed_form: cf,
                grid: g,
                rel_err: (g - cf).abs() / cf,
            }
        })
        .collect())
}
