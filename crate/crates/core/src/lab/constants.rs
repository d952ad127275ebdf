//! Empirical constants of the linear and bilinear estimates.
//!
//! `c1` bounds the free evolution by the data, `c2` the bilinear term
//! `‖B(u,w)‖_X ≤ c2 ‖u‖_X ‖w‖_Y` and `c3` the linear term
//! `‖L(u)‖_Y ≤ c3 ‖u‖_X`. Each is the largest ratio observed over the
//! sample families; `c` is their maximum times a safety factor.

use serde::{Deserialize, Serialize};

use super::LabRow;
use crate::data::{gaussian, mode, square, stripe};
use crate::duhamel::{bilinear_b, linear_l_of_heat_datum, QuadratureScheme};
use crate::error::Result;
use crate::field::{Grid2D, ScalarField};
use crate::norms::{hs_norm, lp_norm, TimeGrid, Trajectory};
use crate::semigroup::{damped_heat, heat};
use crate::solver::TheoremMode;

pub const SAFETY_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsConfig {
    pub n: usize,
    pub l: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub k: usize,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self {
            n: 64,
            l: 16.0,
            t_min: 1e-3,
            t_max: 10.0,
            k: 48,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub mode: TheoremMode,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub safety_factor: f64,
    pub c: f64,
    /// `3/(32c²)`
    pub threshold: f64,
    pub config: ConstantsConfig,
    pub families: Vec<String>,
    pub rows: Vec<LabRow>,
    pub notices: Vec<String>,
}

impl ConstantsReport {
    /// Whether `c` dominates every observed ratio.
    pub fn admits(&self, c: f64) -> bool {
        c >= self.c1.max(self.c2).max(self.c3)
    }
}

/// Sample data: Gaussians of several widths and positions, single modes and
/// one-cell-smoothed indicators.
pub fn sample_family(grid: Grid2D) -> Result<Vec<(String, ScalarField)>> {
    Ok(vec![
        ("gaussian_s0.1".into(), gaussian(grid, 1.0, 0.1)?),
        ("gaussian_s1".into(), gaussian(grid, 1.0, 1.0)?),
        (
            "gaussian_s0.5_shifted".into(),
            gaussian(grid, 1.0, 0.5)?.shifted(grid.n() / 8, grid.n() - grid.n() / 16),
        ),
        ("mode_1_0".into(), mode(grid, 1.0, [1, 0])?),
        ("mode_2_1".into(), mode(grid, 1.0, [2, 1])?),
        ("stripe_0_1".into(), stripe(grid, 0.0, 1.0)?),
        ("square_-1_1".into(), square(grid, -1.0, 1.0)?),
    ])
}

struct Free {
    name: String,
    u0: ScalarField,
    u: Trajectory,
    w: Trajectory,
    l: Trajectory,
}

fn x_norm(mode: TheoremMode, u: &Trajectory, w: &Trajectory) -> Result<f64> {
    Ok(mode.xy_norms(u, w)?.get("X"))
}

fn y_norm(mode: TheoremMode, u: &Trajectory, w: &Trajectory) -> Result<f64> {
    Ok(mode.xy_norms(u, w)?.get("Y"))
}

/// Data norm on the right of the linear estimates.
fn data_norms(mode: TheoremMode, f: &ScalarField) -> (f64, f64) {
    match mode {
        TheoremMode::Thm1L1Linf => (lp_norm(f, 1.0), lp_norm(f, f64::INFINITY)),
        TheoremMode::Thm2H1bH1 => (hs_norm(f, 1.0) + lp_norm(f, f64::INFINITY), hs_norm(f, 1.0)),
    }
}

pub fn estimate_constants(cfg: &ConstantsConfig, mode: TheoremMode) -> Result<ConstantsReport> {
    let grid = Grid2D::new(cfg.n, cfg.l)?;
    let tg = TimeGrid::geometric(cfg.t_min, cfg.t_max, cfg.k)?;
    let family = sample_family(grid)?;
    let q = QuadratureScheme::default();
    let mut rows = Vec::new();
    let mut notices = Vec::new();

    let frees: Vec<Free> = family
        .iter()
        .map(|(name, f)| {
            Ok(Free {
                name: name.clone(),
                u0: f.clone(),
                u: Trajectory::from_fn(grid, &tg, true, |t| heat(t, f).expect("t >= 0"))?,
                w: Trajectory::from_fn(grid, &tg, true, |t| damped_heat(t, f).expect("t >= 0"))?,
                l: linear_l_of_heat_datum(f, &tg, true, true)?,
            })
        })
        .collect::<Result<_>>()?;

    let mut push = |rows: &mut Vec<LabRow>, family: &str, params: String, lhs: f64, rhs: f64| {
        if rhs > 0.0 && rhs.is_finite() {
            rows.push(LabRow::new(family, params, lhs, rhs));
        } else {
            notices.push(format!(
                "skipped {family} sample {params}: zero or non-finite norm"
            ));
        }
    };

    for s in &frees {
        let (du, dw) = data_norms(mode, &s.u0);
        let xu = x_norm(mode, &s.u, &s.w)?;
        let yw = y_norm(mode, &s.u, &s.w)?;
        push(&mut rows, "c1_u", format!("u0={}", s.name), xu, du);
        push(&mut rows, "c1_w", format!("w0={}", s.name), yw, dw);
        // c3: L of the free evolution, which lies in X
        let yl = y_norm(mode, &s.u, &s.l)?;
        push(&mut rows, "c3", format!("u0={}", s.name), yl, xu);
    }
    for a in &frees {
        for b in &frees {
            let bt = bilinear_b(&a.u, &b.w, q)?;
            let xb = x_norm(mode, &bt, &b.w)?;
            let xu = x_norm(mode, &a.u, &b.w)?;
            let yw = y_norm(mode, &a.u, &b.w)?;
            push(
                &mut rows,
                "c2",
                format!("u0={},w0={}", a.name, b.name),
                xb,
                xu * yw,
            );
        }
    }
    let max_of = |p: &str| {
        rows.iter()
            .filter(|r| r.family.starts_with(p))
            .map(|r| r.ratio)
            .fold(0.0, f64::max)
    };
    let (c1, c2, c3) = (max_of("c1"), max_of("c2"), max_of("c3"));
    let c = SAFETY_FACTOR * c1.max(c2).max(c3);
    Ok(ConstantsReport {
        mode,
        c1,
        c2,
        c3,
        safety_factor: SAFETY_FACTOR,
        c,
        threshold: 3.0 / (32.0 * c * c),
        config: *cfg,
        families: family.into_iter().map(|(n, _)| n).collect(),
        rows,
        notices,
    })
}
