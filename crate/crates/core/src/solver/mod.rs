//! Picard iteration for the rescaled system and an independent time stepper.
//!
//! With `w = v/(4c)` the mild formulation reads
//!
//! ```text
//! u = e^{tΔ}u0 - 4c B(u, w),     w = e^{t(Δ-1)}w0 + L(u)/(4c)
//! ```
//!
//! and the driver iterates this map from the free evolution, measuring
//! differences in the product norm of the selected setting.

mod reference;
mod verdict;

use serde::{Deserialize, Serialize};

use crate::duhamel::{
    bilinear_b, linear_l, linear_l_of_heat_datum, linear_l_undamped, QuadratureScheme,
};
use crate::error::{KsError, Result};
use crate::field::{Grid2D, ScalarField};
use crate::norms::{lp_norm, xy_norms_thm1, xy_norms_thm2, NormReport, TimeGrid, Trajectory};
use crate::semigroup::{damped_heat, heat};

pub use reference::{reference_solve, ReferenceOptions};
pub use verdict::{check_theorem1_bound, check_theorem2_bound, Thm1Verdict, Thm2Verdict, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremMode {
    /// `L^1 x L^∞` data: `X` = sup ‖u‖₁ + sup t‖u‖_∞, `Y` = sup t^{1/2}‖∇w‖_∞.
    Thm1L1Linf,
    /// `H^1_b x H^1` data.
    Thm2H1bH1,
}

impl TheoremMode {
    pub fn xy_norms(self, u: &Trajectory, w: &Trajectory) -> Result<NormReport> {
        match self {
            TheoremMode::Thm1L1Linf => xy_norms_thm1(u, w),
            TheoremMode::Thm2H1bH1 => xy_norms_thm2(u, w),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: Grid2D,
    pub tgrid: TimeGrid,
    pub c: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub mode: TheoremMode,
    pub quadrature: QuadratureScheme,
    /// Drop the damping term: `v_t - Δv + u = 0`.
    pub undamped: bool,
    pub reference: ReferenceOptions,
}

impl SolverConfig {
    pub fn new(grid: Grid2D, tgrid: TimeGrid, c: f64) -> Self {
        Self {
            grid,
            tgrid,
            c,
            max_iter: 50,
            tol: 1e-12,
            mode: TheoremMode::Thm1L1Linf,
            quadrature: QuadratureScheme::default(),
            undamped: false,
            reference: ReferenceOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(KsError::InvalidArgument(format!(
                "c must be positive, got {}",
                self.c
            )));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(KsError::InvalidArgument(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(KsError::InvalidArgument("max_iter must be >= 1".into()));
        }
        if self.tgrid.is_empty() {
            return Err(KsError::InvalidTime("empty time grid".into()));
        }
        QuadratureScheme::new(self.quadrature.kind, self.quadrature.substeps)?;
        self.reference.validate()
    }

    /// `3/(32c²)`
    pub fn threshold(&self) -> f64 {
        3.0 / (32.0 * self.c * self.c)
    }
}

/// Trajectories behind a report; not serialized.
#[derive(Debug, Clone)]
pub struct SolutionData {
    pub u0: ScalarField,
    pub w0: ScalarField,
    pub u: Trajectory,
    pub w: Trajectory,
    /// `4c w`
    pub v: Trajectory,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionReport {
    pub converged: bool,
    pub iterations: usize,
    /// product norm of `Φ(y_m) - y_m`, one entry per iteration
    pub residuals: Vec<f64>,
    /// ratios of successive residuals
    pub contraction_factors: Vec<f64>,
    pub mode: TheoremMode,
    pub c: f64,
    pub a0: f64,
    pub threshold: f64,
    pub below_threshold: bool,
    /// `8c²A₀ + 1/4`
    pub contraction_bound: f64,
    pub contraction_within_bound: bool,
    pub ball_radius: f64,
    pub max_iterate_norm: f64,
    pub stayed_in_ball: bool,
    pub initial_mass: f64,
    pub max_mass_drift: f64,
    pub norms_thm1: NormReport,
    pub norms_thm2: NormReport,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failure: Option<String>,
    #[serde(skip)]
    pub data: Option<SolutionData>,
}

impl SolutionReport {
    pub fn max_contraction_factor(&self) -> f64 {
        self.contraction_factors.iter().copied().fold(0.0, f64::max)
    }
}

struct PicardMap<'a> {
    cfg: &'a SolverConfig,
    free_u: Trajectory,
    free_w: Trajectory,
    /// `L(e^{τΔ}u0)`, exact
    l_free: Trajectory,
}

impl<'a> PicardMap<'a> {
    fn new(u0: &ScalarField, w0: &ScalarField, cfg: &'a SolverConfig) -> Result<Self> {
        let tg = &cfg.tgrid;
        let free_u = Trajectory::from_fn(cfg.grid, tg, true, |t| heat(t, u0).expect("t >= 0"))?;
        let free_w = Trajectory::from_fn(cfg.grid, tg, true, |t| {
            if cfg.undamped {
                heat(t, w0)
            } else {
                damped_heat(t, w0)
            }
            .expect("t >= 0")
        })?;
        let l_free = linear_l_of_heat_datum(u0, tg, !cfg.undamped, true)?;
        Ok(Self {
            cfg,
            free_u,
            free_w,
            l_free,
        })
    }

    fn apply(&self, u: &Trajectory, w: &Trajectory) -> Result<(Trajectory, Trajectory)> {
        let four_c = 4.0 * self.cfg.c;
        let b = bilinear_b(u, w, self.cfg.quadrature)?;
        let un = self.free_u.lin_comb(1.0, &b, -four_c)?;
        // L is split into its exact free part and a quadrature of the rest,
        // which is O(data²) and smooth at t = 0.
        let rest = u.lin_comb(1.0, &self.free_u, -1.0)?;
        let l_rest = if self.cfg.undamped {
            linear_l_undamped(&rest, self.cfg.quadrature)?
        } else {
            linear_l(&rest, self.cfg.quadrature)?
        };
        let l = self.l_free.lin_comb(1.0, &l_rest, 1.0)?;
        let wn = self.free_w.lin_comb(1.0, &l, 1.0 / four_c)?;
        Ok((un, wn))
    }
}

fn check_finite(traj: &Trajectory, what: &str) -> Result<()> {
    match traj.first_non_finite() {
        Some((node, time)) => Err(KsError::NonFinite {
            node,
            time,
            what: what.to_string(),
        }),
        None => Ok(()),
    }
}

fn max_mass_drift(u: &Trajectory, m0: f64) -> f64 {
    let scale = if m0.abs() > 0.0 { m0.abs() } else { 1.0 };
    u.fields()
        .iter()
        .map(|f| (f.integral() - m0).abs() / scale)
        .fold(0.0, f64::max)
}

/// Runs the Picard iteration from the free evolution of `(u0, w0)`, where
/// `w0 = v0/(4c)`.
///
/// Non-convergence and divergence are reported through `converged = false`;
/// a non-finite iterate aborts with the first offending node.
pub fn picard_solve(
    u0: &ScalarField,
    w0: &ScalarField,
    cfg: &SolverConfig,
) -> Result<SolutionReport> {
    cfg.validate()?;
    cfg.grid.check_same(u0.grid())?;
    cfg.grid.check_same(w0.grid())?;
    if !u0.is_finite() || !w0.is_finite() {
        return Err(KsError::NonFinite {
            node: 0,
            time: 0.0,
            what: "initial data".into(),
        });
    }
    let map = PicardMap::new(u0, w0, cfg)?;
    let norm =
        |u: &Trajectory, w: &Trajectory| Ok::<f64, KsError>(cfg.mode.xy_norms(u, w)?.get("XY"));
    let a0 = norm(&map.free_u, &map.free_w)?;
    let threshold = cfg.threshold();
    let bound = 8.0 * cfg.c * cfg.c * a0 + 0.25;
    let m0 = u0.integral();

    let (mut u, mut w) = (map.free_u.clone(), map.free_w.clone());
    let mut residuals = Vec::new();
    let mut factors = Vec::new();
    let mut max_norm = a0;
    let mut drift = max_mass_drift(&u, m0);
    let mut converged = false;
    let mut failure = None;
    for it in 1..=cfg.max_iter {
        let (un, wn) = map.apply(&u, &w)?;
        check_finite(&un, "u iterate")?;
        check_finite(&wn, "w iterate")?;
        let res = norm(&un.lin_comb(1.0, &u, -1.0)?, &wn.lin_comb(1.0, &w, -1.0)?)?;
        if let Some(&prev) = residuals.last() {
            if prev > 0.0 {
                factors.push(res / prev);
            }
        }
        residuals.push(res);
        max_norm = max_norm.max(norm(&un, &wn)?);
        drift = drift.max(max_mass_drift(&un, m0));
        u = un;
        w = wn;
        log::debug!("picard iteration {it}: residual {res:.3e}");
        if res <= cfg.tol {
            converged = true;
            break;
        }
        if !res.is_finite() || res > 1e6 * a0.max(f64::MIN_POSITIVE) {
            failure = Some(format!(
                "iterates diverged at iteration {it} (residual {res:.3e})"
            ));
            break;
        }
    }
    if !converged && failure.is_none() {
        failure = Some(format!(
            "no convergence after {} iterations (residual {:.3e})",
            cfg.max_iter,
            residuals.last().copied().unwrap_or(f64::NAN)
        ));
    }
    let v = w.scale(4.0 * cfg.c);
    let within = factors.iter().all(|&f| f <= bound);
    Ok(SolutionReport {
        converged,
        iterations: residuals.len(),
        residuals,
        contraction_factors: factors,
        mode: cfg.mode,
        c: cfg.c,
        a0,
        threshold,
        below_threshold: a0 < threshold,
        contraction_bound: bound,
        contraction_within_bound: within,
        ball_radius: 2.0 * a0,
        max_iterate_norm: max_norm,
        stayed_in_ball: max_norm <= 2.0 * a0 * (1.0 + 1e-12),
        initial_mass: m0,
        max_mass_drift: drift,
        norms_thm1: xy_norms_thm1(&u, &w)?,
        norms_thm2: xy_norms_thm2(&u, &w)?,
        failure,
        data: Some(SolutionData {
            u0: u0.clone(),
            w0: w0.clone(),
            u,
            w,
            v,
        }),
    })
}

/// `‖a(t_j) - b(t_j)‖_∞ / ‖b(t_j)‖_∞` at every node (0 where both vanish).
pub fn relative_sup_differences(a: &Trajectory, b: &Trajectory) -> Result<Vec<f64>> {
    if a.fields().len() != b.fields().len() {
        return Err(KsError::ShapeMismatch(
            "trajectories of different length".into(),
        ));
    }
    a.fields()
        .iter()
        .zip(b.fields())
        .map(|(x, y)| {
            let d = lp_norm(&x.sub(y)?, f64::INFINITY);
            let s = lp_norm(y, f64::INFINITY);
            Ok(if d == 0.0 { 0.0 } else { d / s })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassSweepEntry {
    pub mass: f64,
    pub a0: f64,
    pub threshold: f64,
    pub below_threshold: bool,
    pub converged: bool,
    pub iterations: usize,
    pub max_contraction_factor: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassSweep {
    pub entries: Vec<MassSweepEntry>,
    /// first mass with `A₀ >= 3/(32c²)`
    pub first_threshold_violation: Option<f64>,
}

/// Gaussian `u0` of width `s0` and each mass in turn, `v0 = 0`.
pub fn mass_sweep(cfg: &SolverConfig, s0: f64, masses: &[f64]) -> Result<MassSweep> {
    let w0 = ScalarField::zeros(cfg.grid);
    let mut entries = Vec::with_capacity(masses.len());
    for &m in masses {
        let u0 = crate::data::gaussian(cfg.grid, m, s0)?;
        let (converged, iterations, factor, a0) = match picard_solve(&u0, &w0, cfg) {
            Ok(r) => (r.converged, r.iterations, r.max_contraction_factor(), r.a0),
            Err(KsError::NonFinite { .. }) => (false, 0, f64::INFINITY, f64::NAN),
            Err(e) => return Err(e),
        };
        entries.push(MassSweepEntry {
            mass: m,
            a0,
            threshold: cfg.threshold(),
            below_threshold: a0 < cfg.threshold(),
            converged,
            iterations,
            max_contraction_factor: factor,
        });
    }
    let first_threshold_violation = entries.iter().find(|e| !e.below_threshold).map(|e| e.mass);
    Ok(MassSweep {
        entries,
        first_threshold_violation,
    })
}
