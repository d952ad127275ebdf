//! `Tg = ∫_0^t e^{(t-τ)Δ} Δg dτ` is bounded on `L²_t L²`; its symbol
//! `|ξ|²/(iω + |ξ|²)` has modulus at most one.

use super::{x1_mode, LabCheck, LabConfig, LabReport, LabRow, RandomLowModes};
use crate::duhamel::{maximal_reg_t, QuadratureScheme};
use crate::error::Result;
use crate::field::ScalarField;
use crate::norms::{lp_norm, trapezoid, TimeGrid, Trajectory};

const BOUND_SLACK: f64 = 0.02;

#[derive(Debug, Clone, Copy)]
enum Profile {
    Constant,
    Exp,
    Square { period: f64 },
    Mix { period: f64 },
}

impl Profile {
    fn family(self) -> &'static str {
        match self {
            Profile::Constant => "maxreg_const",
            Profile::Exp => "maxreg_exp",
            Profile::Square { .. } => "maxreg_square",
            Profile::Mix { .. } => "maxreg_mix",
        }
    }

    fn eval(self, t: f64) -> f64 {
        let square = |period: f64| if (t / period).fract() < 0.5 { 1.0 } else { 0.0 };
        match self {
            Profile::Constant => 1.0,
            Profile::Exp => (-t).exp(),
            Profile::Square { period } => square(period),
            Profile::Mix { period } => 0.5 + square(period) - 0.5 * (-t).exp(),
        }
    }
}

fn l2l2(traj: &Trajectory) -> f64 {
    let frames = traj.frames();
    let times: Vec<f64> = frames.iter().map(|f| f.0).collect();
    let sq: Vec<f64> = frames.iter().map(|f| lp_norm(f.1, 2.0).powi(2)).collect();
    trapezoid(&times, &sq).sqrt()
}

/// `‖(1 - e^{-t|k|²})‖_{L²(0,T)} / √T`
pub(crate) fn constant_mode_ratio(k2: f64, t_end: f64) -> f64 {
    let e1 = -(-t_end * k2).exp_m1() / k2;
    let e2 = -(-2.0 * t_end * k2).exp_m1() / (2.0 * k2);
    ((t_end - 2.0 * e1 + e2) / t_end).sqrt()
}

pub fn verify_maximal_regularity(cfg: &LabConfig) -> Result<LabReport> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let t_end = cfg.t_max / 10.0;
    let tg = TimeGrid::uniform(t_end / cfg.k as f64, t_end, cfg.k)?;
    let period = t_end / 4.0;
    let profiles = [
        Profile::Constant,
        Profile::Exp,
        Profile::Square { period },
        Profile::Mix { period },
    ];
    let mut data: Vec<(String, ScalarField)> = cfg
        .mode_sweep()
        .into_iter()
        .map(|k| (format!("mode_{k}_0"), x1_mode(grid, k)))
        .collect();
    data.push((
        "random".into(),
        RandomLowModes::new(cfg.seed, 4, cfg.l).field(grid),
    ));
    let q = QuadratureScheme::default();

    let mut rows = Vec::new();
    let mut closed_form_err: f64 = 0.0;
    for (name, f) in &data {
        for &prof in &profiles {
            let g = Trajectory::from_fn(grid, &tg, true, |t| f.scale(prof.eval(t)))?;
            let tgr = maximal_reg_t(&g, q)?;
            let row = LabRow::new(prof.family(), format!("g={name}"), l2l2(&tgr), l2l2(&g));
            if let (Profile::Constant, Some(k)) = (
                prof,
                name.strip_prefix("mode_")
                    .and_then(|s| s.strip_suffix("_0")),
            ) {
                let kk = 2.0 * std::f64::consts::PI * k.parse::<f64>().unwrap_or(0.0) / cfg.l;
                let exact = constant_mode_ratio(kk * kk, t_end);
                closed_form_err = closed_form_err.max((row.ratio - exact).abs() / exact);
            }
            rows.push(row);
        }
    }
    // Δg = 0 gives Tg = 0
    let c = Trajectory::from_fn(grid, &tg, true, |t| ScalarField::constant(grid, 1.0 + t))?;
    let zero = l2l2(&maximal_reg_t(&c, q)?);

    let max = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let checks = vec![
        LabCheck::new(
            "finite",
            rows.iter().all(|r| r.ratio.is_finite()),
            String::new(),
        ),
        LabCheck::new(
            "bounded_by_1",
            max <= 1.0 + BOUND_SLACK,
            format!("max ratio {max:.5}"),
        ),
        LabCheck::new(
            "constant_field_annihilated",
            zero < 1e-12,
            format!("‖Tc‖ = {zero:e}"),
        ),
        LabCheck::new(
            "constant_profile_closed_form",
            closed_form_err < 1e-2,
            format!("max relative error {closed_form_err:.2e}"),
        ),
    ];
    Ok(LabReport::new("maximal_regularity", *cfg, rows, checks))
}
