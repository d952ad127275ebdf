//! `‖m(t,D)v‖_{L^r_t H^s} ≤ ‖m‖_{L^r_t L^∞_ξ} ‖v‖_{H^s}` and the
//! `|ξ|^δ`-weighted form with the norms in the order `L^∞_ξ L^ρ_t`.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::{LabCheck, LabConfig, LabReport, LabRow, RandomLowModes};
use crate::error::Result;
use crate::field::{Grid2D, MultiplierSpec, ScalarField};
use crate::norms::{trapezoid, weighted_spectral_sum, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Symbol {
    Identity,
    Heat,
    DampedHeat,
}

impl Symbol {
    fn name(self) -> &'static str {
        match self {
            Symbol::Identity => "identity",
            Symbol::Heat => "heat",
            Symbol::DampedHeat => "damped_heat",
        }
    }

    fn spec(self, t: f64) -> MultiplierSpec {
        match self {
            Symbol::Identity => MultiplierSpec::Heat(0.0),
            Symbol::Heat => MultiplierSpec::Heat(t),
            Symbol::DampedHeat => MultiplierSpec::DampedHeat(t),
        }
    }

    fn eval(self, t: f64, xi2: f64) -> f64 {
        match self {
            Symbol::Identity => 1.0,
            Symbol::Heat => (-t * xi2).exp(),
            Symbol::DampedHeat => (-t * (1.0 + xi2)).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum TimeNorm {
    Sup,
    L2,
}

fn time_norm(norm: TimeNorm, times: &[f64], values: &[f64]) -> f64 {
    match norm {
        TimeNorm::Sup => values.iter().copied().fold(0.0, f64::max),
        TimeNorm::L2 => trapezoid(times, &values.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt(),
    }
}

fn distinct_xi2(grid: &Grid2D) -> Vec<f64> {
    let mut v = grid.xi_squared();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// `‖m‖_{L^r_t L^∞_ξ}` (δ = 0) or `‖ |ξ| m ‖_{L^∞_ξ L^r_t}` (δ = 1), with the
/// same discrete time norm as the left side.
fn symbol_norm(sym: Symbol, delta: u8, norm: TimeNorm, times: &[f64], xi2: &[f64]) -> f64 {
    if delta == 0 {
        let sup_xi: Vec<f64> = times
            .iter()
            .map(|&t| xi2.iter().map(|&k| sym.eval(t, k)).fold(0.0, f64::max))
            .collect();
        time_norm(norm, times, &sup_xi)
    } else {
        xi2.par_iter()
            .map(|&k| {
                let vals: Vec<f64> = times.iter().map(|&t| k.sqrt() * sym.eval(t, k)).collect();
                time_norm(norm, times, &vals)
            })
            .reduce(|| 0.0, f64::max)
    }
}

fn samples(cfg: &LabConfig, grid: Grid2D) -> Vec<(&'static str, ScalarField)> {
    let w = 2.0 * PI / cfg.l;
    vec![
        (
            "mode_1_0",
            ScalarField::from_fn(grid, |x1, _| (w * x1).cos()),
        ),
        (
            "mode_2_1",
            ScalarField::from_fn(grid, |x1, x2| (w * (2.0 * x1 + x2)).cos()),
        ),
        (
            "bump",
            ScalarField::from_fn(grid, |x1, x2| ((w * x1).cos() + (w * x2).cos()).exp()),
        ),
        (
            "random",
            RandomLowModes::new(cfg.seed, 4, cfg.l).field(grid),
        ),
    ]
}

pub fn verify_multiplier_lemma(cfg: &LabConfig) -> Result<LabReport> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let tg = TimeGrid::geometric(cfg.t_min, cfg.t_max, cfg.k)?;
    let times: Vec<f64> = std::iter::once(0.0)
        .chain(tg.times().iter().copied())
        .collect();
    let xi2 = distinct_xi2(&grid);

    // (symbol, δ, time norm, family)
    let cases = [
        (Symbol::Identity, 0u8, TimeNorm::Sup, "multiplier_sup"),
        (Symbol::Heat, 0, TimeNorm::Sup, "multiplier_sup"),
        (Symbol::DampedHeat, 0, TimeNorm::Sup, "multiplier_sup"),
        (Symbol::DampedHeat, 0, TimeNorm::L2, "multiplier_l2"),
        (Symbol::Heat, 1, TimeNorm::L2, "multiplier_grad_l2"),
        (Symbol::DampedHeat, 1, TimeNorm::L2, "multiplier_grad_l2"),
    ];
    let data = samples(cfg, grid);
    let mut rows = Vec::new();
    for &(sym, delta, norm, family) in &cases {
        let mnorm = symbol_norm(sym, delta, norm, &times, &xi2);
        for (name, v) in &data {
            for s in [0.0, 1.0] {
                let vs = v.to_spectral();
                let v_hs = weighted_spectral_sum(&vs, |k| (1.0 + k).powf(s)).sqrt();
                let per_t: Vec<f64> = times
                    .par_iter()
                    .map(|&t| {
                        let mv = sym
                            .spec(t)
                            .apply(v)
                            .expect("valid multiplier")
                            .to_spectral();
                        let d = f64::from(delta);
                        weighted_spectral_sum(&mv, |k| k.powf(d) * (1.0 + k).powf(s)).sqrt()
                    })
                    .collect();
                let lhs = time_norm(norm, &times, &per_t);
                let params = format!(
                    "m={},delta={},r={},s={},v={}",
                    sym.name(),
                    delta,
                    match norm {
                        TimeNorm::Sup => "inf",
                        TimeNorm::L2 => "2",
                    },
                    s,
                    name
                );
                rows.push(LabRow::new(family, params, lhs, mnorm * v_hs));
            }
        }
    }
    let max = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let identity_ok = rows
        .iter()
        .filter(|r| r.params.starts_with("m=identity"))
        .all(|r| (r.ratio - 1.0).abs() < 1e-12);
    let checks = vec![
        LabCheck::new(
            "finite",
            rows.iter().all(|r| r.lhs.is_finite() && r.rhs.is_finite()),
            String::new(),
        ),
        LabCheck::new(
            "ratio_le_1",
            max <= 1.0 + 1e-9,
            format!("max ratio {max:.6}"),
        ),
        LabCheck::new("identity_ratio_1", identity_ok, String::new()),
    ];
    Ok(LabReport::new("multiplier_lemma", *cfg, rows, checks))
}
