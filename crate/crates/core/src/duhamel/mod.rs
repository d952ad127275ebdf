//! Duhamel integrals over trajectories.
//!
//! All three operators have the form `∫_0^t e^{-(t-τ) a(ξ)} m(ξ) ĝ(τ, ξ) dτ`
//! for a per-mode decay rate `a` and symbol `m`. Between samples the
//! integrand is reconstructed as piecewise constant or piecewise linear in
//! τ and the exponential factor is integrated exactly, so stiff high modes
//! cost nothing extra. Outputs are advanced node to node with
//! `S(t_j) = e^{-(t_j - t_{j-1}) a} S(t_{j-1}) + (local integral)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{KsError, Result};
use crate::field::{gradient_spectral, truncate, Grid2D, ScalarField, SpectralField};
use crate::norms::{lp_norm, TimeGrid, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureKind {
    EtdPiecewiseConstant,
    EtdPiecewiseLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureScheme {
    pub kind: QuadratureKind,
    pub substeps: usize,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        Self {
            kind: QuadratureKind::EtdPiecewiseLinear,
            substeps: 1,
        }
    }
}

impl QuadratureScheme {
    pub fn new(kind: QuadratureKind, substeps: usize) -> Result<Self> {
        if substeps == 0 {
            return Err(KsError::InvalidArgument(
                "quadrature substeps must be >= 1".into(),
            ));
        }
        Ok(Self { kind, substeps })
    }
}

/// `(1 - e^{-z}) / z`
fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - 0.5 * z
    } else {
        -(-z).exp_m1() / z
    }
}

/// Weights of the left and right endpoint values for
/// `∫_0^1 e^{-z(1-θ)} [(1-θ) g_a + θ g_b] dθ`:
/// `ψ_a = ∫_0^1 s e^{-zs} ds`, `ψ_b = ∫_0^1 (1-s) e^{-zs} ds`.
fn psi(z: f64) -> (f64, f64) {
    if z < 0.5 {
        // ψ_a = Σ (-z)^k / (k! (k+2)),  ψ_b = Σ (-z)^k / (k+2)!
        let mut a = 0.0;
        let mut b = 0.0;
        let mut pow_over_fact = 1.0; // (-z)^k / k!
        for k in 0..20 {
            let kf = k as f64;
            a += pow_over_fact / (kf + 2.0);
            b += pow_over_fact / ((kf + 1.0) * (kf + 2.0));
            pow_over_fact *= -z / (kf + 1.0);
        }
        (a, b)
    } else {
        let e = (-z).exp();
        let z2 = z * z;
        ((-(-z).exp_m1() - z * e) / z2, (z + (-z).exp_m1()) / z2)
    }
}

/// Advances `∫ e^{-(t-τ)a} g(τ) dτ` through a sequence of samples.
struct EtdAccumulator<'a> {
    rates: &'a [f64],
    kind: QuadratureKind,
    state: Vec<Complex64>,
}

impl<'a> EtdAccumulator<'a> {
    fn new(rates: &'a [f64], kind: QuadratureKind) -> Self {
        Self {
            rates,
            kind,
            state: vec![Complex64::new(0.0, 0.0); rates.len()],
        }
    }

    fn step(&mut self, h: f64, ga: &SpectralField, gb: &SpectralField) {
        let kind = self.kind;
        self.state
            .par_iter_mut()
            .zip(self.rates.par_iter())
            .zip(ga.coeffs().par_iter().zip(gb.coeffs().par_iter()))
            .for_each(|((s, &a), (&xa, &xb))| {
                let z = a * h;
                let decay = (-z).exp();
                let local = match kind {
                    QuadratureKind::EtdPiecewiseConstant => xa * (h * phi1(z)),
                    QuadratureKind::EtdPiecewiseLinear => {
                        let (wa, wb) = psi(z);
                        xa * (h * wa) + xb * (h * wb)
                    }
                };
                *s = *s * decay + local;
            });
    }
}

/// Runs the accumulator over frames (`frame_times[0]` may be 0) and returns
/// the integral at every frame. `interior(j, θ)` supplies the integrand at
/// `frame_times[j-1] + θ (frame_times[j] - frame_times[j-1])` for substeps.
fn integrate_frames(
    rates: &[f64],
    scheme: QuadratureScheme,
    frame_times: &[f64],
    frame_g: &[SpectralField],
    interior: &(dyn Fn(usize, f64) -> SpectralField + Sync),
) -> Vec<SpectralField> {
    let grid = *frame_g[0].grid();
    let mut acc = EtdAccumulator::new(rates, scheme.kind);
    let mut out = Vec::with_capacity(frame_times.len());
    out.push(SpectralField::zeros(grid));
    let s = scheme.substeps;
    for j in 1..frame_times.len() {
        let (ta, tb) = (frame_times[j - 1], frame_times[j]);
        let h = (tb - ta) / s as f64;
        let mut ga = frame_g[j - 1].clone();
        for m in 1..=s {
            let gb = if m == s {
                frame_g[j].clone()
            } else {
                interior(j, m as f64 / s as f64)
            };
            acc.step(h, &ga, &gb);
            ga = gb;
        }
        out.push(SpectralField::new(grid, acc.state.clone()).expect("grid-sized state"));
    }
    out
}

fn lerp_spectral(a: &SpectralField, b: &SpectralField, theta: f64) -> SpectralField {
    let coeffs = a
        .coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| x * (1.0 - theta) + y * theta)
        .collect();
    SpectralField::new(*a.grid(), coeffs).expect("same grid")
}

/// Spectrum of `∇·(u ∇v)` with 2/3-rule dealiasing of both products.
pub fn flux_divergence(u: &ScalarField, v: &ScalarField) -> Result<SpectralField> {
    u.grid().check_same(v.grid())?;
    flux_divergence_spectral(&u.to_spectral(), &v.to_spectral())
}

/// As [`flux_divergence`], from spectra.
pub fn flux_divergence_spectral(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.grid().check_same(v.grid())?;
    let mut us = u.clone();
    truncate(&mut us);
    let ur = us.to_real();
    let (mut g1, mut g2) = gradient_spectral(v);
    truncate(&mut g1);
    truncate(&mut g2);
    let mul = |g: &SpectralField| {
        let gr = g.to_real();
        let p: Vec<f64> = ur
            .values()
            .iter()
            .zip(gr.values())
            .map(|(a, b)| a * b)
            .collect();
        let mut ps = ScalarField::new(*u.grid(), p)?.to_spectral();
        truncate(&mut ps);
        Ok::<_, KsError>(ps)
    };
    let p1 = mul(&g1)?;
    let p2 = mul(&g2)?;
    crate::field::divergence_spectral(&p1, &p2)
}

fn to_trajectory(
    grid: Grid2D,
    tgrid: &TimeGrid,
    with_initial: bool,
    frames: Vec<SpectralField>,
    symbol: Option<&[f64]>,
) -> Result<Trajectory> {
    let mut fields: Vec<ScalarField> = frames
        .into_par_iter()
        .map(|mut s| {
            if let Some(m) = symbol {
                for (c, &k) in s.coeffs_mut().iter_mut().zip(m) {
                    *c *= k;
                }
            }
            s.to_real()
        })
        .collect();
    // without an initial datum frame 0 is t_1, where accumulation starts
    let initial = if with_initial {
        Some(fields.remove(0))
    } else {
        None
    };
    Trajectory::new(grid, tgrid.clone(), fields, initial)
}

fn frame_times(traj: &Trajectory) -> Vec<f64> {
    traj.frames().iter().map(|(t, _)| *t).collect()
}

fn check_nonempty(traj: &Trajectory) -> Result<()> {
    if traj.tgrid().is_empty() || traj.fields().is_empty() {
        return Err(KsError::InvalidArgument("empty trajectory".into()));
    }
    Ok(())
}

fn heat_rates(grid: &Grid2D) -> Vec<f64> {
    grid.xi_squared()
}

fn damped_rates(grid: &Grid2D) -> Vec<f64> {
    grid.xi_squared().into_iter().map(|k| 1.0 + k).collect()
}

/// `B(u, v)(t) = ∫_0^t e^{(t-τ)Δ} ∇·(u∇v)(τ) dτ` at every node.
///
/// Without initial data on both inputs the segment `[0, t_1]` is dropped and
/// `t_1 max|∇·(u∇v)(t_1)|` is recorded as the deficit.
pub fn bilinear_b(u: &Trajectory, v: &Trajectory, q: QuadratureScheme) -> Result<Trajectory> {
    check_nonempty(u)?;
    u.check_compatible(v)?;
    let with_initial = u.initial().is_some() && v.initial().is_some();
    let uf: Vec<(f64, &ScalarField)> = frames_for(u, with_initial);
    let vf: Vec<(f64, &ScalarField)> = frames_for(v, with_initial);
    let g: Vec<SpectralField> = uf
        .par_iter()
        .zip(vf.par_iter())
        .map(|(a, b)| flux_divergence(a.1, b.1))
        .collect::<Result<_>>()?;
    let times: Vec<f64> = uf.iter().map(|f| f.0).collect();
    let interior = |j: usize, theta: f64| {
        let ui = uf[j - 1]
            .1
            .lin_comb(1.0 - theta, uf[j].1, theta)
            .expect("same grid");
        let vi = vf[j - 1]
            .1
            .lin_comb(1.0 - theta, vf[j].1, theta)
            .expect("same grid");
        flux_divergence(&ui, &vi).expect("same grid")
    };
    let rates = heat_rates(u.grid());
    let deficit = (!with_initial).then(|| times[0] * lp_norm(&g[0].to_real(), f64::INFINITY));
    let out = integrate_frames(&rates, q, &times, &g, &interior);
    let mut traj = to_trajectory(*u.grid(), u.tgrid(), with_initial, out, None)?;
    if let Some(d) = deficit {
        log::warn!("bilinear B: no initial data, dropped [0, t_1] (deficit ~ {d:.3e})");
        traj.initial_segment_deficit = Some(d);
    }
    Ok(traj)
}

fn frames_for(traj: &Trajectory, with_initial: bool) -> Vec<(f64, &ScalarField)> {
    let mut f = traj.frames();
    if !with_initial && traj.initial().is_some() {
        f.remove(0);
    }
    f
}

/// `∫_0^t e^{-(t-τ) a(ξ)} m(ξ) ĝ(τ, ξ) dτ` for arbitrary per-mode decay
/// rates `a ≥ 0` and an optional real symbol `m`, both in storage order.
pub fn duhamel_multiplier(
    g: &Trajectory,
    q: QuadratureScheme,
    rates: &[f64],
    symbol: Option<&[f64]>,
) -> Result<Trajectory> {
    let len = g.grid().len();
    if rates.len() != len || symbol.map_or(false, |m| m.len() != len) {
        return Err(KsError::ShapeMismatch(format!(
            "multiplier arrays must have {len} entries"
        )));
    }
    if rates.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(KsError::InvalidMultiplier(
            "decay rates must be finite and non-negative".into(),
        ));
    }
    linear_integral(g, q, rates, symbol)
}

fn linear_integral(
    g: &Trajectory,
    q: QuadratureScheme,
    rates: &[f64],
    symbol: Option<&[f64]>,
) -> Result<Trajectory> {
    check_nonempty(g)?;
    let with_initial = g.initial().is_some();
    let times = frame_times(g);
    let spec: Vec<SpectralField> = g
        .frames()
        .par_iter()
        .map(|(_, f)| f.to_spectral())
        .collect();
    let interior = |j: usize, theta: f64| lerp_spectral(&spec[j - 1], &spec[j], theta);
    let out = integrate_frames(rates, q, &times, &spec, &interior);
    let mut traj = to_trajectory(*g.grid(), g.tgrid(), with_initial, out, symbol)?;
    if !with_initial {
        let d = times[0] * lp_norm(g.field(0), f64::INFINITY);
        log::warn!("Duhamel integral: no initial datum, dropped [0, t_1] (deficit ~ {d:.3e})");
        traj.initial_segment_deficit = Some(d);
    }
    Ok(traj)
}

/// `L(u)(t) = ∫_0^t e^{(t-τ)(Δ-1)} u(τ) dτ` at every node.
pub fn linear_l(u: &Trajectory, q: QuadratureScheme) -> Result<Trajectory> {
    linear_integral(u, q, &damped_rates(u.grid()), None)
}

/// `∫_0^t e^{(t-τ)Δ} u(τ) dτ`: the undamped `L` of the `v_t - Δv + u = 0`
/// variant.
pub fn linear_l_undamped(u: &Trajectory, q: QuadratureScheme) -> Result<Trajectory> {
    linear_integral(u, q, &heat_rates(u.grid()), None)
}

/// `Tg(t) = ∫_0^t e^{(t-τ)Δ} Δg(τ) dτ` at every node.
pub fn maximal_reg_t(g: &Trajectory, q: QuadratureScheme) -> Result<Trajectory> {
    let rates = heat_rates(g.grid());
    let symbol: Vec<f64> = rates.iter().map(|k| -k).collect();
    linear_integral(g, q, &rates, Some(&symbol))
}

/// `L` applied to the free evolution `τ ↦ e^{τΔ} u0`, in closed form:
/// per mode `û0 e^{-t|ξ|^2} (1 - e^{-t})`, or `û0 t e^{-t|ξ|^2}` without
/// damping.
pub fn linear_l_of_heat_datum(
    u0: &ScalarField,
    tgrid: &TimeGrid,
    damped: bool,
    with_initial: bool,
) -> Result<Trajectory> {
    let grid = *u0.grid();
    let spec = u0.to_spectral();
    let xi2 = grid.xi_squared();
    let at = |t: f64| {
        let factor = if damped { -(-t).exp_m1() } else { t };
        let mut s = spec.clone();
        for (c, k) in s.coeffs_mut().iter_mut().zip(&xi2) {
            *c *= (-t * k).exp() * factor;
        }
        s.to_real()
    };
    Trajectory::from_fn(grid, tgrid, with_initial, at)
}
