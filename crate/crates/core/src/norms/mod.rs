//! Spatial norms, the heat-flow Besov norm, and the weighted space-time
//! norms of the two well-posedness settings.
//!
//! Suprema over `t > 0` are maxima over the nodes of a [`TimeGrid`] (plus
//! the `t -> 0+` limit when a trajectory carries its initial datum); time
//! integrals use the trapezoid rule on the nodes.

mod time;

pub use time::{Spacing, TimeGrid, Trajectory};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{KsError, Result};
use crate::field::{gradient, gradient_spectral, ScalarField, SpectralField};

/// `(sum |f|^p h^2)^{1/p}`, or `max |f|` for `p = inf`.
pub fn lp_norm(f: &ScalarField, p: f64) -> f64 {
    let v = f.values();
    if p.is_infinite() {
        return v.iter().fold(0.0, |m, x| m.max(x.abs()));
    }
    let area = f.grid().cell_area();
    if p == 1.0 {
        return v.iter().map(|x| x.abs()).sum::<f64>() * area;
    }
    if p == 2.0 {
        return (v.iter().map(|x| x * x).sum::<f64>() * area).sqrt();
    }
    (v.iter().map(|x| x.abs().powf(p)).sum::<f64>() * area).powf(1.0 / p)
}

/// `sum_k weight(|xi|^2) |F(k)|^2 * l^2 / n^4`.
pub(crate) fn weighted_spectral_sum(s: &SpectralField, weight: impl Fn(f64) -> f64) -> f64 {
    let grid = s.grid();
    let xi2 = grid.xi_squared();
    let norm = grid.l() * grid.l() / (grid.len() as f64).powi(2);
    s.coeffs()
        .iter()
        .zip(&xi2)
        .map(|(c, &k2)| weight(k2) * c.norm_sqr())
        .sum::<f64>()
        * norm
}

/// Inhomogeneous Sobolev norm with weight `(1 + |xi|^2)^{s/2}`;
/// `hs_norm(f, 0) == lp_norm(f, 2)`.
pub fn hs_norm(f: &ScalarField, s: f64) -> f64 {
    weighted_spectral_sum(&f.to_spectral(), |k2| (1.0 + k2).powf(s)).sqrt()
}

/// Homogeneous Sobolev norm with weight `|xi|^s` (the zero mode counts only
/// for `s = 0`).
pub fn hs_dot_norm(f: &ScalarField, s: f64) -> f64 {
    hs_dot_norm_spectral(&f.to_spectral(), s)
}

pub(crate) fn hs_dot_norm_spectral(f: &SpectralField, s: f64) -> f64 {
    weighted_spectral_sum(f, |k2| {
        if s == 0.0 {
            1.0
        } else if k2 == 0.0 {
            0.0
        } else {
            k2.powf(s)
        }
    })
    .sqrt()
}

/// Pointwise `sqrt(g1^2 + g2^2)`.
pub fn grad_magnitude(g1: &ScalarField, g2: &ScalarField) -> ScalarField {
    let v = g1
        .values()
        .iter()
        .zip(g2.values())
        .map(|(a, b)| a.hypot(*b))
        .collect();
    ScalarField::new(*g1.grid(), v).expect("same grid, finite inputs")
}

/// `max_x |∇f(x)|`.
pub fn grad_sup(f: &ScalarField) -> f64 {
    let (a, b) = gradient(f);
    lp_norm(&grad_magnitude(&a, &b), f64::INFINITY)
}

/// `σ(t) = t^{1/2} (1 + t)^{-1/2}`.
pub fn sigma(t: f64) -> f64 {
    (t / (1.0 + t)).sqrt()
}

/// Result of a heat-flow supremum over a probe grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovEstimate {
    pub value: f64,
    pub argmax_time: f64,
    /// The maximum sat on the first or last probe time, so the supremum is
    /// not resolved by the probe window.
    pub at_boundary: bool,
}

fn besov_probe_check(s: f64, probe: &TimeGrid) -> Result<()> {
    if !(s < 0.0) {
        return Err(KsError::InvalidArgument(format!(
            "Besov index s = {s} must be negative"
        )));
    }
    if probe.t_max() / probe.t_min() < 1e6 * (1.0 - 1e-12) || probe.spacing() != Spacing::Geometric
    {
        return Err(KsError::InvalidArgument(
            "Besov probe must be geometric and span at least 6 decades".into(),
        ));
    }
    Ok(())
}

fn besov_sup(
    f: &ScalarField,
    s: f64,
    probe: &TimeGrid,
    eval: impl Fn(&SpectralField) -> f64 + Sync,
) -> BesovEstimate {
    let spec = f.to_spectral();
    let xi2 = f.grid().xi_squared();
    let values: Vec<f64> = probe
        .times()
        .par_iter()
        .map(|&t| {
            let mut st = spec.clone();
            for (c, k2) in st.coeffs_mut().iter_mut().zip(&xi2) {
                *c *= (-t * k2).exp();
            }
            t.powf(-0.5 * s) * eval(&st)
        })
        .collect();
    let (j, value) = argmax(&values);
    let at_boundary = value > 0.0 && (j == 0 || j + 1 == values.len());
    let argmax_time = probe.times()[j];
    if at_boundary {
        log::warn!("Besov supremum attained at probe boundary t = {argmax_time}; not resolved");
    }
    BesovEstimate {
        value,
        argmax_time,
        at_boundary,
    }
}

/// `sup_t t^{-s/2} ||e^{tΔ} f||_{L^p}` over the probe times (s < 0).
pub fn besov_norm(f: &ScalarField, s: f64, p: f64, probe: &TimeGrid) -> Result<BesovEstimate> {
    besov_probe_check(s, probe)?;
    Ok(besov_sup(f, s, probe, |st| lp_norm(&st.to_real(), p)))
}

/// `sup_t t^{-s/2} || |∇ e^{tΔ} f| ||_{L^p}`: the Besov norm of `∇f`.
pub fn besov_norm_grad(f: &ScalarField, s: f64, p: f64, probe: &TimeGrid) -> Result<BesovEstimate> {
    besov_probe_check(s, probe)?;
    Ok(besov_sup(f, s, probe, |st| {
        let (a, b) = gradient_spectral(st);
        lp_norm(&grad_magnitude(&a.to_real(), &b.to_real()), p)
    }))
}

pub(crate) fn argmax(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bj, bv), (j, v)| {
            if v > bv {
                (j, v)
            } else {
                (bj, bv)
            }
        })
}

/// Trapezoid rule on (possibly non-uniform) nodes.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEntry {
    pub value: f64,
    pub setting: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub argmax_time: Option<f64>,
}

/// Named norm values, serialized as `{name: {value, setting, argmax_time?}}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormReport {
    pub entries: BTreeMap<String, NormEntry>,
}

impl NormReport {
    pub fn insert(&mut self, name: &str, value: f64, tag: &str, argmax_time: Option<f64>) {
        self.entries.insert(
            name.to_string(),
            NormEntry {
                value,
                setting: tag.to_string(),
                argmax_time,
            },
        );
    }

    pub fn get(&self, name: &str) -> f64 {
        self.entries.get(name).map(|e| e.value).unwrap_or(f64::NAN)
    }

    pub fn entry(&self, name: &str) -> Option<&NormEntry> {
        self.entries.get(name)
    }

    pub fn all_finite_nonnegative(&self) -> bool {
        self.entries
            .values()
            .all(|e| e.value.is_finite() && e.value >= 0.0)
    }
}

/// Per-node quantities entering the `L^1 x L^∞` setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thm1Node {
    pub t: f64,
    pub u_l1: f64,
    pub t_u_linf: f64,
    pub t12_grad_w_linf: f64,
}

pub fn thm1_profile(u: &Trajectory, w: &Trajectory) -> Result<Vec<Thm1Node>> {
    u.check_compatible(w)?;
    let uf = u.frames();
    let wf = w.frames();
    let (uf, wf) = align_frames(uf, wf);
    Ok(uf
        .par_iter()
        .zip(wf.par_iter())
        .map(|(&(t, uu), &(_, ww))| Thm1Node {
            t,
            u_l1: lp_norm(uu, 1.0),
            t_u_linf: t * lp_norm(uu, f64::INFINITY),
            t12_grad_w_linf: if t == 0.0 {
                0.0
            } else {
                t.sqrt() * grad_sup(ww)
            },
        })
        .collect())
}

/// Drops the t = 0 frame unless both sides carry it.
fn align_frames<'a>(
    mut a: Vec<(f64, &'a ScalarField)>,
    mut b: Vec<(f64, &'a ScalarField)>,
) -> (Vec<(f64, &'a ScalarField)>, Vec<(f64, &'a ScalarField)>) {
    if a.len() != b.len() {
        if a.len() > b.len() {
            a.remove(0);
        } else {
            b.remove(0);
        }
    }
    (a, b)
}

fn sup_entry(report: &mut NormReport, name: &str, tag: &str, times: &[f64], values: &[f64]) -> f64 {
    let (j, v) = argmax(values);
    report.insert(name, v, tag, Some(times[j]));
    v
}

/// Norms of the `L^1 x L^∞` setting: `||u||_X = sup ||u||_1 + sup t ||u||_∞`,
/// `||w||_Y = sup t^{1/2} ||∇w||_∞`.
pub fn xy_norms_thm1(u: &Trajectory, w: &Trajectory) -> Result<NormReport> {
    let prof = thm1_profile(u, w)?;
    Ok(thm1_report(&prof))
}

pub fn thm1_report(prof: &[Thm1Node]) -> NormReport {
    let times: Vec<f64> = prof.iter().map(|p| p.t).collect();
    let mut r = NormReport::default();
    let a = sup_entry(
        &mut r,
        "u_l1_sup",
        "l1_linf",
        &times,
        &prof.iter().map(|p| p.u_l1).collect::<Vec<_>>(),
    );
    let b = sup_entry(
        &mut r,
        "u_t_linf_sup",
        "l1_linf",
        &times,
        &prof.iter().map(|p| p.t_u_linf).collect::<Vec<_>>(),
    );
    let c = sup_entry(
        &mut r,
        "w_t12_grad_linf_sup",
        "l1_linf",
        &times,
        &prof.iter().map(|p| p.t12_grad_w_linf).collect::<Vec<_>>(),
    );
    r.insert("X", a + b, "l1_linf", None);
    r.insert("Y", c, "l1_linf", None);
    r.insert("XY", a + b + c, "l1_linf", None);
    r
}

/// Per-node quantities entering the `H^1_b x H^1` setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thm2Node {
    pub t: f64,
    pub u_h1: f64,
    pub u_linf: f64,
    /// `||∇u||_{H^1}^2`
    pub u_grad_h1_sq: f64,
    /// `||∇u||_{L^2}^2`
    pub u_grad_l2_sq: f64,
    pub w_h1: f64,
    pub w_grad_h1_sq: f64,
    pub sigma_grad_w_linf: f64,
}

fn thm2_node(t: f64, u: &ScalarField, w: &ScalarField) -> Thm2Node {
    let us = u.to_spectral();
    let ws = w.to_spectral();
    Thm2Node {
        t,
        u_h1: weighted_spectral_sum(&us, |k2| 1.0 + k2).sqrt(),
        u_linf: lp_norm(u, f64::INFINITY),
        u_grad_h1_sq: weighted_spectral_sum(&us, |k2| k2 * (1.0 + k2)),
        u_grad_l2_sq: weighted_spectral_sum(&us, |k2| k2),
        w_h1: weighted_spectral_sum(&ws, |k2| 1.0 + k2).sqrt(),
        w_grad_h1_sq: weighted_spectral_sum(&ws, |k2| k2 * (1.0 + k2)),
        sigma_grad_w_linf: if t == 0.0 {
            0.0
        } else {
            let (a, b) = gradient_spectral(&ws);
            sigma(t) * lp_norm(&grad_magnitude(&a.to_real(), &b.to_real()), f64::INFINITY)
        },
    }
}

pub fn thm2_profile(u: &Trajectory, w: &Trajectory) -> Result<Vec<Thm2Node>> {
    u.check_compatible(w)?;
    let (uf, wf) = align_frames(u.frames(), w.frames());
    Ok(uf
        .par_iter()
        .zip(wf.par_iter())
        .map(|(&(t, uu), &(_, ww))| thm2_node(t, uu, ww))
        .collect())
}

/// Norms of the `H^1_b x H^1` setting: `||u||_X = sup ||u||_{H^1} + ||∇u||_{L^2_t H^1} +
/// ||u||_{L^∞_t L^∞}` and `||w||_Y = sup ||w||_{H^1} + ||∇w||_{L^2_t H^1} +
/// ||σ∇w||_{L^∞_t L^∞}`.
pub fn xy_norms_thm2(u: &Trajectory, w: &Trajectory) -> Result<NormReport> {
    let prof = thm2_profile(u, w)?;
    Ok(thm2_report(&prof))
}

pub fn thm2_report(prof: &[Thm2Node]) -> NormReport {
    let times: Vec<f64> = prof.iter().map(|p| p.t).collect();
    let col = |f: fn(&Thm2Node) -> f64| prof.iter().map(f).collect::<Vec<f64>>();
    let mut r = NormReport::default();
    let u_h1 = sup_entry(&mut r, "u_h1_sup", "h1b_h1", &times, &col(|p| p.u_h1));
    let u_inf = sup_entry(&mut r, "u_linf_linf", "h1b_h1", &times, &col(|p| p.u_linf));
    let u_l2 = trapezoid(&times, &col(|p| p.u_grad_h1_sq)).sqrt();
    r.insert("u_grad_l2t_h1", u_l2, "h1b_h1", None);
    let u_l2l2 = trapezoid(&times, &col(|p| p.u_grad_l2_sq)).sqrt();
    r.insert("u_grad_l2t_l2", u_l2l2, "energy", None);
    let w_h1 = sup_entry(&mut r, "w_h1_sup", "h1b_h1", &times, &col(|p| p.w_h1));
    let w_l2 = trapezoid(&times, &col(|p| p.w_grad_h1_sq)).sqrt();
    r.insert("w_grad_l2t_h1", w_l2, "h1b_h1", None);
    let w_sig = sup_entry(
        &mut r,
        "w_sigma_grad_linf",
        "h1b_h1",
        &times,
        &col(|p| p.sigma_grad_w_linf),
    );
    if times[0] > 0.0 {
        // [0, t_1] is not covered without an initial datum; report a
        // rectangle estimate of the dropped L^2_t mass.
        r.insert(
            "l2t_dropped_segment_u",
            times[0] * prof[0].u_grad_h1_sq,
            "h1b_h1",
            None,
        );
        r.insert(
            "l2t_dropped_segment_w",
            times[0] * prof[0].w_grad_h1_sq,
            "h1b_h1",
            None,
        );
    }
    r.insert("X", u_h1 + u_l2 + u_inf, "h1b_h1", None);
    r.insert("Y", w_h1 + w_l2 + w_sig, "h1b_h1", None);
    r.insert(
        "XY",
        u_h1 + u_l2 + u_inf + w_h1 + w_l2 + w_sig,
        "h1b_h1",
        None,
    );
    r
}

#[cfg(test)]
mod tests;
