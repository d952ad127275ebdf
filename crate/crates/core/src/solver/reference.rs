//! Integrating-factor RK4 (Lawson) in Fourier space.
//!
//! The linear part, including the `u → v` source, is propagated exactly per
//! mode:
//!
//! ```text
//! û(t) = e^{-λt} û0
//! v̂(t) = e^{-(1+λ)t} v̂0 + e^{-λt}(1 - e^{-t}) û0        (λ = |ξ|²)
//! ```
//!
//! and only `-∇·(u∇v)` is stepped explicitly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SolverConfig;
use crate::duhamel::flux_divergence_spectral;
use crate::error::{KsError, Result};
use crate::field::{Grid2D, ScalarField, SpectralField};
use crate::norms::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceOptions {
    /// Upper bound on the step; each node interval gets at least 4 steps.
    pub max_step: f64,
    /// Drop `∇·(u∇v)` for the linear regime.
    pub nonlinear: bool,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self {
            max_step: 0.05,
            nonlinear: true,
        }
    }
}

impl ReferenceOptions {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.max_step.is_finite() && self.max_step > 0.0) {
            return Err(KsError::InvalidArgument(format!(
                "reference max_step must be positive, got {}",
                self.max_step
            )));
        }
        Ok(())
    }
}

const MAX_HALVINGS: u32 = 20;

/// Per-mode linear propagator over a step `h`.
struct Propagator {
    uu: Vec<f64>,
    vv: Vec<f64>,
    vu: Vec<f64>,
}

impl Propagator {
    fn new(xi2: &[f64], h: f64, undamped: bool) -> Self {
        let uu: Vec<f64> = xi2.iter().map(|k| (-k * h).exp()).collect();
        let (vv, vu) = if undamped {
            (uu.clone(), uu.iter().map(|e| e * h).collect())
        } else {
            let d = -(-h).exp_m1();
            (
                uu.iter().map(|e| e * (-h).exp()).collect(),
                uu.iter().map(|e| e * d).collect(),
            )
        };
        Self { uu, vv, vu }
    }

    fn apply(&self, u: &[Complex64], v: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let nu = u.iter().zip(&self.uu).map(|(x, e)| x * e).collect();
        let nv = v
            .iter()
            .zip(u)
            .zip(self.vv.iter().zip(&self.vu))
            .map(|((y, x), (a, b))| y * a + x * b)
            .collect();
        (nu, nv)
    }

    /// Propagates a pure `u`-forcing `(f, 0)`.
    fn apply_forcing(&self, f: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        (
            f.iter().zip(&self.uu).map(|(x, e)| x * e).collect(),
            f.iter().zip(&self.vu).map(|(x, e)| x * e).collect(),
        )
    }
}

fn axpy(y: &[Complex64], a: f64, x: &[Complex64]) -> Vec<Complex64> {
    y.iter().zip(x).map(|(p, q)| p + q * a).collect()
}

fn l2(x: &[Complex64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

struct Stepper {
    grid: Grid2D,
    xi2: Vec<f64>,
    undamped: bool,
    nonlinear: bool,
}

impl Stepper {
    fn nonlinearity(&self, u: &[Complex64], v: &[Complex64]) -> Result<Vec<Complex64>> {
        if !self.nonlinear {
            return Ok(vec![Complex64::new(0.0, 0.0); u.len()]);
        }
        let us = SpectralField::new(self.grid, u.to_vec())?;
        let vs = SpectralField::new(self.grid, v.to_vec())?;
        Ok(flux_divergence_spectral(&us, &vs)?
            .into_coeffs()
            .into_iter()
            .map(|c| -c)
            .collect())
    }

    /// One Lawson-RK4 step; `k1 = N(u, v)`.
    fn step(
        &self,
        h: f64,
        u: &[Complex64],
        v: &[Complex64],
        k1: &[Complex64],
    ) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let half = Propagator::new(&self.xi2, 0.5 * h, self.undamped);
        let full = Propagator::new(&self.xi2, h, self.undamped);
        let (eu, ev) = half.apply(u, v);
        let (ek1u, ek1v) = half.apply_forcing(k1);
        let k2 = self.nonlinearity(&axpy(&eu, 0.5 * h, &ek1u), &axpy(&ev, 0.5 * h, &ek1v))?;
        let k3 = self.nonlinearity(&axpy(&eu, 0.5 * h, &k2), &ev)?;
        let (fu, fv) = full.apply(u, v);
        let (ek3u, ek3v) = half.apply_forcing(&k3);
        let k4 = self.nonlinearity(&axpy(&fu, h, &ek3u), &axpy(&fv, h, &ek3v))?;
        let (f1u, f1v) = full.apply_forcing(k1);
        let k23: Vec<Complex64> = k2.iter().zip(&k3).map(|(a, b)| a + b).collect();
        let (f23u, f23v) = half.apply_forcing(&k23);
        let nu = (0..u.len())
            .map(|i| fu[i] + (f1u[i] + 2.0 * f23u[i] + k4[i]) * (h / 6.0))
            .collect();
        let nv = (0..u.len())
            .map(|i| fv[i] + (f1v[i] + 2.0 * f23v[i]) * (h / 6.0))
            .collect();
        Ok((nu, nv))
    }
}

/// Solves the unscaled system for `(u, v)` by integrating-factor RK4 and
/// samples the result at the time-grid nodes.
///
/// Every node interval is split into `max(4, ⌈gap/max_step⌉)` equal steps. A
/// step is rejected and halved when the nonlinear term more than doubles
/// across it while contributing a non-negligible increment.
pub fn reference_solve(
    u0: &ScalarField,
    v0: &ScalarField,
    cfg: &SolverConfig,
) -> Result<(Trajectory, Trajectory)> {
    cfg.validate()?;
    cfg.grid.check_same(u0.grid())?;
    cfg.grid.check_same(v0.grid())?;
    let st = Stepper {
        grid: cfg.grid,
        xi2: cfg.grid.xi_squared(),
        undamped: cfg.undamped,
        nonlinear: cfg.reference.nonlinear,
    };
    let mut u = u0.to_spectral().into_coeffs();
    let mut v = v0.to_spectral().into_coeffs();
    let mut k1 = st.nonlinearity(&u, &v)?;
    let mut t = 0.0;
    let mut us = Vec::with_capacity(cfg.tgrid.len());
    let mut vs = Vec::with_capacity(cfg.tgrid.len());
    for (node, &tn) in cfg.tgrid.times().iter().enumerate() {
        let gap = tn - t;
        let steps = ((gap / cfg.reference.max_step).ceil() as usize).max(4);
        let h0 = gap / steps as f64;
        let mut s = t;
        for i in 0..steps {
            let target = if i + 1 == steps {
                tn
            } else {
                t + (i + 1) as f64 * h0
            };
            // advance s -> target, halving on rejection
            while s < target {
                let mut h = target - s;
                let mut halvings = 0;
                loop {
                    let (nu, nv) = st.step(h, &u, &v, &k1)?;
                    let nk = st.nonlinearity(&nu, &nv)?;
                    let (a, b) = (l2(&k1), l2(&nk));
                    if b > 2.0 * a && h * b > 1e-6 * l2(&nu) {
                        halvings += 1;
                        if halvings > MAX_HALVINGS {
                            return Err(KsError::StepRejected {
                                time: s,
                                reason: format!(
                                    "nonlinear term grew from {a:.3e} to {b:.3e} at step {h:.3e}"
                                ),
                            });
                        }
                        h *= 0.5;
                        continue;
                    }
                    u = nu;
                    v = nv;
                    k1 = nk;
                    s = if halvings == 0 { target } else { s + h };
                    break;
                }
            }
        }
        t = tn;
        let uf = SpectralField::new(cfg.grid, u.clone())?.to_real();
        let vf = SpectralField::new(cfg.grid, v.clone())?.to_real();
        if !uf.is_finite() || !vf.is_finite() {
            return Err(KsError::NonFinite {
                node,
                time: tn,
                what: "reference solution".into(),
            });
        }
        us.push(uf);
        vs.push(vf);
    }
    Ok((
        Trajectory::new(cfg.grid, cfg.tgrid.clone(), us, Some(u0.clone()))?,
        Trajectory::new(cfg.grid, cfg.tgrid.clone(), vs, Some(v0.clone()))?,
    ))
}
