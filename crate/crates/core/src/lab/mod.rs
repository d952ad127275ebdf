//! Numerical checks of the linear, bilinear and multiplier estimates behind
//! the contraction argument, empirical constants, and the indicator-data
//! counterexample.
//!
//! Every check reports one row per sample (`lhs`, `rhs`, `ratio`) and is run
//! again with `n`, `K` and `T` doubled to measure the drift of the largest
//! ratio.

mod bilinear;
mod constants;
mod counterexample;
mod maxreg;
mod multiplier;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{KsError, Result};
use crate::field::{Grid2D, ScalarField};

pub use bilinear::verify_bilinear_estimates;
pub use constants::{
    estimate_constants, sample_family, ConstantsConfig, ConstantsReport, SAFETY_FACTOR,
};
pub use counterexample::{
    counterexample_c0, counterexample_grid_check, counterexample_profile, counterexample_sweep,
    CounterexamplePoint, CounterexampleReport, CounterexampleVerdict, GridComparison,
};
pub use maxreg::verify_maximal_regularity;
pub use multiplier::verify_multiplier_lemma;

/// Resolution of one lab run. Fields are defined analytically, so the same
/// samples are reproduced at any `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabConfig {
    pub n: usize,
    pub l: f64,
    /// time nodes
    pub k: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub seed: u64,
}

impl Default for LabConfig {
    fn default() -> Self {
        Self {
            n: 64,
            l: 2.0 * PI,
            k: 128,
            t_min: 1e-6,
            t_max: 100.0,
            seed: 20_240_601,
        }
    }
}

impl LabConfig {
    /// `n`, `K` and `T` doubled.
    pub fn doubled(&self) -> Self {
        Self {
            n: 2 * self.n,
            k: 2 * self.k,
            t_max: 2.0 * self.t_max,
            ..*self
        }
    }

    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::new(self.n, self.l)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        self.grid()?;
        if self.k < 2 || !(self.t_min > 0.0 && self.t_max > self.t_min) {
            return Err(KsError::InvalidTime(format!(
                "lab time grid needs K >= 2 and 0 < t_min < t_max (got K={}, [{}, {}])",
                self.k, self.t_min, self.t_max
            )));
        }
        Ok(())
    }

    /// Wavenumber multiples `1, 2, 4, … , ⌊(n-1)/3⌋` in units of `2π/l`.
    pub(crate) fn mode_sweep(&self) -> Vec<i64> {
        let top = ((self.n - 1) / 3) as i64;
        let mut ks: Vec<i64> = std::iter::successors(Some(1i64), |k| Some(2 * k))
            .take_while(|&k| k < top)
            .collect();
        ks.push(top);
        ks
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabRow {
    pub family: String,
    pub params: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl LabRow {
    pub(crate) fn new(family: &str, params: String, lhs: f64, rhs: f64) -> Self {
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        Self {
            family: family.to_string(),
            params,
            lhs,
            rhs,
            ratio,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl LabCheck {
    pub(crate) fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabReport {
    pub name: String,
    pub config: LabConfig,
    pub rows: Vec<LabRow>,
    pub max_ratio: f64,
    pub checks: Vec<LabCheck>,
    pub passed: bool,
}

impl LabReport {
    pub(crate) fn new(
        name: &str,
        config: LabConfig,
        rows: Vec<LabRow>,
        checks: Vec<LabCheck>,
    ) -> Self {
        let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
        let passed = checks.iter().all(|c| c.passed) && rows.iter().all(|r| r.ratio.is_finite());
        Self {
            name: name.to_string(),
            config,
            rows,
            max_ratio,
            checks,
            passed,
        }
    }

    /// Largest ratio among rows whose family starts with `prefix`.
    pub fn max_ratio_of(&self, prefix: &str) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.family.starts_with(prefix))
            .map(|r| r.ratio)
            .fold(0.0, f64::max)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &LabCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows)
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn rows_to_csv(rows: &[LabRow]) -> String {
    let mut out = String::from("family,params,lhs,rhs,ratio\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:e},{:e},{:e}\n",
            csv_field(&r.family),
            csv_field(&r.params),
            r.lhs,
            r.rhs,
            r.ratio
        ));
    }
    out
}

/// Change of the largest ratio per family prefix between a run and its
/// doubled counterpart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftEntry {
    pub family: String,
    pub base: f64,
    pub doubled: f64,
    pub drift: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub name: String,
    pub tolerance: f64,
    pub entries: Vec<DriftEntry>,
    pub passed: bool,
}

/// Relative drift of each family's largest ratio.
pub fn ratio_drift(base: &LabReport, doubled: &LabReport, tolerance: f64) -> DriftReport {
    let mut families: Vec<&str> = base.rows.iter().map(|r| r.family.as_str()).collect();
    families.dedup();
    let entries: Vec<DriftEntry> = families
        .into_iter()
        .map(|f| {
            let (a, b) = (base.max_ratio_of(f), doubled.max_ratio_of(f));
            let drift = if a == 0.0 && b == 0.0 {
                0.0
            } else {
                (b - a).abs() / a.abs().max(b.abs())
            };
            DriftEntry {
                family: f.to_string(),
                base: a,
                doubled: b,
                drift,
                passed: drift < tolerance,
            }
        })
        .collect();
    let passed = entries.iter().all(|e| e.passed);
    DriftReport {
        name: base.name.clone(),
        tolerance,
        entries,
        passed,
    }
}

/// Runs `check` at `cfg` and at `cfg.doubled()`.
pub fn with_refinement(
    cfg: &LabConfig,
    tolerance: f64,
    check: impl Fn(&LabConfig) -> Result<LabReport>,
) -> Result<(LabReport, LabReport, DriftReport)> {
    let a = check(cfg)?;
    let b = check(&cfg.doubled())?;
    let d = ratio_drift(&a, &b, tolerance);
    Ok((a, b, d))
}

/// Seeded low-mode field `Σ_{|k_i| ≤ kmax} (a_k cos k·x + b_k sin k·x)/(1+|k|²)`,
/// defined analytically so it is the same function at every resolution.
#[derive(Debug, Clone)]
pub(crate) struct RandomLowModes {
    terms: Vec<(f64, f64, f64, f64)>,
}

impl RandomLowModes {
    pub(crate) fn new(seed: u64, kmax: i64, l: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = 2.0 * PI / l;
        let mut terms = Vec::new();
        for k1 in -kmax..=kmax {
            for k2 in 0..=kmax {
                if k2 == 0 && k1 < 0 {
                    continue;
                }
                let damp = 1.0 / (1.0 + (k1 * k1 + k2 * k2) as f64);
                let a: f64 = rng.gen_range(-1.0..1.0) * damp;
                let b: f64 = if k1 == 0 && k2 == 0 {
                    0.0
                } else {
                    rng.gen_range(-1.0..1.0) * damp
                };
                terms.push((k1 as f64 * w, k2 as f64 * w, a, b));
            }
        }
        Self { terms }
    }

    pub(crate) fn field(&self, grid: Grid2D) -> ScalarField {
        ScalarField::from_fn(grid, |x1, x2| {
            self.terms
                .iter()
                .map(|&(k1, k2, a, b)| {
                    let p = k1 * x1 + k2 * x2;
                    a * p.cos() + b * p.sin()
                })
                .sum()
        })
    }
}

/// `cos(2π k x1 / l)`
pub(crate) fn x1_mode(grid: Grid2D, k: i64) -> ScalarField {
    let w = 2.0 * PI * k as f64 / grid.l();
    ScalarField::from_fn(grid, |x1, _| (w * x1).cos())
}
