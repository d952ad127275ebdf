//! Checks of the global a-priori bounds on a converged run.

use serde::{Deserialize, Serialize};

use super::{SolutionReport, TheoremMode};
use crate::error::{KsError, Result};
use crate::norms::{besov_norm_grad, hs_norm, lp_norm, thm1_profile, TimeGrid, Trajectory};
use crate::semigroup::heat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    HypothesisNotSatisfied,
    NotConverged,
}

/// `sup(‖u‖₁ + t‖u‖_∞ + t^{1/2}‖∇v‖_∞/(4c)) ≤ 2 sup(same for the free heat
/// flow of (u0, v0))`, plus the sufficient smallness condition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Thm1Verdict {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub bound_holds: bool,
    pub a0: f64,
    pub threshold: f64,
    /// `2‖u0‖₁ + ‖∇v0‖_{Ḃ^{-1}_{∞,∞}}/(4c)`
    pub sufficient_lhs: f64,
    pub sufficient_holds: bool,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Thm2Verdict {
    /// `sup‖u‖_{H¹} + sup‖w‖_{H¹} + sup‖u‖_∞ + sup σ‖∇w‖_∞ + ‖∇u‖_{L²_tL²} + ‖∇w‖_{L²_tH¹}`
    pub sum: f64,
    /// `‖u0‖_∞ + ‖u0‖_{H¹} + ‖w0‖_{H¹}`
    pub data_norm: f64,
    pub eps0: f64,
    pub hypothesis_satisfied: bool,
    pub bound_holds: bool,
    pub verdict: Verdict,
}

fn data(report: &SolutionReport) -> Result<&super::SolutionData> {
    report
        .data
        .as_ref()
        .ok_or_else(|| KsError::InvalidArgument("report carries no trajectories".into()))
}

fn sup_sum(u: &Trajectory, w: &Trajectory) -> Result<f64> {
    Ok(thm1_profile(u, w)?
        .iter()
        .map(|p| p.u_l1 + p.t_u_linf + p.t12_grad_w_linf)
        .fold(0.0, f64::max))
}

pub fn check_theorem1_bound(report: &SolutionReport) -> Result<Thm1Verdict> {
    let d = data(report)?;
    let grid = *d.u0.grid();
    let tg = d.u.tgrid();
    // the comparison flow is the plain heat flow of both data
    let fu = Trajectory::from_fn(grid, tg, true, |t| heat(t, &d.u0).expect("t >= 0"))?;
    let fw = Trajectory::from_fn(grid, tg, true, |t| heat(t, &d.w0).expect("t >= 0"))?;
    let lhs = sup_sum(&d.u, &d.w)?;
    let rhs = sup_sum(&fu, &fw)?;
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
    let bound_holds = lhs <= 2.0 * rhs;

    let h = grid.h();
    let l = grid.l();
    let probe = TimeGrid::geometric(1e-4 * h * h, 10.0 * l * l, 96)?;
    let besov = besov_norm_grad(&d.w0, -1.0, f64::INFINITY, &probe)?.value;
    let sufficient_lhs = 2.0 * lp_norm(&d.u0, 1.0) + besov;
    let threshold = report.threshold;
    let verdict = if !report.converged {
        Verdict::NotConverged
    } else if !report.below_threshold {
        Verdict::HypothesisNotSatisfied
    } else if bound_holds {
        Verdict::Holds
    } else {
        Verdict::Violated
    };
    Ok(Thm1Verdict {
        lhs,
        rhs,
        ratio,
        bound_holds,
        a0: report.a0,
        threshold,
        sufficient_lhs,
        sufficient_holds: sufficient_lhs <= threshold,
        verdict,
    })
}

/// `eps0 = None` uses the data norm itself.
pub fn check_theorem2_bound(report: &SolutionReport, eps0: Option<f64>) -> Result<Thm2Verdict> {
    let d = data(report)?;
    let n = if report.mode == TheoremMode::Thm2H1bH1 {
        report.norms_thm2.clone()
    } else {
        crate::norms::xy_norms_thm2(&d.u, &d.w)?
    };
    let sum = [
        "u_h1_sup",
        "w_h1_sup",
        "u_linf_linf",
        "w_sigma_grad_linf",
        "u_grad_l2t_l2",
        "w_grad_l2t_h1",
    ]
    .iter()
    .map(|k| n.get(k))
    .sum::<f64>();
    let data_norm = lp_norm(&d.u0, f64::INFINITY) + hs_norm(&d.u0, 1.0) + hs_norm(&d.w0, 1.0);
    let eps0 = eps0.unwrap_or(data_norm);
    let hypothesis_satisfied = data_norm <= eps0 * (1.0 + 1e-12);
    let bound_holds = sum <= 2.0 * eps0;
    let verdict = if !hypothesis_satisfied {
        Verdict::HypothesisNotSatisfied
    } else if !report.converged {
        Verdict::NotConverged
    } else if bound_holds {
        Verdict::Holds
    } else {
        Verdict::Violated
    };
    Ok(Thm2Verdict {
        sum,
        data_norm,
        eps0,
        hypothesis_satisfied,
        bound_holds,
        verdict,
    })
}
