//! Subcommand bodies. Each returns `Ok(true)` on success, `Ok(false)` on a
//! scientific failure (exit 1); errors raised while running also count as
//! scientific failures.

use std::fs::File;
use std::io::BufReader;

use anyhow::{bail, Context};
use ks_core::field::read_snapshot_sequence;
use ks_core::lab::{
    counterexample_c0, counterexample_sweep, estimate_constants, verify_bilinear_estimates,
    verify_maximal_regularity, verify_multiplier_lemma, ConstantsConfig, ConstantsReport,
    CounterexampleVerdict, LabConfig, LabReport,
};
use ks_core::norms::{TimeGrid, Trajectory};
use ks_core::solver::{
    check_theorem1_bound, check_theorem2_bound, picard_solve, reference_solve,
    relative_sup_differences, SolutionReport, SolverConfig, TheoremMode, Verdict,
};
use log::{info, warn};
use serde::Serialize;
use serde_json::json;

use crate::config::{Coupling, ExperimentConfig};
use crate::initial::{resolve, DataMeta};
use crate::output::{norm_rows, OutDir, NORM_COLUMNS};

/// Agreement required between the Picard iterate and the time stepper.
pub const COMPARE_TOL: f64 = 1e-4;

#[derive(Serialize)]
struct CouplingInfo {
    c: f64,
    source: &'static str,
}

fn coupling(cfg: &ExperimentConfig) -> anyhow::Result<CouplingInfo> {
    Ok(match cfg.picard.c {
        Coupling::Value(c) => CouplingInfo {
            c,
            source: "config",
        },
        Coupling::Keyword(_) => {
            let r = estimate_constants(&ConstantsConfig::default(), cfg.picard.mode)?;
            info!("c = {} from the constants estimator", r.c);
            CouplingInfo {
                c: r.c,
                source: "auto",
            }
        }
    })
}

fn solver_config(cfg: &ExperimentConfig, c: f64) -> anyhow::Result<SolverConfig> {
    let mut s = SolverConfig::new(cfg.grid()?, cfg.time_grid()?, c);
    s.max_iter = cfg.picard.max_iter;
    s.tol = cfg.picard.tol;
    s.mode = cfg.picard.mode;
    s.undamped = cfg.variant.undamped;
    s.validate()?;
    Ok(s)
}

/// The torus stands in for the plane only while the diffusion length stays
/// well inside the box.
fn box_warnings(cfg: &ExperimentConfig) -> Vec<String> {
    let reach = (4.0 * cfg.time.t_max).sqrt();
    let mut w = Vec::new();
    if reach > cfg.grid.l / 4.0 {
        w.push(format!(
            "diffusion length sqrt(4T) = {reach:.3} exceeds l/4 = {:.3}; periodic images are not negligible",
            cfg.grid.l / 4.0
        ));
    }
    for m in &w {
        warn!("{m}");
    }
    w
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    config: &'a ExperimentConfig,
    coupling: CouplingInfo,
    data: DataMeta,
    report: &'a SolutionReport,
    verdict: serde_json::Value,
    passed: bool,
    warnings: Vec<String>,
}

pub fn solve(cfg: &ExperimentConfig, out: &OutDir) -> anyhow::Result<bool> {
    let warnings = box_warnings(cfg);
    out.text("config.toml", &cfg.to_toml()?)?;
    let cp = coupling(cfg)?;
    let scfg = solver_config(cfg, cp.c)?;
    let init = resolve(scfg.grid, &cfg.data)?;
    let w0 = init.v0.scale(1.0 / (4.0 * cp.c));
    let report = picard_solve(&init.u0, &w0, &scfg)?;
    let (verdict, value) = match scfg.mode {
        TheoremMode::Thm1L1Linf => {
            let v = check_theorem1_bound(&report)?;
            (v.verdict, serde_json::to_value(&v)?)
        }
        TheoremMode::Thm2H1bH1 => {
            let v = check_theorem2_bound(&report, None)?;
            (v.verdict, serde_json::to_value(&v)?)
        }
    };
    let passed = report.converged && verdict == Verdict::Holds;
    let data = report
        .data
        .as_ref()
        .expect("picard_solve keeps trajectories");
    out.csv("norms.csv", &NORM_COLUMNS, &norm_rows(&data.u, &data.v)?)?;
    if cfg.output.dump_fields {
        out.trajectory("u.ksf", &data.u)?;
        out.trajectory("v.ksf", &data.v)?;
        out.trajectory("w.ksf", &data.w)?;
    }
    out.json(
        "report.json",
        &SolveOutput {
            config: cfg,
            coupling: cp,
            data: init.meta,
            report: &report,
            verdict: value,
            passed,
            warnings,
        },
    )?;
    println!(
        "solve: converged={} iterations={} A0={:.6e} threshold={:.6e} verdict={verdict:?}",
        report.converged, report.iterations, report.a0, report.threshold
    );
    if let Some(f) = &report.failure {
        println!("solve: {f}");
    }
    Ok(passed)
}

pub fn compare(cfg: &ExperimentConfig, out: &OutDir) -> anyhow::Result<bool> {
    let warnings = box_warnings(cfg);
    out.text("config.toml", &cfg.to_toml()?)?;
    let cp = coupling(cfg)?;
    let scfg = solver_config(cfg, cp.c)?;
    let init = resolve(scfg.grid, &cfg.data)?;
    let report = picard_solve(&init.u0, &init.v0.scale(1.0 / (4.0 * cp.c)), &scfg)?;
    if !report.converged {
        println!(
            "compare: Picard iteration did not converge: {}",
            report.failure.as_deref().unwrap_or("-")
        );
        out.json(
            "compare.json",
            &json!({ "converged": false, "report": report, "warnings": warnings }),
        )?;
        return Ok(false);
    }
    let (ru, rv) = reference_solve(&init.u0, &init.v0, &scfg)?;
    let data = report
        .data
        .as_ref()
        .expect("picard_solve keeps trajectories");
    let du = relative_sup_differences(&data.u, &ru)?;
    let dv = relative_sup_differences(&data.v, &rv)?;
    let rows: Vec<Vec<f64>> = scfg
        .tgrid
        .times()
        .iter()
        .zip(du.iter().zip(&dv))
        .map(|(&t, (&a, &b))| vec![t, a, b])
        .collect();
    out.csv("compare.csv", &["t", "rel_diff_u", "rel_diff_v"], &rows)?;
    let max_u = du.iter().copied().fold(0.0, f64::max);
    let max_v = dv.iter().copied().fold(0.0, f64::max);
    let passed = max_u <= COMPARE_TOL && max_v <= COMPARE_TOL;
    let hint = (!passed).then(|| {
        format!(
            "difference above {COMPARE_TOL:e}: refine the time grid (time.k = {} now); Duhamel quadrature error \
             scales with the node spacing",
            cfg.time.k
        )
    });
    out.json(
        "compare.json",
        &json!({
            "config": cfg,
            "coupling": cp,
            "converged": true,
            "max_rel_diff_u": max_u,
            "max_rel_diff_v": max_v,
            "tolerance": COMPARE_TOL,
            "passed": passed,
            "hint": hint,
            "warnings": warnings,
        }),
    )?;
    println!(
        "compare: max relative difference u {max_u:.3e}, v {max_v:.3e} (tolerance {COMPARE_TOL:e})"
    );
    if let Some(h) = hint {
        println!("compare: {h}");
    }
    Ok(passed)
}

fn lab_config(cfg: Option<&ExperimentConfig>) -> LabConfig {
    match cfg {
        Some(c) => LabConfig {
            n: c.grid.n,
            ..LabConfig::default()
        },
        None => LabConfig::default(),
    }
}

fn mode_of(cfg: Option<&ExperimentConfig>) -> TheoremMode {
    cfg.map_or(TheoremMode::Thm1L1Linf, |c| c.picard.mode)
}

fn write_constants(out: &OutDir, r: &ConstantsReport) -> anyhow::Result<()> {
    out.json("constants.json", r)?;
    out.text("constants.csv", &ks_core::lab::rows_to_csv(&r.rows))
}

pub fn verify(cfg: Option<&ExperimentConfig>, out: &OutDir) -> anyhow::Result<bool> {
    let lab = lab_config(cfg);
    let suites: Vec<LabReport> = vec![
        verify_multiplier_lemma(&lab)?,
        verify_bilinear_estimates(&lab)?,
        verify_maximal_regularity(&lab)?,
    ];
    let constants = estimate_constants(&ConstantsConfig::default(), mode_of(cfg))?;
    let sweep = counterexample_sweep();

    let mut failures = Vec::new();
    for s in &suites {
        out.text(&format!("lab_{}.csv", s.name), &s.to_csv())?;
        for c in s.failed_checks() {
            failures.push(format!("{}: {} ({})", s.name, c.name, c.detail));
        }
    }
    if let Some(Coupling::Value(c)) = cfg.map(|c| c.picard.c) {
        if !constants.admits(c) {
            failures.push(format!(
                "constants: configured c = {c} is below the observed constants (c1 = {:.4}, c2 = {:.4}, c3 = {:.4}); \
                 its threshold 3/(32c^2) = {:.4e} is not a valid smallness condition",
                constants.c1,
                constants.c2,
                constants.c3,
                3.0 / (32.0 * c * c)
            ));
        }
    }
    if sweep.points.iter().any(|p| p.in_window && !p.holds) {
        failures.push("counterexample: sweep point below c0".into());
    }
    write_constants(out, &constants)?;
    out.json(
        "verify.json",
        &json!({
            "lab_config": lab,
            "suites": suites,
            "constants": { "mode": constants.mode, "c1": constants.c1, "c2": constants.c2, "c3": constants.c3,
                           "c": constants.c, "threshold": constants.threshold },
            "counterexample": sweep,
            "failures": failures,
            "passed": failures.is_empty(),
        }),
    )?;
    for s in &suites {
        println!(
            "verify: {} max ratio {:.6} passed={}",
            s.name, s.max_ratio, s.passed
        );
    }
    println!(
        "verify: c = {:.6}, threshold = {:.6e}, c0 = {:.6}",
        constants.c,
        constants.threshold,
        counterexample_c0()
    );
    for f in &failures {
        println!("verify: FAILED {f}");
    }
    Ok(failures.is_empty())
}

pub fn counterexample(out: &OutDir) -> anyhow::Result<bool> {
    let sweep = counterexample_sweep();
    out.json(
        "counterexample.json",
        &json!({ "c0": counterexample_c0(), "sweep": sweep }),
    )?;
    println!(
        "counterexample: c0 = {:.6}, verdict {:?}",
        counterexample_c0(),
        sweep.verdict
    );
    Ok(sweep.verdict == CounterexampleVerdict::Holds)
}

pub fn constants(cfg: Option<&ExperimentConfig>, out: &OutDir) -> anyhow::Result<bool> {
    let r = estimate_constants(&ConstantsConfig::default(), mode_of(cfg))?;
    write_constants(out, &r)?;
    println!(
        "constants: c1 = {:.6} c2 = {:.6} c3 = {:.6} c = {:.6} threshold = {:.6e}",
        r.c1, r.c2, r.c3, r.c, r.threshold
    );
    for n in &r.notices {
        println!("constants: {n}");
    }
    Ok([r.c1, r.c2, r.c3].iter().all(|v| v.is_finite() && *v > 0.0))
}

fn load_trajectory(out: &OutDir, name: &str) -> anyhow::Result<Trajectory> {
    let p = out.path(name);
    let file = File::open(&p).with_context(|| {
        format!(
            "opening {} (run solve with output.dump_fields)",
            p.display()
        )
    })?;
    let mut frames = read_snapshot_sequence(&mut BufReader::new(file))?;
    if frames.is_empty() {
        bail!("{} holds no snapshots", p.display());
    }
    let initial = (frames[0].1 == 0.0).then(|| frames.remove(0).0);
    let grid = *frames
        .first()
        .with_context(|| format!("{} holds only t = 0", p.display()))?
        .0
        .grid();
    let tg = TimeGrid::from_times(frames.iter().map(|f| f.1).collect())?;
    Ok(Trajectory::new(
        grid,
        tg,
        frames.into_iter().map(|f| f.0).collect(),
        initial,
    )?)
}

/// Recomputes norm reports from dumped trajectories.
pub fn norms(out: &OutDir) -> anyhow::Result<bool> {
    let u = load_trajectory(out, "u.ksf")?;
    let v = load_trajectory(out, "v.ksf")?;
    let w = load_trajectory(out, "w.ksf")?;
    let thm1 = TheoremMode::Thm1L1Linf.xy_norms(&u, &w)?;
    let thm2 = TheoremMode::Thm2H1bH1.xy_norms(&u, &w)?;
    out.csv("norms.csv", &NORM_COLUMNS, &norm_rows(&u, &v)?)?;
    out.json(
        "norms.json",
        &json!({ "norms_thm1": thm1, "norms_thm2": thm2 }),
    )?;
    println!(
        "norms: X+Y = {:.6e} (L1 x Linf), {:.6e} (H1b x H1)",
        thm1.get("XY"),
        thm2.get("XY")
    );
    Ok(thm1.all_finite_nonnegative() && thm2.all_finite_nonnegative())
}
