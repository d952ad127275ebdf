use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ks-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("KS_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn solve(config: &str, overrides: &[&str], out: &Path) -> Output {
    let cfg = configs().join(config);
    let mut args = vec!["solve", "--config", cfg.to_str().unwrap()];
    for o in overrides {
        args.extend(["--override", o]);
    }
    run(&args, out)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn zero_data_exits_zero_with_zero_norms() {
    let dir = tempfile::tempdir().unwrap();
    let o = solve("zero.toml", &[], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("norms.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,u_l1,t_u_linf,t12_grad_v_linf,sigma_grad_v_linf,u_h1,v_h1"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 17);
    for r in rows {
        assert!(
            r.split(',')
                .skip(1)
                .all(|v| v.parse::<f64>().unwrap() == 0.0),
            "{r}"
        );
    }
}

#[test]
fn small_gaussian_bound_holds() {
    let dir = tempfile::tempdir().unwrap();
    let o = solve("small_gaussian.toml", &["time.k=24"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("report.json"));
    assert_eq!(r["verdict"]["verdict"], "holds");
    let rhs = r["verdict"]["rhs"].as_f64().unwrap();
    let csv = fs::read_to_string(dir.path().join("norms.csv")).unwrap();
    let t_u_linf = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap());
    assert!(t_u_linf.fold(0.0, f64::max) <= 2.0 * rhs);
}

#[test]
fn large_mass_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = solve("large_mass.toml", &["grid.n=32", "time.k=12"], dir.path());
    assert_eq!(code(&o), 1);
    let r = json(&dir.path().join("report.json"));
    assert_eq!(r["report"]["below_threshold"], false);
    assert_eq!(r["passed"], false);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&solve("zero.toml", &["grid.nn=4"], dir.path())), 2);
    assert_eq!(code(&solve("zero.toml", &["grid.n=48"], dir.path())), 2);
    assert_eq!(code(&solve("missing.toml", &[], dir.path())), 2);
    assert_eq!(code(&run(&["solve"], dir.path())), 2);
    assert_eq!(code(&run(&["frobnicate"], dir.path())), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_ks-lab"))
        .args(["counterexample", "--out"])
        .arg(dir.path())
        .env("KS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn written_config_round_trips() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let o = solve(
        "zero.toml",
        &["picard.c=1.5", "data.kind=mode", "data.amplitude=1e-4"],
        a.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let written = a.path().join("config.toml");
    let o = run(&["solve", "--config", written.to_str().unwrap()], b.path());
    assert_eq!(code(&o), 0);
    assert_eq!(
        fs::read(&written).unwrap(),
        fs::read(b.path().join("config.toml")).unwrap()
    );
    assert_eq!(
        fs::read(a.path().join("report.json")).unwrap(),
        fs::read(b.path().join("report.json")).unwrap()
    );
}

#[test]
fn identical_runs_are_bit_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ov = ["time.k=16", "output.dump_fields=true", "picard.c=2"];
    assert_eq!(code(&solve("small_gaussian.toml", &ov, a.path())), 0);
    assert_eq!(code(&solve("small_gaussian.toml", &ov, b.path())), 0);
    for f in ["report.json", "norms.csv", "u.ksf", "v.ksf", "w.ksf"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn json_keys_are_sorted() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&solve("zero.toml", &[], dir.path())), 0);
    let text = fs::read_to_string(dir.path().join("report.json")).unwrap();
    let keys: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \"") && !l.starts_with("   "))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert!(keys.len() > 3);
    assert_eq!(keys, sorted);
}

#[test]
fn norms_recomputed_from_dumps() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&solve(
            "small_gaussian.toml",
            &["time.k=16", "output.dump_fields=true", "picard.c=2"],
            dir.path()
        )),
        0
    );
    let before = fs::read(dir.path().join("norms.csv")).unwrap();
    let o = run(&["norms"], dir.path());
    assert_eq!(code(&o), 0);
    assert_eq!(before, fs::read(dir.path().join("norms.csv")).unwrap());
    let n = json(&dir.path().join("norms.json"));
    let r = json(&dir.path().join("report.json"));
    assert_eq!(n["norms_thm1"], r["report"]["norms_thm1"]);
}

#[test]
fn compare_small_passes_and_coarse_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("small_gaussian.toml");
    let o = run(
        &[
            "compare",
            "--config",
            cfg.to_str().unwrap(),
            "--override",
            "time.k=24",
            "--override",
            "picard.c=2",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let cfg = configs().join("compare_coarse.toml");
    let o = run(&["compare", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 1);
    let r = json(&dir.path().join("compare.json"));
    assert!(r["max_rel_diff_u"].as_f64().unwrap() > 1e-4);
    assert!(r["hint"].as_str().unwrap().contains("time.k"));
}

#[test]
fn zero_data_compare_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("zero.toml");
    assert_eq!(
        code(&run(
            &["compare", "--config", cfg.to_str().unwrap()],
            dir.path()
        )),
        0
    );
    let r = json(&dir.path().join("compare.json"));
    assert_eq!(r["max_rel_diff_u"].as_f64().unwrap(), 0.0);
}

#[test]
fn counterexample_holds() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["counterexample"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("c0 = 0.103742"));
    let r = json(&dir.path().join("counterexample.json"));
    assert_eq!(r["sweep"]["verdict"], "holds");
}

#[test]
fn verify_flags_inconsistent_coupling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("zero.toml");
    let o = run(
        &[
            "verify",
            "--config",
            cfg.to_str().unwrap(),
            "--override",
            "grid.n=16",
            "--override",
            "picard.c=1e-6",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 1);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("FAILED constants"), "{stdout}");
    let r = json(&dir.path().join("verify.json"));
    assert_eq!(r["passed"], false);
    assert_eq!(r["lab_config"]["seed"], 20_240_601);
}
