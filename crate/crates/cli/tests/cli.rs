//! End-to-end tests of the `muspar` binary: exit codes, report files and
//! byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_muspar")
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary must execute")
}

fn run_cfg(name: &str, extra: &[&str], out: &Path) -> Output {
    let cfg = config_path(name);
    let mut args: Vec<String> = vec![
        "--config".into(),
        cfg.to_string_lossy().into_owned(),
        "--out".into(),
        out.to_string_lossy().into_owned(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    Command::new(bin())
        .args(&args)
        .output()
        .expect("binary must execute")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn validate_mode_passes_on_shipped_models() {
    for cfg in ["heat_limit.json", "convection.json"] {
        let dir = tempfile::tempdir().unwrap();
        let out = run_cfg(cfg, &["--mode", "validate"], dir.path());
        assert_eq!(exit_code(&out), 0, "{cfg}: {out:?}");
        assert!(dir.path().join("validation.json").exists());
        assert!(dir.path().join("summary.json").exists());
    }
}

#[test]
fn validate_seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cfg(
        "heat_limit.json",
        &["--mode", "validate", "--seed", "42", "--quiet"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0);
    let text = std::fs::read_to_string(dir.path().join("validation.json")).unwrap();
    assert!(text.contains("\"seed\": 42"), "{text}");
}

#[test]
fn structure_violation_exits_with_two() {
    // nu = 1 <= 4 nu0 = 1 breaks the dissipation margin
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    let text = std::fs::read_to_string(config_path("heat_limit.json"))
        .unwrap()
        .replace("\"nu\": 2.0", "\"nu\": 1.0");
    std::fs::write(&cfg, text).unwrap();
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--mode",
        "solve",
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("structure violation"), "{stderr}");
}

#[test]
fn missing_or_broken_config_exits_with_two() {
    let out = run(&["--config", "/nonexistent/nope.json"]);
    assert_eq!(exit_code(&out), 2);
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("broken.json");
    std::fs::write(&cfg, "{ not json").unwrap();
    let out = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    let out = run_cfg("heat_limit.json", &["--mode", "fly"], dir.path());
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn nonconvergence_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("hard.json");
    let text = std::fs::read_to_string(config_path("p_laplacian.json"))
        .unwrap()
        .replace(
            "\"f\": {\"kind\": \"zero\"}",
            "\"f\": {\"kind\": \"constant\", \"value\": 5.0}",
        )
        .replace(
            "\"mesh\"",
            "\"solver\": {\"tol\": 1e-10, \"max_iters\": 1, \"damping\": false, \"fallback_picard\": false},\n  \"mesh\"",
        );
    std::fs::write(&cfg, text).unwrap();
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--mode",
        "solve",
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 3, "{out:?}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("did not converge"), "{stderr}");
}

#[test]
fn audit_mode_writes_one_ledger_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cfg("heat_limit.json", &["--quiet"], dir.path());
    assert_eq!(exit_code(&out), 0, "{out:?}");
    let ledger = std::fs::read_to_string(dir.path().join("ledger.csv")).unwrap();
    let lines: Vec<&str> = ledger.lines().collect();
    // header + one row per time step (config has 16 steps)
    assert_eq!(lines.len(), 17);
    assert_eq!(
        lines[0],
        "n,t_n,b_norm_sq,jump_sq,modular,data_term,lhs_cum,rhs_cum,verdict"
    );
    assert!(lines[1..].iter().all(|l| l.ends_with("pass")));
}

#[test]
fn audits_pass_on_all_shipped_models() {
    for cfg in [
        "heat_limit.json",
        "p_laplacian.json",
        "convection.json",
        "heat_driven.json",
    ] {
        let dir = tempfile::tempdir().unwrap();
        let out = run_cfg(cfg, &["--quiet"], dir.path());
        assert_eq!(exit_code(&out), 0, "{cfg}: {out:?}");
    }
}

#[test]
fn reruns_emit_identical_bytes() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let a = run_cfg("heat_limit.json", &["--quiet"], d1.path());
    let b = run_cfg("heat_limit.json", &["--quiet"], d2.path());
    assert_eq!(exit_code(&a), 0);
    assert_eq!(exit_code(&b), 0);
    for name in ["ledger.csv", "summary.json"] {
        let ba = std::fs::read(d1.path().join(name)).unwrap();
        let bb = std::fs::read(d2.path().join(name)).unwrap();
        assert_eq!(ba, bb, "{name} differs between reruns");
    }
}

#[test]
fn worker_count_does_not_change_bytes() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let cfg = config_path("p_laplacian.json");
    let mk = |dir: &Path, threads: &str| {
        Command::new(bin())
            .args([
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                dir.to_str().unwrap(),
                "--quiet",
            ])
            .env("MP_THREADS", threads)
            .output()
            .unwrap()
    };
    let a = mk(d1.path(), "1");
    let b = mk(d2.path(), "4");
    assert_eq!(exit_code(&a), 0);
    assert_eq!(exit_code(&b), 0);
    let ba = std::fs::read(d1.path().join("ledger.csv")).unwrap();
    let bb = std::fs::read(d2.path().join("ledger.csv")).unwrap();
    assert_eq!(ba, bb, "ledger bytes depend on worker count");
}

#[test]
fn solve_mode_exports_mesh_and_fields() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cfg("heat_2d.json", &["--quiet"], dir.path());
    assert_eq!(exit_code(&out), 0, "{out:?}");
    let mesh = std::fs::read_to_string(dir.path().join("mesh.txt")).unwrap();
    assert!(mesh.starts_with("dim 2\nvertices 81\n"));
    assert!(mesh.contains("\ncells 128\n"), "8x8 squares split in two");
    let field = std::fs::read_to_string(dir.path().join("final_state.csv")).unwrap();
    assert_eq!(field.lines().count(), 82, "header + 81 vertices");
    assert!(dir.path().join("trajectory.csv").exists());
}

#[test]
fn temporal_study_meets_first_order_contract() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cfg("temporal_study.json", &["--quiet"], dir.path());
    assert_eq!(exit_code(&out), 0, "{out:?}");
    let study: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("study.json")).unwrap())
            .unwrap();
    let order = study["fitted_order"].as_f64().unwrap();
    assert!(order >= 0.9, "fitted order {order}");
    let csv = std::fs::read_to_string(dir.path().join("study.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5, "header + 4 levels");
    assert!(csv.starts_with("level,tau_or_h,err_L1,err_L2,rate\n"));
}

#[test]
fn spatial_study_reports_without_contract() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cfg("spatial_study.json", &["--quiet"], dir.path());
    assert_eq!(exit_code(&out), 0, "{out:?}");
    assert!(dir.path().join("study.csv").exists());
}

#[test]
fn oracle_check_passes_on_shipped_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cfg("oracle_check.json", &["--quiet"], dir.path());
    assert_eq!(exit_code(&out), 0, "{out:?}");
    let csv = std::fs::read_to_string(dir.path().join("oracle.csv")).unwrap();
    assert_eq!(csv.lines().count(), 51, "header + 50 instances");
}

#[test]
fn quiet_flag_silences_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cfg("heat_limit.json", &["--quiet"], dir.path());
    assert!(out.stdout.is_empty(), "{:?}", String::from_utf8_lossy(&out.stdout));
    let dir2 = tempfile::tempdir().unwrap();
    let loud = run_cfg("heat_limit.json", &[], dir2.path());
    assert!(String::from_utf8_lossy(&loud.stdout).contains("energy-bound: PASS"));
}

#[test]
fn study_mode_requires_study_block() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cfg("heat_limit.json", &["--mode", "temporal-study"], dir.path());
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("study"), "{stderr}");
}
