use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn assurance(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_assurance"))
        .args(args)
        .env("ASSURANCE_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str], out: &Path) -> Value {
    let o = assurance(args, out);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn err_json(args: &[&str], out: &Path, code: i32) -> Value {
    let o = assurance(args, out);
    assert_eq!(o.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stderr).unwrap()
}

#[test]
fn solve_reports_the_baseline_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok_json(&["solve", "--preset", "baseline", "--T", "47"], dir.path());
    let r = &v["results"][0];
    assert!((r["q_high"].as_f64().unwrap() - 0.468).abs() < 0.005);
    assert!((r["success_prob"].as_f64().unwrap() - 0.521).abs() < 0.01);
    assert!(r["fixed_points"]["q_unstable"].as_f64().is_some());
}

#[test]
fn design_writes_the_schema_with_lf_endings() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok_json(&["design", "--preset", "whistleblowing_15", "--objective", "conditional"], dir.path());
    assert_eq!(v["results"][0]["argmax_T"], 3);
    let csv = std::fs::read_to_string(dir.path().join("design_pi_0.15.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "T,tau,q_high,success_prob,delta,objective,flags");
    assert_eq!(lines.clone().count(), 98);
    assert!(lines.any(|l| l.starts_with("3,0.03,") && l.ends_with(",argmax")));
}

#[test]
fn overton_preset_peaks_at_46() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok_json(&["overton", "--preset", "overton_beta_13_7"], dir.path());
    assert_eq!(v["results"][0]["argmax_T"], 46);
    let csv = std::fs::read_to_string(dir.path().join("overton_baseline.csv")).unwrap();
    assert!(csv.starts_with("T,marginal_success,delta_pi_success,delta_pi_failure,psi_O\n"));
}

#[test]
fn durable_and_ex_ante_commands() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok_json(&["durable"], dir.path());
    assert_eq!(v["results"][0]["argmax_T"], 60);
    let v = ok_json(&["ex-ante", "--seed-mu", "15"], dir.path());
    assert!(v["results"][0]["argmax_T"].as_u64().unwrap() <= 47);
}

#[test]
fn finite_n_with_durability_floor() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok_json(&["finite-n", "--preset", "durable_60", "--t-min", "40", "--t-max", "75"], dir.path());
    assert_eq!(v["results"][0]["argmax_T"], 57);
    assert_eq!(v["results"][1]["argmax_T"], 60);
    let csv = std::fs::read_to_string(dir.path().join("finite_n_durable.csv")).unwrap();
    assert!(csv.starts_with("T,objective,success_prob,delta_theta,residual,iterations\n"));
}

#[test]
fn scalar_cutoff_is_negative_with_negative_statics() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok_json(&["scalar-cutoff", "--T", "53"], dir.path());
    assert!(v["x_star"].as_f64().unwrap() < 0.0);
    assert!(v["comparative_statics"]["dx_ds"].as_f64().unwrap() < 0.0);
    assert!(v["comparative_statics"]["dx_deta"].as_f64().unwrap() < 0.0);
}

#[test]
fn compare_sweep_covers_every_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok_json(&["compare"], dir.path());
    let counts = &v["region_counts"];
    let total: u64 = ["cascade_connected", "coordination_gap", "fundamentally_blocked"]
        .iter()
        .map(|k| counts[k].as_u64().unwrap())
        .sum();
    assert_eq!(total, v["sweep_points"].as_u64().unwrap());
    let csv = std::fs::read_to_string(dir.path().join("compare_regions.csv")).unwrap();
    assert!(csv.starts_with("e,alpha,pi,mu,region,p_A,p_S\n"));
    assert_eq!(csv.lines().count() as u64, total + 1);
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("elsewhere");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"command":"design","preset":"baseline","T_range":[40,55],"emit":{{"csv":true,"svg":true}},"out_dir":{:?}}}"#,
            out.display().to_string()
        ),
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_assurance"))
        .args(["design", "--config", cfg.to_str().unwrap()])
        .env_remove("ASSURANCE_OUT_DIR")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("design_baseline.csv").exists());
    let svg = std::fs::read_to_string(out.join("design_baseline.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    // the command in the file must match the invoked one
    let e = err_json(&["overton", "--config", cfg.to_str().unwrap()], dir.path(), 2);
    assert_eq!(e["error"]["kind"], "config");
}

#[test]
fn configuration_errors_exit_2_with_a_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let e = err_json(&["design", "--preset", "nope"], dir.path(), 2);
    assert_eq!(e["error"]["kind"], "config");
    assert!(e["error"]["message"].as_str().unwrap().contains("unknown preset"));
    err_json(&["solve"], dir.path(), 2);
    err_json(&["design", "--t-min", "0", "--t-max", "10"], dir.path(), 2);
    err_json(&["design", "--t-min", "5", "--t-max", "100"], dir.path(), 2);
    err_json(&["replicate", "fig_nope"], dir.path(), 2);
    err_json(&["finite-n", "--preset", "baseline"], dir.path(), 2);
    err_json(&["design", "--preset", "finite_n_benchmark"], dir.path(), 2);
}

#[test]
fn solver_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("xi0.json");
    std::fs::write(
        &cfg,
        r#"{"model":{"n":100,"pi":0.65,"lambda":0.4,"alpha_l":0.5,"alpha_h":2.0,
            "safety":{"kind":"exponential","xi":0.0},"s":0.8,"w_bar":0.35,"k":0.065}}"#,
    )
    .unwrap();
    let e = err_json(&["solve", "--config", cfg.to_str().unwrap(), "--T", "55"], dir.path(), 3);
    assert_eq!(e["error"]["kind"], "solver");
    // the same calibration as a sweep is partial, not fatal
    let v = ok_json(&["design", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(v["results"][0]["partial"], true);
    let csv = std::fs::read_to_string(dir.path().join("design_custom.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("55,0.55,,,,,failed")));
}

#[test]
fn self_audit_passes() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok_json(&["self-audit"], dir.path());
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["ok"] == true));
}

#[test]
fn replicate_output_is_byte_identical_across_runs_and_threads() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for figure in ["fig_design_objective", "fig_overton_prior_sensitivity", "fig_finite_n_durable"] {
        ok_json(&["replicate", figure, "--threads", "1", "--svg"], a.path());
        ok_json(&["replicate", figure, "--threads", "8", "--svg"], b.path());
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 8);
    for n in names {
        let x = std::fs::read(a.path().join(&n)).unwrap();
        let y = std::fs::read(b.path().join(&n)).unwrap();
        assert!(x == y, "{n:?} differs");
    }
}
