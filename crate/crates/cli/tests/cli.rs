use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbropt")).arg("--out").arg(dir).args(args).output().expect("binary runs")
}

fn ok_json(dir: &Path, args: &[&str]) -> Value {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn f(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing numeric `{key}` in {v}"))
}

/// Rows of a data CSV, skipping the leading comment line and header.
fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn manifest(dir: &Path, command: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(format!("{command}_manifest.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn yopt_reports_closed_form_and_scan() {
    let tmp = TempDir::new().unwrap();
    let v = ok_json(tmp.path(), &["--preset", "table1-R-x10", "yopt", "--scan"]);
    assert!((f(&v, "Y_opt") - 6.337).abs() < 1e-3);
    assert!((f(&v, "scan_argmax") - f(&v, "Y_opt")).abs() <= 1e-4);
    assert!((f(&v, "mu_at_bottom") - f(&v, "R")).abs() < 1e-8);
    assert_eq!(v["branch"], "surface_above_r");
    let m = manifest(tmp.path(), "yopt");
    assert_eq!(m["command"], "yopt");
    assert_eq!(m["preset"], "table1-R-x10");
    for p in m["outputs"].as_array().unwrap() {
        assert!(Path::new(p.as_str().unwrap()).exists());
    }
}

#[test]
fn infeasible_respiration_exits_2() {
    let tmp = TempDir::new().unwrap();
    let params = tmp.path().join("p.toml");
    std::fs::write(&params, "theta_per_s = 4e-7\nmu_max_per_d = 1.0\nI_star_umol_per_m2_s = 200.0\nR_per_d = 1.5\n")
        .unwrap();
    let out = run(tmp.path(), &["--params", params.to_str().unwrap(), "yopt"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("R = 1.5") && err.contains("mu_max = 1"), "{err}");
}

#[test]
fn bad_params_and_usage_exit_2() {
    let tmp = TempDir::new().unwrap();
    let params = tmp.path().join("p.toml");
    std::fs::write(&params, "unknown_key = 1.0\n").unwrap();
    assert_eq!(run(tmp.path(), &["--params", params.to_str().unwrap(), "yopt"]).status.code(), Some(2));
    assert_eq!(run(tmp.path(), &["--preset", "nope", "yopt"]).status.code(), Some(2));
    assert_eq!(run(tmp.path(), &["optimize"]).status.code(), Some(2));
    assert_eq!(run(tmp.path(), &["optimize", "--h", "0.1", "--x", "50"]).status.code(), Some(2));
}

#[test]
fn p_of_y_argmax_matches_yopt() {
    let tmp = TempDir::new().unwrap();
    let y = f(&ok_json(tmp.path(), &["yopt"]), "Y_opt");
    let out = run(tmp.path(), &["sweep", "P_of_Y", "--lo", "0", "--hi", "20", "--n", "2001"]);
    assert!(out.status.success());
    let path = tmp.path().join("P_of_Y.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# Y: optical depth"));
    let rows = csv_rows(&path);
    assert_eq!(rows.len(), 2001);
    let best = rows.iter().max_by(|a, b| a[2].total_cmp(&b[2])).unwrap();
    assert!((best[0] - y).abs() <= 0.01 / 2.0 + 1e-9);
}

#[test]
fn sweep_rejects_malformed_range() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(run(tmp.path(), &["sweep", "P_of_Y", "--lo", "5", "--hi", "1"]).status.code(), Some(2));
    assert_eq!(run(tmp.path(), &["sweep", "Pi_of_X", "--n", "1"]).status.code(), Some(2));
}

#[test]
fn eps_of_x_one_file_per_exponent() {
    let tmp = TempDir::new().unwrap();
    assert!(run(tmp.path(), &["sweep", "eps_of_X"]).status.success());
    for s in ["0.2", "0.4", "0.6", "0.8", "1"] {
        let rows = csv_rows(&tmp.path().join(format!("eps_of_X_s{s}.csv")));
        assert_eq!(rows.len(), 1001);
        assert_eq!(rows[0][1], 10.0);
        assert!(rows.windows(2).all(|w| w[1][1] > w[0][1]));
    }
    let m = manifest(tmp.path(), "sweep");
    assert_eq!(m["outputs"].as_array().unwrap().len(), 5);
}

#[test]
fn pi_vs_alpha1_decreasing() {
    let tmp = TempDir::new().unwrap();
    assert!(run(tmp.path(), &["sweep", "Pi_vs_alpha1", "--x", "50"]).status.success());
    let rows = csv_rows(&tmp.path().join("Pi_vs_alpha1.csv"));
    assert_eq!(rows.len(), 26);
    assert!(rows.windows(2).all(|w| w[1][2] < w[0][2]));
}

#[test]
fn other_sweeps_have_expected_shape() {
    let tmp = TempDir::new().unwrap();
    for (kind, n) in [("Pi_of_h", 500), ("Pi_of_X", 501)] {
        assert!(run(tmp.path(), &["sweep", kind]).status.success());
        assert_eq!(csv_rows(&tmp.path().join(format!("{kind}.csv"))).len(), n);
    }
    assert!(run(tmp.path(), &["sweep", "Pi_surface", "--n", "11", "--h-n", "7"]).status.success());
    assert_eq!(csv_rows(&tmp.path().join("Pi_surface.csv")).len(), 77);
}

#[test]
fn sweeps_are_byte_identical_across_runs() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [a.path(), b.path()] {
        assert!(run(dir, &["--preset", "chlorella-s0365", "sweep", "Pi_of_h", "--x", "80"]).status.success());
    }
    let read = |d: &Path| std::fs::read(d.join("Pi_of_h.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn json_format_tables() {
    let tmp = TempDir::new().unwrap();
    assert!(run(tmp.path(), &["--format", "json", "sweep", "P_of_Y", "--n", "11"]).status.success());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("P_of_Y.json")).unwrap()).unwrap();
    assert_eq!(doc["columns"], serde_json::json!(["Y", "mu", "P"]));
    assert_eq!(doc["rows"].as_array().unwrap().len(), 11);
}

#[test]
fn optimize_given_concentration() {
    let tmp = TempDir::new().unwrap();
    let y = f(&ok_json(tmp.path(), &["yopt"]), "Y_opt");
    let v = ok_json(tmp.path(), &["--preset", "chlorella-s1", "optimize", "--x", "50"]);
    assert!((f(&v, "h_star") - y / 20.0).abs() < 1e-8);
}

#[test]
fn optimize_given_depth() {
    let tmp = TempDir::new().unwrap();
    let y = f(&ok_json(tmp.path(), &["yopt"]), "Y_opt");
    let clear = ok_json(tmp.path(), &["--alpha1", "0", "optimize", "--h", "0.15"]);
    assert!((0.2 * f(&clear, "X_star") * 0.15 - y).abs() < 1e-6);
    let turbid = ok_json(tmp.path(), &["--alpha1", "10", "optimize", "--h", "0.15"]);
    assert!(f(&turbid, "X_star") > (y / 0.15 - 10.0) / 0.2);
}

#[test]
fn optimize_bracket_cap_exits_2() {
    let tmp = TempDir::new().unwrap();
    // A tiny depth puts the optimum far beyond the bracket cap.
    let out = run(tmp.path(), &["optimize", "--h", "1e-7"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn alternate_without_turbidity_is_a_fixed_point() {
    let tmp = TempDir::new().unwrap();
    let v = ok_json(tmp.path(), &["--alpha1", "0", "alternate", "--x0", "50"]);
    assert_eq!(v["stop_reason"], "fixed_point");
    assert_eq!(v["iterations"], 1);
    assert!(f(&v, "relative_Pi_gap") < 1e-8);
}

#[test]
fn alternate_turbid_reports_gap() {
    let tmp = TempDir::new().unwrap();
    let v = ok_json(tmp.path(), &["--preset", "chlorella-s1", "alternate", "--x0", "50", "--n-max", "10000"]);
    assert_eq!(v["iterations"], 10000);
    assert_eq!(v["monotone"], true);
    assert!(f(&v, "relative_Pi_gap") < 1e-2);
    let rows = csv_rows(&tmp.path().join("alternate.csv"));
    assert_eq!(rows.len(), 10000);
    assert!(rows.iter().all(|r| r[5] < 0.0));
}

#[test]
fn alternate_sublinear_flags_divergence() {
    let tmp = TempDir::new().unwrap();
    let v = ok_json(tmp.path(), &["--preset", "chlorella-s0365", "alternate", "--cap", "1e200"]);
    assert_eq!(v["diverging"], true);
    assert_eq!(v["stop_reason"], "concentration_cap");
    assert!((f(&v, "Pi_growth_exponent") - 0.635).abs() < 0.01);
}

#[test]
fn alternate_depth_floor() {
    let tmp = TempDir::new().unwrap();
    let v = ok_json(tmp.path(), &["--preset", "chlorella-s1", "alternate", "--h-min", "raceway"]);
    assert_eq!(v["stop_reason"], "depth_floor");
    assert_eq!(f(&v["floor_optimum"], "h"), 0.1);
    assert_eq!(run(tmp.path(), &["alternate", "--h-min", "deep"]).status.code(), Some(2));
}

#[test]
fn simulate_writes_trace() {
    let tmp = TempDir::new().unwrap();
    let v = ok_json(tmp.path(), &["simulate", "--x0", "2500", "--h", "0.1", "--t-end", "30"]);
    assert_eq!(v["bounds_hold"], true);
    assert_eq!(v["threshold_recrossing"], false);
    assert!(f(&v, "final_relative_error").abs() < 1e-3);
    assert!(f(&v, "convergence_time_d") > 0.0);
    let text = std::fs::read_to_string(tmp.path().join("simulate.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t_d,X_g_per_m3,D_per_d,mu_bar_per_d,Phi,Pi");
    assert_eq!(text.lines().count() - 1, v["samples"].as_u64().unwrap() as usize);
}

#[test]
fn simulate_flat_at_target() {
    let tmp = TempDir::new().unwrap();
    let x_star = f(&ok_json(tmp.path(), &["optimize", "--h", "0.1"]), "X_star");
    let v = ok_json(tmp.path(), &["simulate", "--x0", &x_star.to_string(), "--t-end", "5"]);
    assert_eq!(f(&v, "convergence_time_d"), 0.0);
}

#[test]
fn simulate_rejects_bad_config() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["simulate", "--d-max", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(tmp.path(), &["simulate", "--x-star", "300", "--x-bar", "200"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn params_round_trip_through_file() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["--preset", "chlorella-s0365", "params"]);
    assert!(out.status.success());
    let file = tmp.path().join("params.toml");
    let a = ok_json(tmp.path(), &["--preset", "chlorella-s0365", "optimize", "--h", "0.2"]);
    let b = ok_json(tmp.path(), &["--params", file.to_str().unwrap(), "optimize", "--h", "0.2"]);
    assert_eq!(a, b);
    assert!(manifest(tmp.path(), "optimize")["params_file"].as_str().unwrap().ends_with("params.toml"));
}
