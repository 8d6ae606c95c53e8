use std::path::Path;
use std::process::Command;

use serde_json::Value;
use zeno::cli::dispatch;

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["zeno"];
    argv.extend_from_slice(args);
    dispatch(argv)
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (i32, String) {
    let path = dir.join(name);
    let path_str = path.to_str().unwrap().to_string();
    let mut full: Vec<&str> = args.to_vec();
    full.extend_from_slice(&["--out", &path_str]);
    let code = run(&full);
    let text = std::fs::read_to_string(&path).unwrap_or_default();
    (code, text)
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn match_approx_point() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to(dir.path(), "m.json", &["match", "--omega", "1", "--gamma", "20", "--delta", "0", "--method", "approx"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!((v["delta_t"].as_f64().unwrap() - 0.19900).abs() < 1e-5);
    assert_eq!(v["method"], "approx");
}

#[test]
fn match_newton_meets_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to(
        dir.path(),
        "m.json",
        &["match", "--omega", "1", "--gamma", "1.5", "--delta", "0.5", "--tol", "1e-12", "--exact-derivative"],
    );
    assert_eq!(code, 0);
    let v = json(&out);
    assert!(v["residual"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["method"], "newton");
}

#[test]
fn pulsed_half_rabi_period() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to(dir.path(), "p.json", &["pulsed", "--omega", "1", "--delta0", "0", "--delta-t", "3.14159265"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!((v["p2"].as_f64().unwrap() - 1.0).abs() < 1e-15);
    assert!((v["mean_t"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-8);
}

#[test]
fn continuous_lifetime() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to(dir.path(), "c.json", &["continuous", "--omega", "1", "--gamma", "2", "--delta", "0"]);
    assert_eq!(code, 0);
    assert!((json(&out)["tau_c"].as_f64().unwrap() - 3.0).abs() < 1e-15);

    let (code, out) = run_to(dir.path(), "c.csv", &["continuous", "--omega", "1", "--gamma", "2", "--format", "csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    let k = lines[0].split(',').position(|c| c == "tau_c").unwrap();
    assert_eq!(lines[1].split(',').nth(k).unwrap(), "3.0");
}

#[test]
fn three_level_point_with_saturation() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to(
        dir.path(),
        "c.json",
        &["continuous", "--units", "hertz", "--omega", "48.5", "--decay", "1.74e6", "--s0", "1e-3", "--three-level-lifetime"],
    );
    assert_eq!(code, 0);
    let v = json(&out);
    let (t3, tc) = (v["tau_3level"].as_f64().unwrap(), v["tau_c"].as_f64().unwrap());
    assert!(((t3 - tc) / tc).abs() < 0.01);
    assert_eq!(v["adiabatic_elimination_valid"], true);
}

#[test]
fn gamma_pair_point() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to(dir.path(), "g.json", &["gamma-pair", "--omega", "1", "--tau", "3"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!((v["gamma_weak"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((v["gamma_strong"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert_eq!(run(&["gamma-pair", "--omega", "1", "--tau", "2"]), 3);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["continuous", "--omega", "1", "--gamma", "0"]), 4);
    assert_eq!(run(&["pulsed", "--omega", "1", "--delta-t", "6.283185307179586"]), 4);
    assert_eq!(run(&["match", "--omega", "1", "--gamma", "1.4142", "--delta0", "10"]), 3);
    assert_eq!(run(&["match", "--omega", "1", "--gamma", "1", "--max-iter", "0", "--tol", "1e-15"]), 3);
    assert_eq!(run(&["preset", "fig7"]), 2);
    assert_eq!(run(&["continuous", "--omega", "1"]), 2);
    assert_eq!(run(&["continuous", "--omega", "-1", "--gamma", "1"]), 2);
    assert_eq!(run(&["continuous", "--omega", "1", "--gamma", "1", "--decay", "2"]), 2);
    assert_eq!(run(&["no-such-command"]), 2);
    assert_eq!(run(&["match", "--omega", "1", "--gamma", "1", "--method", "bogus"]), 2);
}

#[test]
fn binary_reports_exit_status() {
    let bin = env!("CARGO_BIN_EXE_zeno");
    let out = Command::new(bin).args(["continuous", "--omega", "1", "--gamma", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("never detected"));
    let out = Command::new(bin).args(["continuous", "--omega", "1", "--gamma", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"tau_c\": 3.0"));
}

#[test]
fn hertz_matches_scaled_angular() {
    let dir = tempfile::tempdir().unwrap();
    let x = 0.37;
    let two_pi_x = (2.0 * std::f64::consts::PI * x).to_string();
    let two_pi_2x = (2.0 * std::f64::consts::PI * 2.0 * x).to_string();
    let two_pi_3x = (2.0 * std::f64::consts::PI * 3.0 * x).to_string();
    let (x_s, x2_s, x3_s) = (x.to_string(), (2.0 * x).to_string(), (3.0 * x).to_string());
    let cases: [(Vec<&str>, Vec<&str>); 2] = [
        (
            vec!["match", "--units", "hertz", "--omega", &x_s, "--gamma", &x2_s, "--delta", &x3_s],
            vec!["match", "--omega", &two_pi_x, "--gamma", &two_pi_2x, "--delta", &two_pi_3x],
        ),
        (
            vec!["continuous", "--units", "hertz", "--omega", &x_s, "--gamma", &x2_s, "--delta", &x3_s],
            vec!["continuous", "--omega", &two_pi_x, "--gamma", &two_pi_2x, "--delta", &two_pi_3x],
        ),
    ];
    for (k, (hz, ang)) in cases.iter().enumerate() {
        let (c1, a) = run_to(dir.path(), &format!("hz{k}.json"), hz);
        let (c2, b) = run_to(dir.path(), &format!("ang{k}.json"), ang);
        assert_eq!((c1, c2), (0, 0));
        assert_eq!(a, b);
    }
}

#[test]
fn sweep_from_flags_round_trips_through_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let (code, first) = run_to(
        dir.path(),
        "a.csv",
        &[
            "sweep", "--variable", "gamma_over_omega", "--min", "0.1", "--max", "30", "--count", "25",
            "--spacing", "log", "--omega", "2", "--delta", "1", "--outputs", "tau_c,mean_t,delta_t_exact",
        ],
    );
    assert_eq!(code, 0);
    assert!(first.starts_with("# {"));
    assert_eq!(first.lines().nth(1).unwrap(), "gamma_over_omega,tau_c,mean_t,delta_t_exact");
    assert_eq!(first.lines().count(), 27);

    let src = dir.path().join("a.csv");
    let (code, second) = run_to(dir.path(), "b.csv", &["sweep", "--config", src.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(first, second);
}

#[test]
fn sweep_from_json_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("spec.json");
    std::fs::write(
        &cfg,
        r#"{"variable": "s0", "range": {"min": 1e-4, "max": 1e-2, "count": 5, "spacing": "log"},
            "fixed": {"omega": 304.7, "Omega": 0, "Gamma": 1.0933e7, "Delta": 2e7, "delta0": 0},
            "outputs": ["tau_c", "delta", "delta0"], "calibrate_delta0": "exact"}"#,
    )
    .unwrap();
    let (code, out) = run_to(dir.path(), "t.json", &["sweep", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["columns"], serde_json::json!(["s0", "tau_c", "delta", "delta0"]));
    for row in v["rows"].as_array().unwrap() {
        let (delta, delta0) = (row[2].as_f64().unwrap(), row[3].as_f64().unwrap());
        assert!(delta.abs() < 1e-10 * delta0.abs());
    }

    std::fs::write(&cfg, r#"{"variable": "s0"}"#).unwrap();
    assert_eq!(run(&["sweep", "--config", cfg.to_str().unwrap()]), 2);
}

#[test]
fn preset_replays_from_its_own_output() {
    let dir = tempfile::tempdir().unwrap();
    let (code, first) = run_to(dir.path(), "fig5.csv", &["preset", "fig5"]);
    assert_eq!(code, 0);
    let src = dir.path().join("fig5.csv");
    let (code, second) = run_to(dir.path(), "again.csv", &["sweep", "--config", src.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(first, second);

    let (code, a) = run_to(dir.path(), "d1.csv", &["preset", "fig6-dashed", "--delta-sign", "negative"]);
    assert_eq!(code, 0);
    let (_, b) = run_to(dir.path(), "d2.csv", &["preset", "fig6-dashed"]);
    assert_ne!(a, b);
    assert!(a.lines().next().unwrap().contains("\"delta_sign\":\"negative\""));
}

#[test]
fn evolve_traces() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to(dir.path(), "two.csv", &["evolve", "--omega", "1", "--gamma", "0.1", "--t-max", "100", "--points", "11"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().nth(1).unwrap(), "t,p1,p2,p_tot");
    // 40 points per beat period overrides the requested 11.
    assert!(out.lines().count() > 600);

    let (code, out) = run_to(
        dir.path(),
        "three.csv",
        &["evolve", "--omega", "1", "--coupling", "2", "--decay", "20", "--t-max", "10", "--points", "101"],
    );
    assert_eq!(code, 0);
    assert_eq!(out.lines().nth(1).unwrap(), "t,p1,p2,p3,p_tot");
    assert_eq!(out.lines().count(), 103);
}
