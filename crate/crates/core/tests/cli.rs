//! End-to-end runs of the `vlasov-shell` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vlasov-shell"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("shell.toml");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn classify_trapped_block() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "classify", "--M", "1", "--E", "0.97", "--l", "16", "--r", "10",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("region = Bound"));
    assert!(text.contains("class = TrappedOscillating"));
    assert!(text.contains("l_lb(E) = 1.40341638"));
}

#[test]
fn classify_flags_the_lower_bound() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["classify", "--E", "1", "--l", "16"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("note: l = l_lb(E)"));
    assert!(text.contains("multiplicity 2"));
}

#[test]
fn classify_inside_forbidden_region_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["classify", "--E", "0.97", "--l", "16", "--r", "5"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("inadmissible"));
}

#[test]
fn orbit_writes_an_oscillating_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("orbit.csv");
    let o = run(
        &[
            "orbit",
            "--E",
            "0.97",
            "--l",
            "16",
            "--r",
            "10",
            "--tau-max",
            "3000",
            "--out",
            csv.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("tau,r,w"));
    let w: Vec<f64> = lines
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(w.iter().any(|&v| v > 0.0) && w.iter().any(|&v| v < 0.0));
    assert!(stdout(&o).contains("signature_agrees = true"));
}

#[test]
fn solve_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "M = 1.0\n[ansatz]\ndelta = 1e-3\n[solver]\nN = 1000\n",
    );
    let o = run(&["solve", &cfg, "--out", "res"], dir.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let res = dir.path().join("res");
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(res.join("summary.json")).unwrap()).unwrap();
    for key in [
        "M",
        "delta",
        "Rmin",
        "Rmax",
        "Mdelta",
        "iterations",
        "final_update_norm",
        "lapse_constant",
    ] {
        assert!(summary.get(key).is_some(), "missing {key}");
    }
    let residuals = &summary["residuals"];
    let val = |v: &serde_json::Value| v.to_string().parse::<f64>().unwrap();
    assert!(val(&residuals["rev1"]) < 1e-6);
    assert!(val(&residuals["rev2"]) < 1e-6);
    assert!(val(&residuals["tov"]) < 1e-3);
    assert!(fs::read_to_string(res.join("mu_lambda.csv"))
        .unwrap()
        .starts_with("r,mu,lambda,m\n"));
    let profiles = fs::read_to_string(res.join("profiles.csv")).unwrap();
    assert!(profiles.starts_with("r,rho,p,pT\n"));
    assert_eq!(profiles.lines().count(), 1001);
}

#[test]
fn output_dir_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "output_dir = \"from_cfg\"\nansatz.delta = 0.0\nsolver.N = 400\n",
    );
    let o = run(&["solve", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("from_cfg/summary.json").exists());
}

#[test]
fn sweep_records_failures_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[solver]\nN = 600\n");
    let o = run(
        &[
            "sweep",
            &cfg,
            "--deltas",
            "0,1e-4,1e-3,0.9",
            "--parallel",
            "--out",
            "sw",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("sw/sweep.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 4);
    let masses: Vec<f64> = rows[..3].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(masses[0] <= masses[1] && masses[1] <= masses[2]);
    assert!(rows[..3].iter().all(|r| r[5] == "ok"));
    assert_eq!(rows[3][5], "domain");
    let slopes: Vec<f64> = [1, 2]
        .iter()
        .map(|&i| (masses[i] - 1.0) / rows[i][0].parse::<f64>().unwrap())
        .collect();
    assert!((slopes[0] - slopes[1]).abs() / slopes[1] < 0.1);
}

#[test]
fn validate_passes_clean_and_fails_under_faults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[solver]\nN = 1000\n");
    let clean = run(&["validate", &cfg, "--out", "v"], dir.path());
    assert_eq!(clean.status.code(), Some(0), "{}", stdout(&clean));
    let report = fs::read_to_string(dir.path().join("v/validation.json")).unwrap();
    assert!(report.contains("\"thresholds\""));
    for fault in ["scale_mu", "zero_pt", "truncate_shell", "amplitude_blowup"] {
        let o = run(
            &["validate", &cfg, "--fault", fault, "--out", "v"],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(1), "fault {fault}");
    }
    let faulted = write_config(
        dir.path(),
        "[solver]\nN = 1000\n[validate]\nfault = \"zero_pt\"\n",
    );
    assert_eq!(
        run(&["validate", &faulted, "--out", "v"], dir.path())
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn vacuum_validate_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ansatz.delta = 0.0\nsolver.N = 400\n");
    assert_eq!(
        run(&["validate", &cfg, "--out", "v"], dir.path())
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn usage_and_config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["bogus"], dir.path()).status.code(), Some(2));
    assert_eq!(
        run(&["classify", "--E", "x", "--l", "1"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["solve", "missing.toml"], dir.path()).status.code(),
        Some(2)
    );
    let bad_box = write_config(dir.path(), "[ansatz]\nE1 = 0.95\nl1 = 12.5\nl2 = 13.0\n");
    assert_eq!(run(&["solve", &bad_box], dir.path()).status.code(), Some(2));
    let unknown = write_config(dir.path(), "[solver]\nsteps = 4\n");
    assert_eq!(run(&["solve", &unknown], dir.path()).status.code(), Some(2));
    let cfg = write_config(dir.path(), "solver.N = 400\n");
    assert_eq!(
        run(&["validate", &cfg, "--fault", "nope"], dir.path())
            .status
            .code(),
        Some(2)
    );
    let o = Command::new(env!("CARGO_BIN_EXE_vlasov-shell"))
        .args(["solve", &cfg])
        .current_dir(dir.path())
        .env("VLASOV_SHELL_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn repeated_solves_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[solver]\nN = 800\n");
    for out in ["a", "b"] {
        assert_eq!(
            run(&["solve", &cfg, "--out", out], dir.path())
                .status
                .code(),
            Some(0)
        );
    }
    for f in ["mu_lambda.csv", "profiles.csv", "summary.json"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert!(a == b, "{f} differs");
    }
}
