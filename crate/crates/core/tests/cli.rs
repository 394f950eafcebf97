use std::fs;
use std::process::{Command, Output};

use kg_virial::io::{read_summary, read_timeseries};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kg-virial"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn version_flag() {
    let o = cli(&["--version"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn describe_prints_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    fs::write(&path, "# decay run\nmodel=phi6\nepsilon=0.02\n").unwrap();
    let o = cli(&[
        "decay",
        "--config",
        path.to_str().unwrap(),
        "--set",
        "epsilon=0.01",
        "--describe",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    for line in [
        "scenario=decay",
        "model=phi6",
        "epsilon=0.01",
        "L=80",
        "N=7999",
        "lambda=10",
    ] {
        assert!(text.lines().any(|l| l == line), "missing {line} in\n{text}");
    }
}

#[test]
fn config_errors_exit_2() {
    for args in [
        &["decay", "--set", "model=phi4", "--set", "epslion=0.1"][..],
        &["decay", "--set", "model=phi4", "--set", "epsilon=-1"],
        &["decay", "--set", "model=phi5"],
        &["breather"],
        &[
            "decay",
            "--config",
            "/nonexistent/run.cfg",
            "--set",
            "model=phi4",
        ],
    ] {
        let o = cli(args);
        let expected = if args.contains(&"/nonexistent/run.cfg") {
            1
        } else {
            2
        };
        assert_eq!(o.status.code(), Some(expected), "{args:?}");
    }
}

#[test]
fn decay_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = cli(&[
        "decay",
        "--set",
        "model=sine-gordon",
        "--set",
        "N=799",
        "--set",
        "T=5",
        "--set",
        &format!("output_dir={}", out.display()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read_summary(&out.join("summary.txt")).unwrap();
    for key in [
        "status",
        "H_ratio",
        "J_T",
        "J_T_over_eps2",
        "min_virial_coercivity",
        "max_dH_ratio",
        "sup_energy_norm",
        "smallness_held",
    ] {
        assert!(summary.get(key).is_some(), "missing {key}");
    }
    assert_eq!(summary.get("status"), Some("ok"));
    let recs = read_timeseries(&out.join("timeseries.csv")).unwrap();
    assert_eq!(recs.first().unwrap().t, 0.0);
    assert!((recs.last().unwrap().t - 5.0).abs() < 1e-2);
}

#[test]
fn smallness_violation_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&[
        "decay",
        "--set",
        "model=phi4",
        "--set",
        "N=799",
        "--set",
        "T=20",
        "--set",
        &format!("output_dir={}", dir.path().display()),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let summary = read_summary(&dir.path().join("summary.txt")).unwrap();
    assert_eq!(summary.get("status"), Some("failed"));
    assert_eq!(summary.get("smallness_held"), Some("false"));
    assert!(summary.get("reason").unwrap().contains("smallness"));
}

#[test]
fn breather_has_exact_error_column() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&[
        "breather",
        "--set",
        "beta=0.5",
        "--set",
        "L=30",
        "--set",
        "N=599",
        "--set",
        &format!("output_dir={}", dir.path().display()),
    ]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
    assert!(csv.lines().next().unwrap().ends_with(",exact_l2_error"));
    let summary = read_summary(&dir.path().join("summary.txt")).unwrap();
    assert!(summary.get_f64("H_period_3_ratio").unwrap() > 0.8);
}

#[test]
fn convergence_reports_orders() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&[
        "convergence",
        "--set",
        "submode=breather",
        "--set",
        "beta=0.5",
        "--set",
        "L=30",
        "--set",
        "N=599",
        "--set",
        "T=4",
        "--set",
        &format!("output_dir={}", dir.path().display()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_summary(&dir.path().join("summary.txt")).unwrap();
    let order = s.get_f64("exact_error_order").unwrap();
    assert!((1.8..2.2).contains(&order), "order {order}");
    assert!(s.get_f64("energy_drift_order").is_some());
    assert!(s.get_f64("virial_residual_order").is_some());
}

#[test]
fn spectral_and_virial_check_pass() {
    for scenario in ["spectral", "virial-check"] {
        let dir = tempfile::tempdir().unwrap();
        let o = cli(&[
            scenario,
            "--set",
            "N=3999",
            "--set",
            &format!("output_dir={}", dir.path().display()),
        ]);
        assert!(o.status.success(), "{scenario}: {}", stdout(&o));
        assert!(dir.path().join("summary.txt").exists());
        assert!(!dir.path().join("timeseries.csv").exists());
    }
}
