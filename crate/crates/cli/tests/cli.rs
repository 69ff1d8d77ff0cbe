use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qotto_cli::{run, Failure, Options};

fn qotto(config: &str, out: &Path, extra: &[&str]) -> Output {
    fs::create_dir_all(out).unwrap();
    let cfg = out.join("run.conf");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_qotto"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

const HARMONIC: &str = "command = cycle
[units]
system = natural
[potential_h]
shape = harmonic
omega = 2
[potential_c]
shape = harmonic
omega = 1
[temperature]
t_hot = 4
t_cold = 1
";

#[test]
fn harmonic_cycle_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = qotto(HARMONIC, dir.path(), &["--threads", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("cycle.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(col("mode"), "Engine");
    assert!((col("eta").parse::<f64>().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(col("eta"), "5.0000000000000000e-1");
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("cycle.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "cycle");
    assert_eq!(meta["config"]["temperature.t_hot"], "4e0");
    assert_eq!(meta["audit"]["hard_violations"], 0);
    assert!(meta["solver"]["rel_tol"].is_number());
}

#[test]
fn cold_bath_hotter_than_hot_bath_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = HARMONIC.replace("t_cold = 1", "t_cold = 5");
    let out = qotto(&cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("temperature.t_hot") && err.contains("T_h must exceed T_c"), "{err}");
    assert!(!dir.path().join("cycle.csv").exists());
}

#[test]
fn validation_errors_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        (HARMONIC.replace("omega = 2", "omega = -2"), "potential_h"),
        (format!("{HARMONIC}typo = 1\n"), "typo"),
        (HARMONIC.replace("command = cycle", "command = fly"), "command"),
        (HARMONIC.replace("system = natural", "system = imperial"), "units.system"),
        ("command = sweep-fig2\n[sweep]\nr = 1\n".to_string(), "sweep.g"),
        ("command = sweep-fig2\n[sweep]\nr = 0:2:0\ng = 1\n".to_string(), "sweep.r"),
        ("command = audit\n[audit]\nsamples = many\n".to_string(), "audit.samples"),
    ];
    for (cfg, field) in cases {
        let err = run(&cfg, tmp.path(), Options { strict_audit: false }).unwrap_err();
        assert_eq!(err.exit_code(), 1, "{err}");
        assert!(err.to_string().contains(field), "{field}: {err}");
    }
}

#[test]
fn solver_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "command = spectrum
[units]
system = natural
[potential]
shape = ion_trap
omega = 1
kappa = 1.7
lattice = 20
[spectrum]
n_levels = 10
[solver]
max_points = 16
";
    let out = qotto(cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn exit_codes() {
    assert_eq!(Failure::Validation(String::new()).exit_code(), 1);
    assert_eq!(Failure::Solver(String::new()).exit_code(), 2);
    assert_eq!(Failure::Audit(String::new()).exit_code(), 3);
}

#[test]
fn fig2_classical_regions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "command = sweep-fig2\n[sweep]\nr = 0.5:4:36\ng = -2:10:4\n";
    let out = qotto(cfg, dir.path(), &["--strict-audit"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("sweep_fig2_classical.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("r,g_over_gcri,W,Q_h,Q_c,mode,eta"));
    let r_car = 12f64.sqrt();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let r: f64 = f[0].parse().unwrap();
        let expect = if r > 1.0 && r < r_car {
            "Engine"
        } else if r > r_car {
            "Refrigerator"
        } else {
            "Broken"
        };
        assert_eq!(f[5], expect, "r = {r}");
    }
    assert!(dir.path().join("sweep_fig2_quantum.csv").exists());
    assert!(dir.path().join("sweep_fig2.meta.json").exists());
}

#[test]
fn defaulted_fig3_inputs_are_announced() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "command = sweep-fig3\n[sweep]\nkappa_c = 1\nomega_ratio = 1\nxi = 1, 2\n";
    let out = qotto(cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sweep.lattice not set"), "{err}");
    assert!(err.contains("sweep.omega_ref not set"), "{err}");
    let meta = fs::read_to_string(dir.path().join("sweep_fig3.meta.json")).unwrap();
    assert!(meta.contains("sweep.lattice not set"));
}
