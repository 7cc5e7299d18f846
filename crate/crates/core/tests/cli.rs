use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"{
    "name": "cli_small",
    "model": {"kind": "hydrogen"},
    "electron_grid": {"half_width_au": 204.8, "points": 512, "absorber_au": 40.0},
    "initial_electron": {"kind": "superposition", "states": [0, 1], "amplitudes": [1.0, 1.0]},
    "pulse": {"wavelength_nm": 800, "intensity_W_cm2": 1e13, "duration_cycles": 2},
    "time_step_au": 0.05,
    "mode": {"harmonic": 5, "beta_au": 0.1},
    "q_sampling": {"min": -7.5, "max": 7.5, "points": 9},
    "light": {"initial": {"kind": "vacuum"}, "half_width": 7.5, "points": 128},
    "series": {"fit_order": 3}
}"#;

fn qlight(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlight"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn recipes_are_listed_and_shown() {
    let out = qlight(&["recipes", "list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("fig1b"));
    assert!(qlight(&["recipes", "show", "fig1b"]).status.success());
    assert_eq!(qlight(&["recipes", "show", "nope"]).status.code(), Some(2));
}

#[test]
fn configuration_problems_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qlight(&["run", "--out", s(dir.path())]).status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, SMALL.replace("\"time_step_au\"", "\"typo\": 1, \"time_step_au\"")).unwrap();
    assert_eq!(qlight(&["run", "--config", s(&bad), "--out", s(&dir.path().join("o"))]).status.code(), Some(2));
    let missing = dir.path().join("nothing");
    assert_eq!(qlight(&["compare", s(&missing), s(&missing)]).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("coarse.json");
    std::fs::write(&cfg, SMALL.replace("\"time_step_au\": 0.05", "\"time_step_au\": 2.0")).unwrap();
    let out = qlight(&["run", "--config", s(&cfg), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn run_wigner_eigensolve_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.json");
    std::fs::write(&cfg, SMALL).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let r = qlight(&["run", "--config", s(&cfg), "--out", s(out)]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
        assert!(out.join("manifest.json").exists());
    }
    assert!(qlight(&["compare", s(&a), s(&b)]).status.success());

    let w = dir.path().join("w");
    assert!(qlight(&["wigner", "--state", s(&a), "--out", s(&w)]).status.success());
    assert!(w.join("metrics.json").exists());

    let e = dir.path().join("e");
    let r = qlight(&["eigensolve", "--config", s(&cfg), "--states", "2", "--out", s(&e)]);
    assert!(r.status.success());
    assert!(e.join("eigenstates.csv").exists());

    // a run with a different coupling disagrees
    let c = dir.path().join("c");
    let cfg2 = dir.path().join("strong.json");
    std::fs::write(&cfg2, SMALL.replace("\"beta_au\": 0.1", "\"beta_au\": 0.5")).unwrap();
    assert!(qlight(&["run", "--config", s(&cfg2), "--out", s(&c)]).status.success());
    let r = qlight(&["compare", s(&a), s(&c), "--min-fidelity", "0.999999", "--max-l2", "1e-6"]);
    assert_eq!(r.status.code(), Some(3));
}
