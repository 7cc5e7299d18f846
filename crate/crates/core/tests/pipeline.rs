use std::fs;
use std::path::Path;

use qlight::harness::{compare, run_with, CompareTolerances, RunConfig, RunOptions};
use qlight::light::build_initial_state;
use qlight::phase_space::fidelity_mixed;

const SMALL: &str = r#"{
    "name": "small",
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

fn config(beta: f64) -> RunConfig {
    let mut cfg = RunConfig::from_json(SMALL).unwrap();
    cfg.mode.beta_au = beta;
    cfg
}

fn opts(root: &Path) -> RunOptions {
    RunOptions {
        propagator: None,
        cache_dir: Some(root.join("cache")),
    }
}

#[test]
fn zero_coupling_leaves_the_light_untouched() {
    let root = tempfile::tempdir().unwrap();
    let cfg = config(0.0);
    let out = run_with(&cfg, &root.path().join("run"), &opts(root.path())).unwrap();
    assert!(out.manifest.ok());
    let r = cfg.resolve().unwrap();
    let input = build_initial_state(&cfg.light.initial, &r.q_grid).unwrap();
    let light = out.light.unwrap();
    let f = fidelity_mixed(&light, input.as_pure().unwrap()).unwrap();
    assert!((1.0 - f).abs() < 1e-10, "fidelity {f}");
    let report = out.report.unwrap();
    assert!(report.mean_q.abs() < 1e-10 && report.mean_p.abs() < 1e-10);
    assert!((report.var_q - 0.5).abs() < 1e-6, "var_q {}", report.var_q);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let root = tempfile::tempdir().unwrap();
    let cfg = config(0.1);
    let a = root.path().join("a");
    let b = root.path().join("b");
    let ma = run_with(&cfg, &a, &opts(root.path())).unwrap().manifest;
    // second run without the cache so the electron stage is recomputed
    let mb = run_with(&cfg, &b, &RunOptions::default()).unwrap().manifest;
    assert_eq!(ma.config_hash, mb.config_hash);
    assert_eq!(ma.artifacts, mb.artifacts);
    for art in ma.artifacts.iter().filter(|x| x.path.ends_with(".csv")) {
        assert_eq!(fs::read(a.join(&art.path)).unwrap(), fs::read(b.join(&art.path)).unwrap(), "{}", art.path);
    }
    let report = compare(&a, &b, &CompareTolerances::default()).unwrap();
    assert!(report.pass);
    assert!((report.fidelity - 1.0).abs() < 1e-12);
    assert!(report.metric_deltas.values().all(|d| *d == 0.0), "{:?}", report.metric_deltas);
}

#[test]
fn compare_flags_a_different_coupling() {
    let root = tempfile::tempdir().unwrap();
    let a = root.path().join("a");
    let b = root.path().join("b");
    run_with(&config(0.0), &a, &opts(root.path())).unwrap();
    run_with(&config(0.4), &b, &opts(root.path())).unwrap();
    let tol = CompareTolerances {
        min_fidelity: 0.999999,
        max_l2: 1e-6,
        ..CompareTolerances::default()
    };
    let report = compare(&a, &b, &tol).unwrap();
    assert!(!report.pass);
    assert!(!report.failures.is_empty());
}

#[test]
fn failed_stage_is_recorded_in_the_manifest() {
    let root = tempfile::tempdir().unwrap();
    let mut cfg = config(0.1);
    // too coarse for the kinetic guard
    cfg.time_step_au = 2.0;
    let dir = root.path().join("bad");
    assert!(run_with(&cfg, &dir, &RunOptions::default()).is_err());
    let (m, _) = qlight::harness::RunManifest::load(&dir).unwrap();
    assert!(!m.ok());
    assert_eq!(m.failed_stage.as_deref(), Some("sweep"));
    assert!(m.error.is_some());
}
