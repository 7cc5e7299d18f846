//! End-to-end runs through the harness: the same reduced configuration with
//! the full dipole series and with only its linear part, then a comparison.
//! The second run reuses the cached electron sweep.
//!
//! Usage: `pipeline_run [out_dir]`. Bundled figure recipes run the same way
//! through `qlight run --recipe NAME`.

use std::path::PathBuf;

use qlight::harness::{compare, run_with, CompareTolerances, RunConfig, RunOptions};

const CONFIG: &str = r#"{
  "name": "reduced_hydrogen",
  "description": "Hydrogen superposition, six-cycle 2227 nm pulse, 13th harmonic, coarse grids",
  "model": { "kind": "hydrogen" },
  "electron_grid": { "half_width_au": 819.2, "points": 2048, "absorber_au": 160.0 },
  "initial_electron": { "kind": "superposition", "states": [0, 1], "amplitudes": [1.0, 1.0] },
  "pulse": {
    "wavelength_nm": 2227.0,
    "intensity_W_cm2": 1e13,
    "duration_cycles": 6.0,
    "envelope": { "shape": "sin_squared" },
    "cep_rad": 0.0
  },
  "time_step_au": 0.02,
  "mode": { "harmonic": 13, "beta_au": 0.41 },
  "q_sampling": { "min": -7.5, "max": 7.5, "points": 17 },
  "light": { "initial": { "kind": "vacuum" }, "half_width": 7.5, "points": 512 },
  "propagator": "grid",
  "series": { "fit_order": 5 }
}"#;

const KEYS: [&str; 5] = ["mean_q", "var_q", "var_p", "min_rotated_variance", "negativity_volume"];

fn main() -> qlight::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("qlight_pipeline"));
    let opts = RunOptions {
        propagator: None,
        cache_dir: Some(root.join("cache")),
    };

    let full = RunConfig::from_json(CONFIG)?;
    let mut linear = full.clone();
    linear.name = "reduced_hydrogen_linear".into();
    if let Some(s) = linear.series.as_mut() {
        s.truncate_order = Some(1);
    }

    let mut dirs = Vec::new();
    for cfg in [&full, &linear] {
        let dir = root.join(&cfg.name);
        let out = run_with(cfg, &dir, &opts)?;
        println!("{} (config {})", cfg.name, &out.manifest.config_hash[..12]);
        for key in KEYS {
            if let Some(v) = out.manifest.metrics.get(key) {
                println!("  {key:<22} {v:+.6e}");
            }
        }
        for t in &out.manifest.timings {
            println!("  stage {:<10} {:>7.2} s", t.stage, t.seconds);
        }
        dirs.push(dir);
    }

    let report = compare(&dirs[0], &dirs[1], &CompareTolerances::default())?;
    println!("full vs linear series: fidelity {:.6}", report.fidelity);
    for f in &report.failures {
        println!("  {f}");
    }
    println!("outputs in {}", root.display());
    Ok(())
}
