//! Wigner functions and nonclassicality measures for a few reference states.
//! Pass a directory to also write each grid as CSV plus JSON metadata.

use std::path::PathBuf;

use qlight::grid::UniformGrid;
use qlight::light::{build_initial_state, FockWeighting, LightInput};
use qlight::phase_space::{report_from, wigner, WignerOptions};

fn main() -> qlight::Result<()> {
    let out: Option<PathBuf> = std::env::args().nth(1).map(PathBuf::from);
    if let Some(dir) = &out {
        std::fs::create_dir_all(dir)?;
    }
    let grid = UniformGrid::symmetric(10.0, 256)?;
    let gallery = [
        ("vacuum", LightInput::Vacuum),
        ("coherent", LightInput::Coherent { q0: 2.0, p0: -1.0 }),
        (
            "squeezed",
            LightInput::Squeezed {
                var_q: 0.2,
                q0: 0.0,
                p0: 0.0,
            },
        ),
        ("fock1", LightInput::Fock { n: 1 }),
        ("fock3", LightInput::Fock { n: 3 }),
        (
            "mixture",
            LightInput::FockMixture {
                weights: vec![0.883, 0.07, 0.03, 0.017],
                weighting: FockWeighting::Incoherent,
                phases: vec![],
            },
        ),
        (
            "superposition",
            LightInput::FockMixture {
                weights: vec![0.883, 0.07, 0.03, 0.017],
                weighting: FockWeighting::Coherent,
                phases: vec![],
            },
        ),
    ];

    println!(
        "{:<14} {:>10} {:>10} {:>8} {:>8} {:>8} {:>8}",
        "state", "negativity", "W_min", "var_q", "var_p", "min var", "photons"
    );
    for (name, input) in gallery {
        let state = build_initial_state(&input, &grid)?;
        let w = wigner(&state, &WignerOptions::default())?;
        let r = report_from(&state, &w, None)?;
        println!(
            "{name:<14} {:>10.3e} {:>10.3e} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            r.negativity_volume, r.wigner_min, r.var_q, r.var_p, r.min_rotated_variance, r.mean_photons
        );
        if let Some(dir) = &out {
            w.write_bundle(dir, name)?;
        }
    }
    Ok(())
}
