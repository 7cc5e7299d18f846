//! How the order of the dipole series shapes the output light: a constant term
//! only displaces the vacuum, the linear term squeezes it and the higher terms
//! bend the Wigner function until it turns negative.

use num_complex::Complex64 as C64;
use qlight::field::{sample_pulse, to_atomic_units, Envelope, PulseParams};
use qlight::grid::UniformGrid;
use qlight::light::{build_initial_state, propagate_light_grid, LightInput, LightPropagation, MixedLightState};
use qlight::model::{eigensolve, make_superposition, PotentialModel};
use qlight::phase_space::{analyze, WignerOptions};
use qlight::response::{fit_series, sweep, QSampling};
use qlight::tdse::{ElectronRunSpec, ModeParams};

fn main() -> qlight::Result<()> {
    env_logger::init();
    let pulse = PulseParams {
        wavelength_nm: 2227.0,
        intensity_w_cm2: 1e13,
        n_cycles: 6.0,
        envelope: Envelope::SinSquared,
        cep: 0.0,
    };
    let (omega_l, _) = to_atomic_units(&pulse);
    let xgrid = UniformGrid::symmetric(819.2, 2048)?;
    let model = PotentialModel::hydrogen();
    let states = eigensolve(&model, &xgrid, 2)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let initial = make_superposition(&states, &[C64::new(s, 0.0), C64::new(s, 0.0)])?;
    let field = sample_pulse(&pulse, 0.02)?;
    let mode = ModeParams::harmonic(13, omega_l, 0.41);

    let base = ElectronRunSpec {
        model,
        grid: xgrid,
        initial,
        field: field.clone(),
        mode,
        beta_q: 0.0,
        absorber_width: 160.0,
        full_force: None,
    };
    let surface = sweep(&base, &QSampling::covering(-7.5, 7.5, 17, 0.0)?, None)?;
    let full = fit_series(&surface, 5)?;

    let qgrid = UniformGrid::symmetric(7.5, 512)?;
    let vacuum = build_initial_state(&LightInput::Vacuum, &qgrid)?;
    let phi0 = vacuum.as_pure().expect("vacuum is pure");

    println!("{:>6} {:>9} {:>9} {:>9} {:>9} {:>11}", "order", "<q>", "var_q", "var_p", "min var", "negativity");
    for order in [0, 1, 2, 5] {
        let series = full.truncate(order);
        let run = propagate_light_grid(phi0, &series, &field, &mode, &LightPropagation::default())?;
        let r = analyze(&MixedLightState::pure(run.state), None, &WignerOptions::default())?;
        println!(
            "{order:>6} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>11.3e}",
            r.mean_q, r.var_q, r.var_p, r.min_rotated_variance, r.negativity_volume
        );
    }
    Ok(())
}
