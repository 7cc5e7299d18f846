//! Ensemble scaling: N_e identical emitters add their resonant responses, so
//! the output displacement grows linearly in N_e and the photon number
//! quadratically.

use qlight::field::{sample_pulse, to_atomic_units, Envelope, PulseParams};
use qlight::grid::UniformGrid;
use qlight::light::{
    apply_flow, build_flow_map, build_initial_state, ensemble_response, flow_amplitude, EnsembleSpec, FlowWeighting,
    InverseMethod, LightInput,
};
use qlight::model::{calibrate, eigensolve, PotentialModel};
use qlight::phase_space::{analyze, WignerOptions};
use qlight::response::{fit_fomega, resonant_dipole, sweep, FitKind, QSampling};
use qlight::tdse::{ElectronRunSpec, ModeParams};

fn main() -> qlight::Result<()> {
    env_logger::init();
    let pulse = PulseParams {
        wavelength_nm: 1945.0,
        intensity_w_cm2: 4e13,
        n_cycles: 2.0,
        envelope: Envelope::SinSquared,
        cep: 0.0,
    };
    let (omega_l, _) = to_atomic_units(&pulse);
    let xgrid = UniformGrid::symmetric(819.2, 2048)?;
    let model = PotentialModel::two_center((0.7, -1.75), (0.3, 1.75), 9.0).with_target_ip(6.6);
    let model = calibrate(&model, &xgrid)?;
    let ground = eigensolve(&model, &xgrid, 1)?.remove(0);
    let field = sample_pulse(&pulse, 0.016)?;
    let beta = 1e-7;
    let mode = ModeParams::harmonic(5, omega_l, beta);

    let base = ElectronRunSpec {
        model,
        grid: xgrid,
        initial: ground,
        field: field.clone(),
        mode,
        beta_q: 0.0,
        absorber_width: 160.0,
        full_force: None,
    };
    let qgrid = UniformGrid::symmetric(40.0, 1024)?;
    let surface = sweep(&base, &QSampling::covering(-40.0, 40.0, 9, 0.0)?, None)?;
    let single = resonant_dipole(&surface, &mode, field.t_total)?;
    let single = fit_fomega(&single, 5, FitKind::Polynomial, (qgrid.min, qgrid.max))?;
    println!("single-emitter d_Ω ~ {:.4e}", single.amplitude());

    let vacuum = build_initial_state(&LightInput::Vacuum, &qgrid)?;
    let a = flow_amplitude(&mode, single.t_int);
    println!("{:>10} {:>10} {:>12} {:>12}", "N_e", "q_bar", "N_photons", "q_bar^2/2");
    for n_emitters in [1e8, 2e8, 4e8, 8e8] {
        let collective = ensemble_response(
            &single,
            &EnsembleSpec {
                n_emitters,
                per_emitter_beta: beta,
            },
        )?;
        let map = build_flow_map(&collective, a, Some((qgrid.min, qgrid.max)), InverseMethod::NewtonPerPoint)?;
        let out = vacuum.map(|s| apply_flow(s, &map, FlowWeighting::HalfDensity).map(|o| o.state))?;
        let r = analyze(&out, None, &WignerOptions::default())?;
        println!(
            "{n_emitters:>10.1e} {:>10.4} {:>12.4} {:>12.4}",
            r.q_bar,
            r.mean_photons,
            0.5 * r.q_bar * r.q_bar
        );
    }
    Ok(())
}
