//! Harmonic spectrum of a single driven hydrogen trace, with the mode coupling
//! switched off. Prints the odd-harmonic plateau and the classical cutoff.

use qlight::field::{sample_pulse, to_atomic_units, Envelope, PulseParams};
use qlight::grid::UniformGrid;
use qlight::model::{cutoff_energy, eigensolve, PotentialModel};
use qlight::tdse::{dipole_spectrum, propagate_electron, ElectronRunSpec, ModeParams, Window};

fn main() -> qlight::Result<()> {
    let pulse = PulseParams {
        wavelength_nm: 800.0,
        intensity_w_cm2: 1e14,
        n_cycles: 4.0,
        envelope: Envelope::SinSquared,
        cep: 0.0,
    };
    let (omega_l, f0) = to_atomic_units(&pulse);
    let grid = UniformGrid::symmetric(204.8, 512)?;
    let model = PotentialModel::hydrogen();
    let ground = eigensolve(&model, &grid, 1)?.remove(0);
    let ip = -ground.energy.unwrap_or(0.5);

    let spec = ElectronRunSpec {
        model,
        grid,
        initial: ground,
        field: sample_pulse(&pulse, 0.04)?,
        mode: ModeParams::harmonic(1, omega_l, 0.0),
        beta_q: 0.0,
        absorber_width: 40.0,
        full_force: None,
    };
    let trace = propagate_electron(&spec)?;
    println!("final norm {:.4}", trace.norm_trace.last().copied().unwrap_or(1.0));

    let spectrum = dipole_spectrum(&trace, Window::Hann, omega_l)?;
    let cutoff = cutoff_energy(ip, f0, omega_l) / omega_l;
    println!("cutoff ~ harmonic {cutoff:.1}");
    for h in (1..=35).step_by(2) {
        let peak = spectrum
            .iter()
            .filter(|s| (s.order - h as f64).abs() < 0.5)
            .map(|s| s.amplitude.norm_sqr())
            .fold(0.0f64, f64::max);
        let bar = "#".repeat(((peak.log10() + 16.0).max(0.0) * 3.0) as usize);
        println!("{h:>3} {peak:10.3e} {bar}");
    }
    Ok(())
}
