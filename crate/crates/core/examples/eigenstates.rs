//! Bound states of the three bundled model systems.
//!
//! The Ca and CaO analogs are calibrated to their ionization potentials first;
//! the calibrated softening is printed next to the level table.

use qlight::grid::UniformGrid;
use qlight::model::{build_potential, calibrate, eigensolve, resonance_order, PotentialModel};
use qlight::units::{au_to_ev, omega_from_wavelength_nm};

fn main() -> qlight::Result<()> {
    let grid = UniformGrid::symmetric(102.4, 1024)?;
    let omega = omega_from_wavelength_nm(2227.0);

    let systems = [
        ("H", PotentialModel::hydrogen()),
        ("Ca", PotentialModel::soft_core(1.0, 12.0).with_target_ip(6.11)),
        (
            "CaO",
            PotentialModel::two_center((0.7, -1.75), (0.3, 1.75), 9.0).with_target_ip(6.6),
        ),
    ];

    for (name, model) in systems {
        let model = if model.target_ip.is_some() { calibrate(&model, &grid)? } else { model };
        let states = eigensolve(&model, &grid, 4)?;
        let v = build_potential(&model, &grid)?;
        let vmin = v.iter().cloned().fold(f64::INFINITY, f64::min);
        println!("{name}: softening {:.4}, V_min {:.4} a.u.", model.softening, vmin);
        for (i, s) in states.iter().enumerate() {
            let e = s.energy.unwrap_or(f64::NAN);
            let gap = resonance_order(&states[0], s, omega).unwrap_or(f64::NAN);
            println!(
                "  {i}: E = {e:+.6} a.u. ({:+.3} eV)  nodes {}  parity {:+.2}  (E-E0)/w = {gap:.2}",
                au_to_ev(e),
                s.node_count(),
                s.parity()
            );
        }
    }
    Ok(())
}
