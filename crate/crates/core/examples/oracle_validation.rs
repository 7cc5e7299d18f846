//! Check the factorized light state against a brute-force solve of the joint
//! electron–mode wavefunction for a few coupling strengths.
//!
//! Usage: `oracle_validation [beta] [halvings]` (defaults 1.0 and 1).

use qlight::oracle::{validation_suite, ValidationConfig};

fn main() -> qlight::Result<()> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let beta: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let halvings: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let cfg = ValidationConfig::small(beta)?;
    println!(
        "joint grid {} x {} points, {} light points for the factorized side",
        cfg.x_grid.n_points, cfg.q_grid.n_points, cfg.light_points
    );
    println!(
        "{:>8} {:>10} {:>10} {:>10} {:>10} {:>12}",
        "beta", "fidelity", "purity", "<q> joint", "<q> fact", "slice error"
    );
    for case in validation_suite(&cfg, halvings)? {
        println!(
            "{:>8.4} {:>10.6} {:>10.6} {:>10.5} {:>10.5} {:>12.3e}",
            case.beta,
            case.fidelity,
            case.purity,
            case.oracle_moments.mean_q,
            case.factorized_moments.mean_q,
            case.slice_dipole_error
        );
    }
    Ok(())
}
