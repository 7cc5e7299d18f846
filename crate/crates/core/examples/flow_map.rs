//! Closed-form transport of a light state along the flow of a resonant profile.
//!
//! f_Ω(q) is a hand-picked quadratic here; `qlight run` builds it from a
//! dipole sweep instead.

use qlight::grid::UniformGrid;
use qlight::light::flow::{build_from_model, characteristic};
use qlight::light::{apply_flow, build_initial_state, FlowWeighting, InverseMethod, LightInput, MixedLightState};
use qlight::phase_space::{analyze, WignerOptions};
use qlight::poly::Polynomial;
use qlight::response::FomegaModel;

fn main() -> qlight::Result<()> {
    let f = FomegaModel::Polynomial(Polynomial::new(vec![1.0, 0.15, 0.03]));
    let grid = UniformGrid::symmetric(16.0, 1024)?;
    let input = build_initial_state(&LightInput::Vacuum, &grid)?;
    let phi0 = input.as_pure().expect("vacuum is pure");

    for a in [-0.5, -1.0, -1.5] {
        let newton = build_from_model(&f, a, (-16.0, 16.0), InverseMethod::NewtonPerPoint)?;
        // reversion only converges on a window around the anchor
        let series = build_from_model(&f, a, (-1.5, 1.5), InverseMethod::SeriesReversion);

        let mut worst_newton: f64 = 0.0;
        let mut worst_series: f64 = 0.0;
        for q in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            let exact = characteristic(&f, q, a, 2000);
            if let Some(x) = newton.image(q) {
                worst_newton = worst_newton.max((x - exact).abs());
            }
            if let Some(x) = series.as_ref().ok().and_then(|m| m.image(q)) {
                worst_series = worst_series.max((x - exact).abs());
            }
        }
        match &series {
            Ok(_) => println!("a = {a:+.1}: |X - X_rk4| newton {worst_newton:.1e}, reversion {worst_series:.1e}"),
            Err(e) => println!("a = {a:+.1}: |X - X_rk4| newton {worst_newton:.1e}, reversion unavailable ({e})"),
        }

        for weighting in [FlowWeighting::Transport, FlowWeighting::HalfDensity] {
            let out = apply_flow(phi0, &newton, weighting)?;
            let r = analyze(&MixedLightState::pure(out.state), None, &WignerOptions::default())?;
            println!(
                "  {weighting:?}: <q> {:+.4} var_q {:.4} var_p {:.4} min var {:.4} negativity {:.2e}",
                r.mean_q, r.var_q, r.var_p, r.min_rotated_variance, r.negativity_volume
            );
        }
    }
    Ok(())
}
