//! Brute-force reference: the electron and the light mode propagated together
//! on a two-dimensional (x, q) grid, with both parts of the mode force kept.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{self, Envelope, PulseParams, SampledField};
use crate::grid::{FftPair, QuadratureGrid, SpatialGrid};
use crate::interp;
use crate::light::state::{gaussian_state, LightState, Moments};
use crate::light::{propagate_light_grid, LightPropagation, SurfaceSpline};
use crate::model::{self, ElectronicState, PotentialModel};
use crate::phase_space::DensityMatrix;
use crate::response::{sweep, QSampling};
use crate::tdse::{ElectronRunSpec, ModeParams};
use crate::units::ELECTRON_CHARGE;

/// Largest grid the oracle accepts.
pub const MAX_X_POINTS: usize = 2048;
pub const MAX_Q_POINTS: usize = 512;
/// Allowed norm drift over a full propagation.
pub const MAX_NORM_DRIFT: f64 = 1e-7;

/// Ψ(x_i, q_j), stored q-major so that each x row is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    pub x_grid: SpatialGrid,
    pub q_grid: QuadratureGrid,
    pub amplitudes: Vec<C64>,
}

impl BipartiteState {
    pub fn product(electron: &ElectronicState, light: &LightState) -> Self {
        let mut amplitudes = Vec::with_capacity(electron.amplitudes.len() * light.amplitudes.len());
        for b in &light.amplitudes {
            amplitudes.extend(electron.amplitudes.iter().map(|a| a * b));
        }
        Self {
            x_grid: electron.grid,
            q_grid: light.grid,
            amplitudes,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.amplitudes[j * self.x_grid.n_points + i]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.x_grid.spacing() * self.q_grid.spacing()
    }

    /// ⟨x⟩ conditional on q = q_j.
    pub fn slice_dipole(&self, j: usize) -> f64 {
        let nx = self.x_grid.n_points;
        let row = &self.amplitudes[j * nx..(j + 1) * nx];
        let (mut num, mut den) = (0.0, 0.0);
        for (i, z) in row.iter().enumerate() {
            let p = z.norm_sqr();
            num += self.x_grid.point(i) * p;
            den += p;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }
}

/// ρ(q, q′) = ∫Ψ*(x, q′)Ψ(x, q)dx and its purity.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedLightDensity {
    pub density: DensityMatrix,
    pub purity: f64,
}

pub fn reduce_to_light(state: &BipartiteState) -> ReducedLightDensity {
    let nx = state.x_grid.n_points;
    let nq = state.q_grid.n_points;
    let dx = state.x_grid.spacing();
    let psi = DMatrix::from_column_slice(nx, nq, &state.amplitudes);
    // columns are q; ρ = Ψᵀ Ψ̄ dx
    let rho = psi.transpose() * psi.map(|z| z.conj()) * C64::from(dx);
    let density = DensityMatrix {
        grid: state.q_grid,
        rho,
    };
    let purity = density.purity();
    ReducedLightDensity { density, purity }
}

#[derive(Debug, Clone)]
pub struct OracleSpec {
    pub model: PotentialModel,
    pub electron: ElectronicState,
    pub light: LightState,
    pub field: SampledField,
    pub mode: ModeParams,
    /// Record the conditional dipole at the q-grid point nearest to this value.
    pub probe_q: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct OracleRun {
    pub state: BipartiteState,
    pub norm_drift: f64,
    /// (q actually probed, ⟨x⟩ per time step).
    pub probe: Option<(f64, Vec<f64>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub purity: f64,
    pub trace: f64,
    pub hermiticity_error: f64,
    pub norm_drift: f64,
}

fn check_resources(x: &SpatialGrid, q: &QuadratureGrid) -> Result<()> {
    if x.n_points > MAX_X_POINTS || q.n_points > MAX_Q_POINTS {
        let mb = (x.n_points * q.n_points * 16 * 3) as f64 / 1e6;
        return Err(Error::Resource(format!(
            "oracle grid {}×{} exceeds {MAX_X_POINTS}×{MAX_Q_POINTS} (would need about {mb:.0} MB)",
            x.n_points, q.n_points
        )));
    }
    Ok(())
}

/// Split step: A/2 (potential, both local forces) · C/2 (q shift ∝ x) · B (kinetic) · C/2 · A/2.
pub fn propagate_full(spec: &OracleSpec) -> Result<OracleRun> {
    let xg = spec.electron.grid;
    let qg = spec.light.grid;
    check_resources(&xg, &qg)?;
    spec.mode.validate()?;
    let dt = spec.field.dt;
    let pmax = xg.k_max();
    if dt * pmax * pmax / 2.0 >= 0.5 {
        return Err(Error::Resolution(format!(
            "dt·p_max²/2 = {:.3} must stay below 0.5",
            dt * pmax * pmax / 2.0
        )));
    }
    let (nx, nq) = (xg.n_points, qg.n_points);
    let v = model::build_potential(&spec.model, &xg)?;
    let xs = xg.points();
    let qs = qg.points();
    let kx = xg.wavenumbers();
    let kq = qg.wavenumbers();
    let kappa = spec.mode.coupling();
    let omega = spec.mode.omega;
    let e = ELECTRON_CHARGE;
    let kinetic: Vec<C64> = kx.iter().map(|k| C64::from_polar(1.0, -0.5 * k * k * dt)).collect();

    let mut state = BipartiteState::product(&spec.electron, &spec.light);
    let norm0 = state.norm_sqr();
    let mut swap = vec![C64::new(0.0, 0.0); nx * nq];
    let probe_j = spec
        .probe_q
        .map(|q| ((q - qg.min) / qg.spacing()).round().clamp(0.0, (nq - 1) as f64) as usize);
    let mut probe = probe_j.map(|j| (qs[j], vec![state.slice_dipole(j)]));

    let half_potential = |psi: &mut [C64], t: f64, f: f64| {
        let s = kappa * (omega * t).sin();
        psi.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
            let force = f + s * qs[j];
            for (i, z) in row.iter_mut().enumerate() {
                *z *= C64::from_polar(1.0, -0.5 * dt * (v[i] + e * xs[i] * force));
            }
        });
    };
    // exp(+i (dt/2) e κ cos Ωt x k_q) applied along q for every x
    let half_shift = |psi: &mut Vec<C64>, swap: &mut Vec<C64>, t: f64| {
        let c = 0.5 * dt * e * kappa * (omega * t).cos();
        if c == 0.0 {
            return;
        }
        transpose(psi, swap, nq, nx);
        swap.par_chunks_mut(nq).enumerate().for_each_init(
            || FftPair::new(nq),
            |fft, (i, col)| {
                fft.forward(col);
                for (z, k) in col.iter_mut().zip(&kq) {
                    *z *= C64::from_polar(1.0, c * xs[i] * k);
                }
                fft.inverse(col);
            },
        );
        transpose(swap, psi, nx, nq);
    };

    let steps = spec.field.steps();
    for n in 0..steps {
        let (t0, t1) = (n as f64 * dt, (n + 1) as f64 * dt);
        let tm = 0.5 * (t0 + t1);
        half_potential(&mut state.amplitudes, t0, spec.field.values[n]);
        half_shift(&mut state.amplitudes, &mut swap, tm);
        state.amplitudes.par_chunks_mut(nx).for_each_init(
            || FftPair::new(nx),
            |fft, row| {
                fft.forward(row);
                for (z, k) in row.iter_mut().zip(&kinetic) {
                    *z *= k;
                }
                fft.inverse(row);
            },
        );
        half_shift(&mut state.amplitudes, &mut swap, tm);
        half_potential(&mut state.amplitudes, t1, spec.field.values[n + 1]);
        if let (Some(j), Some((_, trace))) = (probe_j, probe.as_mut()) {
            trace.push(state.slice_dipole(j));
        }
        if n % 256 == 0 && state.amplitudes.iter().any(|z| !z.re.is_finite()) {
            return Err(Error::NotFinite { step: n + 1 });
        }
    }
    let norm_drift = (state.norm_sqr() - norm0).abs();
    if norm_drift > MAX_NORM_DRIFT {
        return Err(Error::NormDrift { drift: norm_drift });
    }
    Ok(OracleRun {
        state,
        norm_drift,
        probe,
    })
}

/// `dst[c * rows + r] = src[r * cols + c]` for a `rows × cols` source.
fn transpose(src: &[C64], dst: &mut [C64], rows: usize, cols: usize) {
    const B: usize = 32;
    for rb in (0..rows).step_by(B) {
        for cb in (0..cols).step_by(B) {
            for r in rb..(rb + B).min(rows) {
                for c in cb..(cb + B).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

pub fn summarize(run: &OracleRun, reduced: &ReducedLightDensity) -> OracleSummary {
    OracleSummary {
        purity: reduced.purity,
        trace: reduced.density.trace(),
        hermiticity_error: reduced.density.hermiticity_error(),
        norm_drift: run.norm_drift,
    }
}

/// Reduced density matrix as CSV rows `i, j, Re ρ, Im ρ`.
pub fn write_density_csv(rho: &DensityMatrix, path: &std::path::Path) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "q,q_prime,re,im")?;
    let n = rho.rho.nrows();
    for i in 0..n {
        for j in 0..n {
            let z = rho.rho[(i, j)];
            writeln!(out, "{:.10e},{:.10e},{:.10e},{:.10e}", rho.grid.point(i), rho.grid.point(j), z.re, z.im)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// One factorized-versus-oracle comparison. The electron starts in the
/// ground state and the light mode in vacuum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub model: PotentialModel,
    pub x_grid: SpatialGrid,
    pub q_grid: QuadratureGrid,
    pub pulse: PulseParams,
    pub dt: f64,
    pub harmonic: u32,
    pub beta: f64,
    /// Points of the finer grid the factorized light equation is solved on.
    pub light_points: usize,
}

impl ValidationConfig {
    /// Two-cycle 800 nm pulse on a soft-core hydrogen, fifth harmonic, 256×64 grid.
    pub fn small(beta: f64) -> Result<Self> {
        Ok(Self {
            model: PotentialModel::hydrogen(),
            x_grid: SpatialGrid::symmetric(51.2, 256)?,
            q_grid: QuadratureGrid::symmetric(8.0, 64)?,
            pulse: PulseParams {
                wavelength_nm: 800.0,
                intensity_w_cm2: 1e13,
                n_cycles: 2.0,
                envelope: Envelope::SinSquared,
                cep: 0.0,
            },
            dt: 0.015,
            harmonic: 5,
            beta,
            light_points: 512,
        })
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        Self { beta, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationCase {
    pub beta: f64,
    /// ⟨φ_fact|ρ|φ_fact⟩.
    pub fidelity: f64,
    pub purity: f64,
    pub oracle_norm_drift: f64,
    pub light_norm_drift: f64,
    pub oracle_moments: Moments,
    pub factorized_moments: Moments,
    /// Largest |⟨x⟩_oracle(q*) − ⟨x⟩_tdse(βq*)| over max |⟨x⟩_tdse|, q* the probed slice.
    pub slice_dipole_error: f64,
    pub probe_q: f64,
}

/// Run the oracle and the factorized pipeline (sweep at every oracle q, spline
/// surface, grid light propagation) on the same problem and compare.
pub fn validate_factorization(cfg: &ValidationConfig) -> Result<ValidationCase> {
    let (omega_l, _) = field::to_atomic_units(&cfg.pulse);
    let mode = ModeParams::harmonic(cfg.harmonic, omega_l, cfg.beta);
    let field = field::sample_pulse(&cfg.pulse, cfg.dt)?;
    let ground = model::eigensolve(&cfg.model, &cfg.x_grid, 1)?.remove(0);
    let vacuum = gaussian_state(&cfg.q_grid, 0.0, 0.0, 0.5)?;
    let probe_j = 3 * cfg.q_grid.n_points / 4;
    let run = propagate_full(&OracleSpec {
        model: cfg.model.clone(),
        electron: ground.clone(),
        light: vacuum.clone(),
        field: field.clone(),
        mode,
        probe_q: Some(cfg.q_grid.point(probe_j)),
    })?;
    let reduced = reduce_to_light(&run.state);
    let oracle_moments = reduced.density.to_mixture(1e-12)?.moments();

    let base = ElectronRunSpec {
        model: cfg.model.clone(),
        grid: cfg.x_grid,
        initial: ground,
        field: field.clone(),
        mode,
        beta_q: 0.0,
        absorber_width: 0.0,
        full_force: None,
    };
    let surface = sweep(&base, &QSampling::from_values(cfg.q_grid.points(), 0.0)?, None)?;
    let spline = SurfaceSpline::new(&surface)?;
    let fine = QuadratureGrid::new(cfg.q_grid.min, cfg.q_grid.max, cfg.light_points)?;
    let light = propagate_light_grid(
        &gaussian_state(&fine, 0.0, 0.0, 0.5)?,
        &spline,
        &field,
        &mode,
        &LightPropagation::default(),
    )?;
    let mut phi = LightState::new(
        cfg.q_grid,
        cfg.q_grid
            .points()
            .iter()
            .map(|q| interp::interpolate(&fine, &light.state.amplitudes, *q))
            .collect(),
    )?;
    phi.normalize()?;
    let fidelity = reduced.density.expectation(&phi)?;

    let (probe_q, probe) = run.probe.clone().unwrap_or_default();
    let reference = &surface.traces[probe_j];
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let slice_dipole_error = probe
        .iter()
        .zip(reference)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / scale;

    Ok(ValidationCase {
        beta: cfg.beta,
        fidelity,
        purity: reduced.purity,
        oracle_norm_drift: run.norm_drift,
        light_norm_drift: light.norm_drift,
        oracle_moments,
        factorized_moments: phi.moments(),
        slice_dipole_error,
        probe_q,
    })
}

/// `cfg` at β, β/2, β/4, … (`halvings` + 1 cases).
pub fn validation_suite(cfg: &ValidationConfig, halvings: usize) -> Result<Vec<ValidationCase>> {
    (0..=halvings)
        .map(|k| validate_factorization(&cfg.with_beta(cfg.beta / f64::powi(2.0, k as i32))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::eigensolve;

    fn setup(beta: f64, field: f64) -> OracleSpec {
        let xg = SpatialGrid::symmetric(51.2, 256).unwrap();
        let qg = QuadratureGrid::symmetric(8.0, 32).unwrap();
        let model = PotentialModel::hydrogen();
        let electron = eigensolve(&model, &xg, 1).unwrap().remove(0);
        OracleSpec {
            model,
            electron,
            light: gaussian_state(&qg, 0.0, 0.0, 0.5).unwrap(),
            field: SampledField::constant(field, 0.01, 400),
            mode: ModeParams::new(0.3, beta),
            probe_q: None,
        }
    }

    #[test]
    fn zero_coupling_keeps_a_product() {
        let run = propagate_full(&setup(0.0, 0.01)).unwrap();
        let r = reduce_to_light(&run.state);
        assert!((r.purity - 1.0).abs() < 1e-10, "{}", r.purity);
        assert!((r.density.trace() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn coupling_entangles() {
        let run = propagate_full(&setup(2.0, 0.05)).unwrap();
        assert!(run.norm_drift < 1e-10);
        let r = reduce_to_light(&run.state);
        assert!(r.purity < 1.0 - 1e-8);
        assert!(r.density.hermiticity_error() < 1e-10);
    }

    #[test]
    fn two_term_schmidt_purity() {
        let xg = SpatialGrid::symmetric(51.2, 256).unwrap();
        let qg = QuadratureGrid::symmetric(12.0, 64).unwrap();
        let states = eigensolve(&PotentialModel::hydrogen(), &xg, 2).unwrap();
        let a = BipartiteState::product(&states[0], &gaussian_state(&qg, -2.0, 0.0, 0.5).unwrap());
        let b = BipartiteState::product(&states[1], &gaussian_state(&qg, 2.0, 0.0, 0.5).unwrap());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mix = BipartiteState {
            amplitudes: a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| (x + y) * s).collect(),
            ..a
        };
        let r = reduce_to_light(&mix);
        // orthogonal electron factors: purity = (1 + |⟨A|B⟩|²)/2 with ⟨A|B⟩ = e^{-4} for the two light Gaussians
        let expected = 0.5 * (1.0 + (-8.0f64).exp());
        assert!((r.purity - expected).abs() < 1e-8, "{}", r.purity);
    }

    #[test]
    fn oversized_grid_is_refused() {
        let mut spec = setup(0.1, 0.0);
        spec.light = gaussian_state(&QuadratureGrid::symmetric(8.0, 1024).unwrap(), 0.0, 0.0, 0.5).unwrap();
        assert!(matches!(propagate_full(&spec), Err(Error::Resource(_))));
    }

    #[test]
    fn tiny_coupling_matches_factorized() {
        let mut cfg = ValidationConfig::small(0.01).unwrap();
        cfg.pulse.n_cycles = 1.0;
        cfg.x_grid = SpatialGrid::symmetric(51.2, 128).unwrap();
        cfg.q_grid = QuadratureGrid::symmetric(8.0, 32).unwrap();
        cfg.dt = 0.05;
        cfg.light_points = 256;
        let case = validate_factorization(&cfg).unwrap();
        assert!(case.fidelity > 1.0 - 1e-6, "{case:?}");
        assert!(case.purity > 1.0 - 1e-6);
    }
}
