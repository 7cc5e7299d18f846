//! Split-operator propagation of the driven electron at a fixed value of the
//! light-mode coordinate, and the dipole traces it produces.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SampledField;
use crate::grid::{self, FftPair, SpatialGrid};
use crate::light::LightState;
use crate::model::{self, ElectronicState, PotentialModel};
use crate::units::{C_AU, ELECTRON_CHARGE};

/// Quantized mode the electron couples to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeParams {
    /// Mode angular frequency Ω (a.u.).
    pub omega: f64,
    /// Coupling constant β (a.u.).
    pub beta: f64,
    /// Set when Ω was given as a multiple of the laser frequency.
    pub harmonic_order: Option<u32>,
    #[serde(default = "default_c")]
    pub c: f64,
}

fn default_c() -> f64 {
    C_AU
}

impl ModeParams {
    pub fn new(omega: f64, beta: f64) -> Self {
        Self {
            omega,
            beta,
            harmonic_order: None,
            c: C_AU,
        }
    }

    /// Mode at `order` times the laser frequency `omega_l`.
    pub fn harmonic(order: u32, omega_l: f64, beta: f64) -> Self {
        Self {
            omega: order as f64 * omega_l,
            beta,
            harmonic_order: Some(order),
            c: C_AU,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !(self.beta >= 0.0) || !(self.c > 0.0) {
            return Err(Error::Parameter(format!(
                "mode needs Ω > 0 and β ≥ 0 (Ω = {}, β = {})",
                self.omega, self.beta
            )));
        }
        Ok(())
    }

    /// βΩ/c, the common prefactor of both parts of the mode force operator.
    pub fn coupling(&self) -> f64 {
        self.beta * self.omega / self.c
    }
}

/// Local force exerted by the mode on an electron parameterized by `beta_q`:
/// (Ω/c)·βq·sin(Ωt).
pub fn effective_force(mode: &ModeParams, beta_q: f64, t: f64) -> f64 {
    mode.omega / mode.c * beta_q * (mode.omega * t).sin()
}

/// One electron propagation at a fixed βq.
#[derive(Debug, Clone, Serialize)]
pub struct ElectronRunSpec {
    pub model: PotentialModel,
    pub grid: SpatialGrid,
    pub initial: ElectronicState,
    pub field: SampledField,
    pub mode: ModeParams,
    pub beta_q: f64,
    /// Width of the cos^(1/8) absorbing mask at each edge; 0 disables it.
    pub absorber_width: f64,
    /// Light state whose log-derivative supplies the nonlocal force term. `None`
    /// keeps the local approximation.
    pub full_force: Option<LightState>,
}

/// ⟨x⟩(t) and the norm, sampled on every step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DipoleTrace {
    pub dt: f64,
    pub values: Vec<f64>,
    pub norm_trace: Vec<f64>,
    pub beta_q: f64,
}

impl DipoleTrace {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |n| n as f64 * self.dt)
    }

    pub fn duration(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.dt
    }
}

/// Strang-split propagator `e^{-iV dt/2} e^{-iT dt} e^{-iV dt/2}` with the
/// dipole coupling `e·x·F(t)` folded into the potential halves.
///
/// A negative `dt` gives the exact inverse of the forward step; an imaginary
/// step (`new_imaginary`) relaxes towards the ground state.
#[derive(Debug, Clone)]
pub struct SplitOperator {
    grid: SpatialGrid,
    x: Vec<f64>,
    dt: f64,
    kinetic: Vec<C64>,
    potential_half: Vec<C64>,
    mask: Option<Vec<f64>>,
    imaginary: bool,
    fft: FftPair,
    phase: Vec<C64>,
}

impl SplitOperator {
    pub fn new(grid: &SpatialGrid, potential: &[f64], dt: f64) -> Self {
        let k = grid.wavenumbers();
        Self {
            grid: *grid,
            x: grid.points(),
            dt,
            kinetic: k
                .iter()
                .map(|k| C64::from_polar(1.0, -0.5 * k * k * dt))
                .collect(),
            potential_half: potential
                .iter()
                .map(|v| C64::from_polar(1.0, -0.5 * v * dt))
                .collect(),
            mask: None,
            imaginary: false,
            fft: FftPair::new(grid.n_points),
            phase: vec![C64::new(0.0, 0.0); grid.n_points],
        }
    }

    /// Imaginary-time step of length `dtau`; coupling forces are ignored.
    pub fn new_imaginary(grid: &SpatialGrid, potential: &[f64], dtau: f64) -> Self {
        let k = grid.wavenumbers();
        let vmin = potential.iter().cloned().fold(f64::INFINITY, f64::min);
        Self {
            grid: *grid,
            x: grid.points(),
            dt: dtau,
            kinetic: k.iter().map(|k| C64::from((-0.5 * k * k * dtau).exp())).collect(),
            potential_half: potential
                .iter()
                .map(|v| C64::from((-0.5 * (v - vmin) * dtau).exp()))
                .collect(),
            mask: None,
            imaginary: true,
            fft: FftPair::new(grid.n_points),
            phase: vec![C64::new(0.0, 0.0); grid.n_points],
        }
    }

    /// Install a cos^(1/8) absorbing mask of `width` at both edges.
    pub fn with_absorber(mut self, width: f64) -> Self {
        if width > 0.0 {
            let (lo, hi) = (self.grid.min, self.grid.max);
            self.mask = Some(
                self.x
                    .iter()
                    .map(|&x| {
                        let d = (x - lo).min(hi - x);
                        if d >= width {
                            1.0
                        } else {
                            (0.5 * PI * (width - d) / width).cos().abs().powf(0.125)
                        }
                    })
                    .collect(),
            );
        }
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn apply_potential_half(&mut self, psi: &mut [C64], force: f64) {
        if force == 0.0 || self.imaginary {
            for (p, v) in psi.iter_mut().zip(&self.potential_half) {
                *p *= v;
            }
        } else {
            let c = ELECTRON_CHARGE * force * 0.5 * self.dt;
            grid::linear_phase(&mut self.phase, c, self.grid.min, self.grid.spacing());
            for ((p, v), w) in psi.iter_mut().zip(&self.potential_half).zip(&self.phase) {
                *p *= v * w;
            }
        }
    }

    /// Advance `psi` by one step, the total force being `force_start` at the
    /// beginning and `force_end` at the end of the step.
    pub fn step(&mut self, psi: &mut [C64], force_start: f64, force_end: f64) {
        self.apply_potential_half(psi, force_start);
        self.fft.forward(psi);
        for (p, k) in psi.iter_mut().zip(&self.kinetic) {
            *p *= k;
        }
        self.fft.inverse(psi);
        self.apply_potential_half(psi, force_end);
        if let Some(mask) = &self.mask {
            for (p, m) in psi.iter_mut().zip(mask) {
                *p *= m;
            }
        }
    }

    pub fn dipole(&self, psi: &[C64]) -> f64 {
        psi.iter()
            .zip(&self.x)
            .map(|(p, x)| x * p.norm_sqr())
            .sum::<f64>()
            * self.grid.spacing()
    }
}

/// Total force sequence `F_class(t_n) + F_mode(βq, t_n)` seen by the electron.
pub fn force_series(spec: &ElectronRunSpec) -> Vec<f64> {
    let dt = spec.field.dt;
    let nonlocal = spec.full_force.as_ref().map(|phi| phi.log_derivative_imag_at(spec.beta_q / spec.mode.beta.max(1e-300)));
    spec.field
        .values
        .iter()
        .enumerate()
        .map(|(n, &f)| {
            let t = n as f64 * dt;
            let local = effective_force(&spec.mode, spec.beta_q, t);
            let extra = match nonlocal {
                // Hermitian part of φ⁻¹ (iβΩ/c cos Ωt ∂_q) φ
                Some(im) => -spec.mode.coupling() * (spec.mode.omega * t).cos() * im,
                None => 0.0,
            };
            f + local + extra
        })
        .collect()
}

fn check_spec(spec: &ElectronRunSpec) -> Result<()> {
    spec.mode.validate()?;
    let g = &spec.grid;
    if !spec.initial.grid.same_as(g) {
        return Err(Error::Shape("initial state grid differs from run grid".into()));
    }
    if spec.absorber_width < 0.0 || spec.absorber_width >= (g.max - g.min) / 4.0 {
        return Err(Error::Parameter(format!(
            "absorber width {} must be below a quarter of the box",
            spec.absorber_width
        )));
    }
    let norm = grid::norm_sqr(&spec.initial.amplitudes, g.spacing());
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Parameter(format!("initial state norm {norm}")));
    }
    let dt = spec.field.dt;
    let pmax = g.k_max();
    if dt * pmax * pmax / 2.0 >= 0.5 {
        return Err(Error::Resolution(format!(
            "dt·p_max²/2 = {:.3} must stay below 0.5 (dt = {dt}, dx = {})",
            dt * pmax * pmax / 2.0,
            g.spacing()
        )));
    }
    let v = model::build_potential(&spec.model, g)?;
    let fmax = spec.field.peak() + spec.mode.coupling() * spec.beta_q.abs() / spec.mode.beta.max(1e-300);
    let xmax = g.min.abs().max(g.max.abs());
    let vmax = v.iter().fold(0.0f64, |m, v| m.max(v.abs())) + xmax * fmax;
    if dt * vmax >= 0.5 {
        return Err(Error::Resolution(format!(
            "dt·max|V| = {:.3} must stay below 0.5",
            dt * vmax
        )));
    }
    Ok(())
}

/// Propagate the driven electron for one βq and record ⟨x⟩(t).
pub fn propagate_electron(spec: &ElectronRunSpec) -> Result<DipoleTrace> {
    check_spec(spec)?;
    let v = model::build_potential(&spec.model, &spec.grid)?;
    let dx = spec.grid.spacing();
    let mut prop = SplitOperator::new(&spec.grid, &v, spec.field.dt).with_absorber(spec.absorber_width);
    let forces = force_series(spec);
    let mut psi = spec.initial.amplitudes.clone();
    let steps = spec.field.steps();
    let mut values = Vec::with_capacity(steps + 1);
    let mut norm_trace = Vec::with_capacity(steps + 1);
    values.push(prop.dipole(&psi));
    norm_trace.push(grid::norm_sqr(&psi, dx));
    for n in 0..steps {
        prop.step(&mut psi, forces[n], forces[n + 1]);
        let norm = grid::norm_sqr(&psi, dx);
        if !norm.is_finite() {
            return Err(Error::NotFinite { step: n + 1 });
        }
        if norm < 0.5 {
            return Err(Error::NormLoss { step: n + 1, norm });
        }
        values.push(prop.dipole(&psi));
        norm_trace.push(norm);
    }
    Ok(DipoleTrace {
        dt: spec.field.dt,
        values,
        norm_trace,
        beta_q: spec.beta_q,
    })
}

/// Propagate and return the final wavefunction together with the trace.
pub fn propagate_electron_state(spec: &ElectronRunSpec) -> Result<(Vec<C64>, DipoleTrace)> {
    check_spec(spec)?;
    let v = model::build_potential(&spec.model, &spec.grid)?;
    let dx = spec.grid.spacing();
    let mut prop = SplitOperator::new(&spec.grid, &v, spec.field.dt).with_absorber(spec.absorber_width);
    let forces = force_series(spec);
    let mut psi = spec.initial.amplitudes.clone();
    let mut values = vec![prop.dipole(&psi)];
    let mut norm_trace = vec![grid::norm_sqr(&psi, dx)];
    for n in 0..spec.field.steps() {
        prop.step(&mut psi, forces[n], forces[n + 1]);
        values.push(prop.dipole(&psi));
        norm_trace.push(grid::norm_sqr(&psi, dx));
    }
    Ok((
        psi,
        DipoleTrace {
            dt: spec.field.dt,
            values,
            norm_trace,
            beta_q: spec.beta_q,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    #[default]
    Flat,
    Hann,
}

/// One spectral sample: frequency in units of the laser frequency and the
/// windowed Fourier amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub order: f64,
    pub amplitude: C64,
}

/// Windowed DFT of ⟨x⟩(t) on the non-negative frequencies, axis in harmonic orders
/// of `omega_l`. The closing sample is dropped so that a trace spanning whole
/// periods is treated as exactly periodic.
pub fn dipole_spectrum(trace: &DipoleTrace, window: Window, omega_l: f64) -> Result<Vec<SpectrumPoint>> {
    let n = trace.values.len() - 1;
    let period = 2.0 * PI / omega_l;
    if (n as f64) * trace.dt < 2.0 * period - 1e-9 {
        return Err(Error::Parameter(format!(
            "trace spans {:.1} a.u., shorter than two laser cycles ({:.1} a.u.)",
            n as f64 * trace.dt,
            2.0 * period
        )));
    }
    let mut buf: Vec<C64> = trace.values[..n]
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let w = match window {
                Window::Flat => 1.0,
                Window::Hann => (PI * j as f64 / n as f64).sin().powi(2),
            };
            C64::from(v * w)
        })
        .collect();
    let mut fft = FftPair::new(n);
    fft.forward(&mut buf);
    let df = 2.0 * PI / (n as f64 * trace.dt);
    Ok(buf
        .iter()
        .take(n / 2 + 1)
        .enumerate()
        .map(|(m, z)| SpectrumPoint {
            order: m as f64 * df / omega_l,
            amplitude: z * (2.0 / n as f64),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PotentialKind, PotentialModel};

    #[test]
    fn effective_force_values() {
        let mode = ModeParams::new(0.266, 0.41);
        assert_eq!(effective_force(&mode, 0.0, 12.3), 0.0);
        for k in 0..5 {
            let t = PI / mode.omega * k as f64;
            assert!(effective_force(&mode, 0.41, t).abs() < 1e-15);
        }
        let v = effective_force(&mode, 0.41, PI / (2.0 * mode.omega));
        assert!((v - 0.266 / 137.035999 * 0.41).abs() < 1e-15);
        assert!((v - 7.96e-4).abs() < 1e-6);
    }

    #[test]
    fn cosine_gives_single_peak() {
        let omega_l = 0.057;
        let n = 4096;
        let dt = 8.0 * 2.0 * PI / omega_l / n as f64;
        let values: Vec<f64> = (0..=n).map(|j| (3.0 * omega_l * j as f64 * dt).cos()).collect();
        let trace = DipoleTrace {
            dt,
            values,
            norm_trace: vec![1.0; n + 1],
            beta_q: 0.0,
        };
        let s = dipole_spectrum(&trace, Window::Flat, omega_l).unwrap();
        let peak = s
            .iter()
            .max_by(|a, b| a.amplitude.norm().partial_cmp(&b.amplitude.norm()).unwrap())
            .unwrap();
        assert!((peak.order - 3.0).abs() < 1e-9);
        assert!((peak.amplitude.norm() - 1.0).abs() < 1e-9);
        for p in &s {
            if (p.order - 3.0).abs() > 1e-6 {
                assert!(p.amplitude.norm() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_trace_zero_spectrum() {
        let trace = DipoleTrace {
            dt: 1.0,
            values: vec![0.0; 1001],
            norm_trace: vec![1.0; 1001],
            beta_q: 0.0,
        };
        let s = dipole_spectrum(&trace, Window::Hann, 0.1).unwrap();
        assert!(s.iter().all(|p| p.amplitude.norm() == 0.0));
    }

    #[test]
    fn absorber_width_is_bounded() {
        let grid = SpatialGrid::symmetric(20.0, 128).unwrap();
        let model = PotentialModel::harmonic(1.0);
        let initial = model::eigensolve(&model, &grid, 1).unwrap().remove(0);
        let spec = ElectronRunSpec {
            model,
            grid,
            initial,
            field: SampledField::zero(0.01, 10),
            mode: ModeParams::new(1.0, 0.0),
            beta_q: 0.0,
            absorber_width: 10.0,
            full_force: None,
        };
        assert!(matches!(propagate_electron(&spec), Err(Error::Parameter(_))));
        let _ = PotentialKind::SoftCoreAtom;
    }
}
