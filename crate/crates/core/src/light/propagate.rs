//! Direct grid propagation of the light-mode equation
//!
//! i∂φ/∂t = e⟨x⟩(q,t)[F(t) + κ q sin Ωt]φ − eκ cos Ωt ·½{⟨x⟩, p}φ,  κ = βΩ/c,
//!
//! by Strang splitting: a diagonal phase half step, a semi-Lagrangian transport
//! step for the advection part, and a second phase half step.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::dipole::DipoleModel;
use super::state::LightState;
use crate::error::{Error, Result};
use crate::field::{self, SampledField};
use crate::interp;
use crate::tdse::ModeParams;
use crate::units::ELECTRON_CHARGE;

/// How the advection term acts on the amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    /// ½(g∂_q + ∂_q g): φ(X)·√(∂X/∂q), norm preserving.
    #[default]
    Symmetric,
    /// g∂_q alone: φ(X), renormalized once at the end.
    Transport,
}

/// Which parts of the light Hamiltonian are switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LightTerms {
    /// Multiplicative part e⟨x⟩[F + κ q sin Ωt].
    pub potential: bool,
    /// Nonlocal part proportional to cos Ωt ∂_q.
    pub advection: bool,
}

impl Default for LightTerms {
    fn default() -> Self {
        Self {
            potential: true,
            advection: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct LightPropagation {
    #[serde(default)]
    pub ordering: Ordering,
    #[serde(default)]
    pub terms: LightTerms,
    /// Light step in units of the dipole sampling step; chosen from Ω when unset.
    #[serde(default)]
    pub stride: Option<usize>,
    /// Keep a snapshot every this many light steps.
    #[serde(default)]
    pub record_every: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct LightRun {
    pub state: LightState,
    /// |‖φ‖² − 1| before the final renormalization.
    pub norm_drift: f64,
    /// Factor applied by the final renormalization.
    pub renormalization: f64,
    pub steps: usize,
    pub light_dt: f64,
    pub history: Vec<(f64, LightState)>,
}

/// Drift beyond which the symmetric scheme is declared broken.
pub const MAX_NORM_DRIFT: f64 = 1e-3;

fn auto_stride(dt: f64, omega: f64) -> usize {
    ((2.0 * PI / (200.0 * omega * dt)).floor() as usize).max(1)
}

struct Sampler<'a> {
    dipole: &'a dyn DipoleModel,
    lo: f64,
    hi: f64,
    scratch_v: Vec<f64>,
    scratch_d: Vec<f64>,
    clamped: Vec<f64>,
}

impl<'a> Sampler<'a> {
    /// ⟨x⟩ and ∂_q⟨x⟩ at half-sample index `h` (time h·dt/2).
    fn at_half(&mut self, h: usize, qs: &[f64], v: &mut [f64], d: &mut [f64]) {
        self.clamped.clear();
        self.clamped
            .extend(qs.iter().map(|q| q.clamp(self.lo, self.hi)));
        if h % 2 == 0 {
            self.dipole.sample(h / 2, &self.clamped, v, d);
        } else {
            let n = h / 2;
            self.dipole.sample(n, &self.clamped, v, d);
            let len = qs.len();
            self.scratch_v.resize(len, 0.0);
            self.scratch_d.resize(len, 0.0);
            self.dipole
                .sample(n + 1, &self.clamped, &mut self.scratch_v, &mut self.scratch_d);
            for i in 0..len {
                v[i] = 0.5 * (v[i] + self.scratch_v[i]);
                d[i] = 0.5 * (d[i] + self.scratch_d[i]);
            }
        }
    }
}

fn recombine(chi: &[C64], theta: &[f64]) -> Vec<C64> {
    chi.iter().zip(theta).map(|(c, t)| c * C64::from_polar(1.0, *t)).collect()
}

fn field_at_half(field: &SampledField, h: usize) -> f64 {
    if h % 2 == 0 {
        field.values[h / 2]
    } else {
        0.5 * (field.values[h / 2] + field.values[h / 2 + 1])
    }
}

/// Check that the light grid lies inside the dipole support.
pub fn check_support(state: &LightState, dipole: &dyn DipoleModel) -> Result<()> {
    let (lo, hi) = dipole.support();
    let tol = 1e-9 * (hi - lo).abs().max(1.0);
    let g = state.grid;
    if g.min < lo - tol {
        return Err(Error::Extrapolation { q: g.min, lo, hi });
    }
    if g.max > hi + tol {
        return Err(Error::Extrapolation { q: g.max, lo, hi });
    }
    Ok(())
}

pub fn propagate_light_grid(
    state: &LightState,
    dipole: &dyn DipoleModel,
    field: &SampledField,
    mode: &ModeParams,
    opts: &LightPropagation,
) -> Result<LightRun> {
    mode.validate()?;
    let dt = dipole.dt();
    if (field.dt - dt).abs() > 1e-9 * dt || field.values.len() != dipole.n_times() {
        return Err(Error::Shape(format!(
            "field ({} samples, dt {}) and dipole ({} samples, dt {}) differ",
            field.values.len(),
            field.dt,
            dipole.n_times(),
            dt
        )));
    }
    check_support(state, dipole)?;
    let stride = opts.stride.unwrap_or_else(|| auto_stride(dt, mode.omega)).max(1);
    let light_dt = stride as f64 * dt;
    field::check_resolution(light_dt, mode.omega)?;

    let grid = state.grid;
    let qs = grid.points();
    let n = qs.len();
    let kappa = mode.coupling();
    let e = ELECTRON_CHARGE;
    let (lo, hi) = dipole.support();
    let mut sampler = Sampler {
        dipole,
        lo,
        hi,
        scratch_v: Vec::new(),
        scratch_d: Vec::new(),
        clamped: Vec::with_capacity(n),
    };

    // φ = χ·e^{iθ}: the potential only ever adds to θ, so χ stays as smooth as
    // φ₀ and θ as smooth as ⟨x⟩(q); both survive repeated interpolation even
    // when φ itself oscillates rapidly.
    let mut phi = state.amplitudes.clone();
    let mut theta = vec![0.0; n];
    let mut next = vec![C64::new(0.0, 0.0); n];
    let mut next_theta = vec![0.0; n];
    let mut x_now = vec![0.0; n];
    let mut d_now = vec![0.0; n];
    let mut x_mid = vec![0.0; n];
    let mut d_mid = vec![0.0; n];
    let mut x_end = vec![0.0; n];
    let mut d_end = vec![0.0; n];
    // RK stage buffers
    let mut xq = vec![0.0; n];
    let mut jq = vec![0.0; n];
    let mut probe = vec![0.0; n];
    let mut gv = vec![0.0; n];
    let mut gd = vec![0.0; n];
    let mut kx = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut kj = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];

    let potential = |x: &[f64], f: f64, t: f64, out: &mut Vec<f64>| {
        let s = kappa * (mode.omega * t).sin();
        out.clear();
        out.extend(x.iter().zip(&qs).map(|(x, q)| e * x * (f + s * q)));
    };
    let mut v0 = Vec::with_capacity(n);
    let mut vm = Vec::with_capacity(n);
    let mut v1 = Vec::with_capacity(n);

    let last = dipole.n_times() - 1;
    sampler.at_half(0, &qs, &mut x_now, &mut d_now);
    let mut history = Vec::new();
    let mut steps = 0;
    let mut i0 = 0;
    while i0 < last {
        let i1 = (i0 + stride).min(last);
        let dl = (i1 - i0) as f64 * dt;
        let (t0, t1) = (i0 as f64 * dt, i1 as f64 * dt);
        let tm = 0.5 * (t0 + t1);
        let hm = i0 + i1;
        sampler.at_half(hm, &qs, &mut x_mid, &mut d_mid);
        sampler.at_half(2 * i1, &qs, &mut x_end, &mut d_end);

        if opts.terms.potential {
            potential(&x_now, field.values[i0], t0, &mut v0);
            potential(&x_mid, field_at_half(field, hm), tm, &mut vm);
            potential(&x_end, field.values[i1], t1, &mut v1);
            for (th, (a, b)) in theta.iter_mut().zip(v0.iter().zip(&vm)) {
                *th -= 0.25 * dl * (a + b);
            }
        }

        if opts.terms.advection {
            // Backward characteristics: dX/dτ = G(X, t1 − τ), X(0) = q.
            let c_end = e * kappa * (mode.omega * t1).cos();
            let c_mid = e * kappa * (mode.omega * tm).cos();
            let c_start = e * kappa * (mode.omega * t0).cos();
            for i in 0..n {
                kx[0][i] = c_end * x_end[i];
                kj[0][i] = c_end * d_end[i];
            }
            for stage in 1..4 {
                let (h, coef, half) = match stage {
                    1 => (0.5 * dl, c_mid, hm),
                    2 => (0.5 * dl, c_mid, hm),
                    _ => (dl, c_start, 2 * i0),
                };
                for i in 0..n {
                    xq[i] = qs[i] + h * kx[stage - 1][i];
                    jq[i] = 1.0 + h * kj[stage - 1][i];
                }
                if stage == 3 && coef == 0.0 {
                    kx[3].iter_mut().for_each(|v| *v = 0.0);
                    kj[3].iter_mut().for_each(|v| *v = 0.0);
                    continue;
                }
                probe.copy_from_slice(&xq);
                sampler.at_half(half, &probe, &mut gv, &mut gd);
                for i in 0..n {
                    kx[stage][i] = coef * gv[i];
                    kj[stage][i] = coef * gd[i] * jq[i];
                }
            }
            for i in 0..n {
                let foot = qs[i] + dl / 6.0 * (kx[0][i] + 2.0 * kx[1][i] + 2.0 * kx[2][i] + kx[3][i]);
                let jac = 1.0 + dl / 6.0 * (kj[0][i] + 2.0 * kj[1][i] + 2.0 * kj[2][i] + kj[3][i]);
                let (value, th) = match interp::stencil(&grid, foot) {
                    Some(st) => (st.apply(&phi), st.apply_real(&theta)),
                    None => (C64::new(0.0, 0.0), 0.0),
                };
                next[i] = match opts.ordering {
                    Ordering::Symmetric => value * jac.max(0.0).sqrt(),
                    Ordering::Transport => value,
                };
                next_theta[i] = th;
            }
            std::mem::swap(&mut phi, &mut next);
            std::mem::swap(&mut theta, &mut next_theta);
        }

        if opts.terms.potential {
            for (th, (a, b)) in theta.iter_mut().zip(vm.iter().zip(&v1)) {
                *th -= 0.25 * dl * (a + b);
            }
        }

        std::mem::swap(&mut x_now, &mut x_end);
        std::mem::swap(&mut d_now, &mut d_end);
        i0 = i1;
        steps += 1;
        if phi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NotFinite { step: steps });
        }
        if let Some(k) = opts.record_every {
            if k > 0 && steps % k == 0 {
                history.push((t1, LightState::new(grid, recombine(&phi, &theta))?));
            }
        }
    }

    let mut out = LightState::new(grid, recombine(&phi, &theta))?;
    let norm = out.norm_sqr();
    let norm_drift = (norm - 1.0).abs();
    if opts.ordering == Ordering::Symmetric && opts.terms.advection && norm_drift > MAX_NORM_DRIFT {
        return Err(Error::NormDrift { drift: norm_drift });
    }
    let renormalization = out.normalize()?;
    Ok(LightRun {
        state: out,
        norm_drift,
        renormalization,
        steps,
        light_dt,
        history,
    })
}

/// Coherent displacement produced by a q-independent dipole x(t):
/// returns (⟨q⟩, ⟨p⟩) of the output when the input is centered at the origin.
pub fn coherent_displacement(x: &[f64], dt: f64, mode: &ModeParams) -> (f64, f64) {
    let kappa = mode.coupling();
    let e = ELECTRON_CHARGE;
    let n = x.len() - 1;
    let mut a = 0.0;
    let mut p = 0.0;
    for (j, &v) in x.iter().enumerate() {
        let w = if j == 0 || j == n { 0.5 } else { 1.0 };
        let (s, c) = (mode.omega * j as f64 * dt).sin_cos();
        a += w * v * c;
        p += w * v * s;
    }
    (-e * kappa * a * dt, -e * kappa * p * dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::QuadratureGrid;
    use crate::light::dipole::ResonantDrive;
    use crate::light::state::gaussian_state;
    use crate::response::FomegaModel;
    use crate::poly::Polynomial;

    fn drive(coeffs: Vec<f64>, omega: f64, dt: f64, steps: usize) -> ResonantDrive {
        ResonantDrive {
            f: FomegaModel::Polynomial(Polynomial::new(coeffs)),
            omega,
            dt,
            steps,
            support: (-12.0, 12.0),
        }
    }

    #[test]
    fn zero_dipole_is_identity() {
        let g = QuadratureGrid::symmetric(10.0, 256).unwrap();
        let s = gaussian_state(&g, 0.3, 0.2, 0.5).unwrap();
        let mode = ModeParams::new(0.3, 0.5);
        let d = drive(vec![0.0], mode.omega, 0.05, 2000);
        let f = SampledField::constant(0.02, 0.05, 2000);
        let run = propagate_light_grid(&s, &d, &f, &mode, &LightPropagation::default()).unwrap();
        let diff: f64 = run
            .state
            .amplitudes
            .iter()
            .zip(&s.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn support_is_enforced() {
        let g = QuadratureGrid::symmetric(14.0, 256).unwrap();
        let s = gaussian_state(&g, 0.0, 0.0, 0.5).unwrap();
        let mode = ModeParams::new(0.3, 0.5);
        let d = drive(vec![1.0], mode.omega, 0.05, 100);
        let f = SampledField::zero(0.05, 100);
        assert!(matches!(
            propagate_light_grid(&s, &d, &f, &mode, &LightPropagation::default()),
            Err(Error::Extrapolation { .. })
        ));
    }
}
