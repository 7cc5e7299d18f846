//! Light-mode wavefunctions in the quadrature representation and the input
//! states the mode can start from.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, FftPair, QuadratureGrid};
use crate::interp;

/// φ(q) sampled on a quadrature grid (vacuum variance 1/2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightState {
    pub grid: QuadratureGrid,
    pub amplitudes: Vec<C64>,
}

/// First and second moments of both quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean_q: f64,
    pub mean_p: f64,
    pub var_q: f64,
    pub var_p: f64,
    /// Symmetrized covariance ½⟨qp + pq⟩ − ⟨q⟩⟨p⟩.
    pub cov: f64,
}

impl Moments {
    /// Variance of `q cos θ + p sin θ`.
    pub fn rotated_variance(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        c * c * self.var_q + s * s * self.var_p + 2.0 * s * c * self.cov
    }

    /// Smallest rotated-quadrature variance over all angles.
    pub fn min_rotated_variance(&self) -> f64 {
        let mid = 0.5 * (self.var_q + self.var_p);
        let half = 0.5 * (self.var_q - self.var_p);
        mid - (half * half + self.cov * self.cov).sqrt()
    }

    /// ⟨a†a⟩ = (⟨q²⟩ + ⟨p²⟩ − 1)/2.
    pub fn mean_photons(&self) -> f64 {
        0.5 * (self.var_q + self.mean_q * self.mean_q + self.var_p + self.mean_p * self.mean_p - 1.0)
    }
}

impl LightState {
    pub fn new(grid: QuadratureGrid, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != grid.n_points {
            return Err(Error::Shape(format!(
                "{} amplitudes on a {}-point grid",
                amplitudes.len(),
                grid.n_points
            )));
        }
        Ok(Self { grid, amplitudes })
    }

    pub fn norm_sqr(&self) -> f64 {
        grid::norm_sqr(&self.amplitudes, self.grid.spacing())
    }

    /// Normalize in place and return the factor applied.
    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm_sqr().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Parameter("light state has zero or non-finite norm".into()));
        }
        self.amplitudes.iter_mut().for_each(|a| *a /= n);
        Ok(1.0 / n)
    }

    pub fn overlap(&self, other: &Self) -> Result<C64> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::Shape("light states live on different grids".into()));
        }
        Ok(grid::inner(&self.amplitudes, &other.amplitudes, self.grid.spacing()))
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// dφ/dq by FFT.
    pub fn derivative(&self) -> Vec<C64> {
        let mut fft = FftPair::new(self.grid.n_points);
        grid::spectral_derivative(&self.grid, &self.amplitudes, &mut fft)
    }

    pub fn moments(&self) -> Moments {
        let dq = self.grid.spacing();
        let qs = self.grid.points();
        let d = self.derivative();
        let norm = self.norm_sqr();
        let mut mq = 0.0;
        let mut mq2 = 0.0;
        let mut mp = 0.0;
        let mut mp2 = 0.0;
        let mut qp = 0.0;
        for ((a, da), &q) in self.amplitudes.iter().zip(&d).zip(&qs) {
            let rho = a.norm_sqr();
            mq += q * rho;
            mq2 += q * q * rho;
            // φ* (−i φ')
            let pa = (a.conj() * da * C64::new(0.0, -1.0)).re;
            mp += pa;
            mp2 += da.norm_sqr();
            qp += q * pa;
        }
        let s = dq / norm;
        let (mq, mq2, mp, mp2, qp) = (mq * s, mq2 * s, mp * s, mp2 * s, qp * s);
        Moments {
            mean_q: mq,
            mean_p: mp,
            var_q: mq2 - mq * mq,
            var_p: mp2 - mp * mp,
            // Re⟨q p⟩ equals ½⟨qp + pq⟩
            cov: qp - mq * mp,
        }
    }

    /// Im(φ'/φ) at `q`: the local momentum entering the nonlocal force.
    pub fn log_derivative_imag_at(&self, q: f64) -> f64 {
        let d = self.derivative();
        let phi = interp::interpolate(&self.grid, &self.amplitudes, q);
        let dphi = interp::interpolate(&self.grid, &d, q);
        if phi.norm() < 1e-12 {
            return 0.0;
        }
        (dphi / phi).im
    }

    /// Largest amplitude on the first and last grid points.
    pub fn edge_amplitude(&self) -> f64 {
        self.amplitudes[0]
            .norm()
            .max(self.amplitudes[self.grid.n_points - 1].norm())
    }
}

/// Normalized Hermite functions ψ_0..ψ_nmax at `q` (vacuum variance 1/2).
pub fn hermite_functions(q: f64, nmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    out[0] = PI.powf(-0.25) * (-0.5 * q * q).exp();
    if nmax >= 1 {
        out[1] = 2f64.sqrt() * q * out[0];
    }
    for n in 1..nmax {
        out[n + 1] = (2.0 / (n + 1) as f64).sqrt() * q * out[n] - (n as f64 / (n + 1) as f64).sqrt() * out[n - 1];
    }
    out
}

/// How Fock weights are turned into a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FockWeighting {
    /// Weights are populations of an incoherent mixture.
    #[default]
    Incoherent,
    /// Weights are populations of a pure superposition, amplitudes √w_n.
    Coherent,
    /// Weights are the superposition amplitudes themselves.
    Amplitude,
}

/// Initial light-mode state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LightInput {
    Vacuum,
    Coherent {
        q0: f64,
        #[serde(default)]
        p0: f64,
    },
    /// Minimum-uncertainty Gaussian with `var_q · var_p = 1/4`.
    Squeezed {
        var_q: f64,
        #[serde(default)]
        q0: f64,
        #[serde(default)]
        p0: f64,
    },
    Fock {
        n: usize,
    },
    FockMixture {
        weights: Vec<f64>,
        #[serde(default)]
        weighting: FockWeighting,
        /// Relative phases of the coherent forms (radians, default 0).
        #[serde(default)]
        phases: Vec<f64>,
    },
}

/// Weighted ensemble of pure light states; a single unit weight is a pure state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedLightState {
    pub weights: Vec<f64>,
    pub states: Vec<LightState>,
}

impl MixedLightState {
    pub fn pure(state: LightState) -> Self {
        Self {
            weights: vec![1.0],
            states: vec![state],
        }
    }

    pub fn is_pure(&self) -> bool {
        self.states.len() == 1
    }

    pub fn grid(&self) -> QuadratureGrid {
        self.states[0].grid
    }

    /// The single component of a pure state.
    pub fn as_pure(&self) -> Option<&LightState> {
        if self.is_pure() {
            self.states.first()
        } else {
            None
        }
    }

    /// Apply `f` to every component, keeping the weights.
    pub fn map<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&LightState) -> Result<LightState> + Sync,
    {
        use rayon::prelude::*;
        let states = self.states.par_iter().map(|s| f(s)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            weights: self.weights.clone(),
            states,
        })
    }

    /// Ensemble-averaged moments.
    pub fn moments(&self) -> Moments {
        let ms: Vec<Moments> = self.states.iter().map(|s| s.moments()).collect();
        let mut mq = 0.0;
        let mut mp = 0.0;
        let mut q2 = 0.0;
        let mut p2 = 0.0;
        let mut qp = 0.0;
        for (w, m) in self.weights.iter().zip(&ms) {
            mq += w * m.mean_q;
            mp += w * m.mean_p;
            q2 += w * (m.var_q + m.mean_q * m.mean_q);
            p2 += w * (m.var_p + m.mean_p * m.mean_p);
            qp += w * (m.cov + m.mean_q * m.mean_p);
        }
        Moments {
            mean_q: mq,
            mean_p: mp,
            var_q: q2 - mq * mq,
            var_p: p2 - mp * mp,
            cov: qp - mq * mp,
        }
    }
}

/// Largest |φ| tolerated on the grid boundary.
pub const SUPPORT_TOL: f64 = 1e-10;

fn from_fn(grid: &QuadratureGrid, f: impl Fn(f64) -> C64) -> Result<LightState> {
    let mut s = LightState {
        grid: *grid,
        amplitudes: grid.points().into_iter().map(f).collect(),
    };
    s.normalize()?;
    if s.edge_amplitude() > SUPPORT_TOL {
        return Err(Error::Support(format!(
            "initial light state reaches {:.2e} at the grid edge [{}, {}]",
            s.edge_amplitude(),
            grid.min,
            grid.max
        )));
    }
    Ok(s)
}

/// Displaced squeezed Gaussian with position variance `var_q`.
pub fn gaussian_state(grid: &QuadratureGrid, q0: f64, p0: f64, var_q: f64) -> Result<LightState> {
    if !(var_q > 0.0) {
        return Err(Error::Parameter(format!("variance {var_q} must be positive")));
    }
    from_fn(grid, |q| C64::from_polar((-(q - q0).powi(2) / (4.0 * var_q)).exp(), p0 * q))
}

pub fn fock_state(grid: &QuadratureGrid, n: usize) -> Result<LightState> {
    from_fn(grid, |q| C64::from(hermite_functions(q, n)[n]))
}

pub fn build_initial_state(input: &LightInput, grid: &QuadratureGrid) -> Result<MixedLightState> {
    match input {
        LightInput::Vacuum => Ok(MixedLightState::pure(gaussian_state(grid, 0.0, 0.0, 0.5)?)),
        LightInput::Coherent { q0, p0 } => Ok(MixedLightState::pure(gaussian_state(grid, *q0, *p0, 0.5)?)),
        LightInput::Squeezed { var_q, q0, p0 } => Ok(MixedLightState::pure(gaussian_state(grid, *q0, *p0, *var_q)?)),
        LightInput::Fock { n } => Ok(MixedLightState::pure(fock_state(grid, *n)?)),
        LightInput::FockMixture {
            weights,
            weighting,
            phases,
        } => {
            if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0)) {
                return Err(Error::Parameter("Fock weights must be nonnegative".into()));
            }
            let total: f64 = weights.iter().sum();
            if !(total > 0.0) {
                return Err(Error::Parameter("Fock weights sum to zero".into()));
            }
            if !phases.is_empty() && phases.len() != weights.len() {
                return Err(Error::Parameter(format!(
                    "{} phases for {} weights",
                    phases.len(),
                    weights.len()
                )));
            }
            match weighting {
                FockWeighting::Incoherent => {
                    let mut ws = Vec::new();
                    let mut states = Vec::new();
                    for (n, &w) in weights.iter().enumerate() {
                        if w > 0.0 {
                            ws.push(w / total);
                            states.push(fock_state(grid, n)?);
                        }
                    }
                    Ok(MixedLightState { weights: ws, states })
                }
                FockWeighting::Coherent | FockWeighting::Amplitude => {
                    let nmax = weights.len() - 1;
                    let amps: Vec<C64> = weights
                        .iter()
                        .enumerate()
                        .map(|(n, &w)| {
                            let mag = if *weighting == FockWeighting::Coherent { w.sqrt() } else { w };
                            C64::from_polar(mag, phases.get(n).copied().unwrap_or(0.0))
                        })
                        .collect();
                    let state = from_fn(grid, |q| {
                        hermite_functions(q, nmax)
                            .iter()
                            .zip(&amps)
                            .map(|(h, c)| c * h)
                            .sum()
                    })?;
                    Ok(MixedLightState::pure(state))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> QuadratureGrid {
        QuadratureGrid::symmetric(10.0, 256).unwrap()
    }

    #[test]
    fn vacuum_and_coherent_moments() {
        let v = build_initial_state(&LightInput::Vacuum, &grid()).unwrap();
        let m = v.moments();
        assert!(m.mean_q.abs() < 1e-12 && m.mean_p.abs() < 1e-12);
        assert!((m.var_q - 0.5).abs() < 1e-8 && (m.var_p - 0.5).abs() < 1e-8);
        assert!(m.mean_photons().abs() < 1e-8);
        let c = build_initial_state(&LightInput::Coherent { q0: 3.0, p0: 0.0 }, &grid()).unwrap();
        let m = c.moments();
        assert!((m.mean_q - 3.0).abs() < 1e-10 && (m.var_q - 0.5).abs() < 1e-8);
    }

    #[test]
    fn fock_mixture_photon_number() {
        let input = LightInput::FockMixture {
            weights: vec![0.883, 0.07, 0.03, 0.017],
            weighting: FockWeighting::Incoherent,
            phases: vec![],
        };
        let s = build_initial_state(&input, &grid()).unwrap();
        assert_eq!(s.states.len(), 4);
        assert!((s.moments().mean_photons() - 0.181).abs() < 1e-8);
        let coherent = LightInput::FockMixture {
            weights: vec![0.883, 0.07, 0.03, 0.017],
            weighting: FockWeighting::Coherent,
            phases: vec![],
        };
        let s = build_initial_state(&coherent, &grid()).unwrap();
        assert!(s.is_pure());
        assert!((s.moments().mean_photons() - 0.181).abs() < 1e-8);
    }

    #[test]
    fn fock_states_are_orthonormal() {
        let g = grid();
        let f: Vec<LightState> = (0..5).map(|n| fock_state(&g, n).unwrap()).collect();
        for i in 0..5 {
            for j in 0..5 {
                let o = f[i].overlap(&f[j]).unwrap().norm();
                assert!((o - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
        assert!((f[1].moments().mean_photons() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let g = QuadratureGrid::symmetric(2.0, 64).unwrap();
        assert!(matches!(
            build_initial_state(&LightInput::Vacuum, &g),
            Err(Error::Support(_))
        ));
    }
}
