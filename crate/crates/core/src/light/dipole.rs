//! Dipole ⟨x⟩(q, t) as seen by the light-mode propagator.

use crate::error::{Error, Result};
use crate::interp::CubicSpline;
use crate::response::{DipoleSurface, FomegaModel, SeriesCoefficients};

/// A dipole sampled on a uniform time grid and defined for q in `support()`.
pub trait DipoleModel: Sync {
    fn dt(&self) -> f64;
    fn n_times(&self) -> usize;
    fn support(&self) -> (f64, f64);
    /// Values and q-derivatives at time sample `n` for every q in `qs`.
    fn sample(&self, n: usize, qs: &[f64], values: &mut [f64], derivs: &mut [f64]);
}

impl DipoleModel for SeriesCoefficients {
    fn dt(&self) -> f64 {
        self.dt
    }

    fn n_times(&self) -> usize {
        SeriesCoefficients::n_times(self)
    }

    fn support(&self) -> (f64, f64) {
        self.support
    }

    fn sample(&self, n: usize, qs: &[f64], values: &mut [f64], derivs: &mut [f64]) {
        for ((q, v), d) in qs.iter().zip(values.iter_mut()).zip(derivs.iter_mut()) {
            let (a, b) = self.eval(*q, n);
            *v = a;
            *d = b;
        }
    }
}

/// Natural cubic spline through the surface rows at each time.
#[derive(Debug, Clone)]
pub struct SurfaceSpline<'a> {
    surface: &'a DipoleSurface,
}

impl<'a> SurfaceSpline<'a> {
    pub fn new(surface: &'a DipoleSurface) -> Result<Self> {
        if surface.q_values.len() < 2 {
            return Err(Error::Parameter("spline needs at least two q samples".into()));
        }
        Ok(Self { surface })
    }
}

impl DipoleModel for SurfaceSpline<'_> {
    fn dt(&self) -> f64 {
        self.surface.dt
    }

    fn n_times(&self) -> usize {
        self.surface.n_times()
    }

    fn support(&self) -> (f64, f64) {
        self.surface.bounds()
    }

    fn sample(&self, n: usize, qs: &[f64], values: &mut [f64], derivs: &mut [f64]) {
        let spline = CubicSpline::new(&self.surface.q_values, &self.surface.column(n));
        for ((q, v), d) in qs.iter().zip(values.iter_mut()).zip(derivs.iter_mut()) {
            let (a, b) = spline.eval(*q);
            *v = a;
            *d = b;
        }
    }
}

/// ⟨x⟩ = f(q) cos(Ωt): only the resonant component of the response.
#[derive(Debug, Clone)]
pub struct ResonantDrive {
    pub f: FomegaModel,
    pub omega: f64,
    pub dt: f64,
    pub steps: usize,
    pub support: (f64, f64),
}

impl DipoleModel for ResonantDrive {
    fn dt(&self) -> f64 {
        self.dt
    }

    fn n_times(&self) -> usize {
        self.steps + 1
    }

    fn support(&self) -> (f64, f64) {
        self.support
    }

    fn sample(&self, n: usize, qs: &[f64], values: &mut [f64], derivs: &mut [f64]) {
        let c = (self.omega * n as f64 * self.dt).cos();
        for ((q, v), d) in qs.iter().zip(values.iter_mut()).zip(derivs.iter_mut()) {
            let (a, b) = self.f.eval_with_derivative(*q);
            *v = a * c;
            *d = b * c;
        }
    }
}
