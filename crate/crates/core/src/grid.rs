//! Uniform grids and the FFT plumbing shared by every propagator.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `min, min + d, …, max` with a power-of-two point count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub min: f64,
    pub max: f64,
    pub n_points: usize,
}

/// Electron coordinate grid (a.u.).
pub type SpatialGrid = UniformGrid;
/// Light-mode quadrature grid.
pub type QuadratureGrid = UniformGrid;

impl UniformGrid {
    pub fn new(min: f64, max: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 || !n_points.is_power_of_two() {
            return Err(Error::Parameter(format!(
                "grid size {n_points} must be a power of two >= 2"
            )));
        }
        if !(max > min) || !min.is_finite() || !max.is_finite() {
            return Err(Error::Parameter(format!("grid bounds [{min}, {max}] are empty")));
        }
        Ok(Self { min, max, n_points })
    }

    /// Symmetric grid `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, n_points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n_points)
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.n_points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points;
        let dk = 2.0 * PI / (n as f64 * self.spacing());
        (0..n)
            .map(|m| {
                let m = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
                m * dk
            })
            .collect()
    }

    /// Largest representable |k|.
    pub fn k_max(&self) -> f64 {
        PI / self.spacing()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.n_points == other.n_points
            && (self.min - other.min).abs() <= 1e-12 * (1.0 + self.min.abs())
            && (self.max - other.max).abs() <= 1e-12 * (1.0 + self.max.abs())
    }
}

/// Forward/inverse FFT pair of one length with reusable scratch.
#[derive(Clone)]
pub struct FftPair {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<C64>,
}

impl std::fmt::Debug for FftPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPair").field("n", &self.n).finish()
    }
}

impl FftPair {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            n,
            forward,
            inverse,
            scratch: vec![C64::new(0.0, 0.0); len],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalized forward transform.
    pub fn forward(&mut self, data: &mut [C64]) {
        self.forward.process_with_scratch(data, &mut self.scratch);
    }

    /// Inverse transform including the 1/n factor.
    pub fn inverse(&mut self, data: &mut [C64]) {
        self.inverse.process_with_scratch(data, &mut self.scratch);
        let s = 1.0 / self.n as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }

    /// Inverse transform without normalization.
    pub fn inverse_raw(&mut self, data: &mut [C64]) {
        self.inverse.process_with_scratch(data, &mut self.scratch);
    }
}

/// Spectral derivative d/dx of periodic samples on `grid`.
pub fn spectral_derivative(grid: &UniformGrid, values: &[C64], fft: &mut FftPair) -> Vec<C64> {
    let k = grid.wavenumbers();
    let mut buf = values.to_vec();
    fft.forward(&mut buf);
    for (z, &km) in buf.iter_mut().zip(&k) {
        *z *= C64::new(0.0, km);
    }
    // the Nyquist mode has no well-defined derivative
    buf[grid.n_points / 2] = C64::new(0.0, 0.0);
    fft.inverse(&mut buf);
    buf
}

/// Σ |ψ|² dx.
pub fn norm_sqr(values: &[C64], dx: f64) -> f64 {
    values.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx
}

/// Σ a* b dx.
pub fn inner(a: &[C64], b: &[C64], dx: f64) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>() * dx
}

/// Phase factors `exp(-i c (x0 + j dx))` for j = 0..n, built by recurrence with
/// periodic exact re-seeding to bound round-off.
pub fn linear_phase(out: &mut [C64], c: f64, x0: f64, dx: f64) {
    const RESEED: usize = 64;
    let step = C64::from_polar(1.0, -c * dx);
    let mut z = C64::new(0.0, 0.0);
    for (j, o) in out.iter_mut().enumerate() {
        if j % RESEED == 0 {
            z = C64::from_polar(1.0, -c * (x0 + j as f64 * dx));
        } else {
            z *= step;
        }
        *o = z;
    }
}
