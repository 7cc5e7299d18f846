//! One-dimensional model potentials and their bound states.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, FftPair, SpatialGrid};
use crate::tdse::SplitOperator;
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    SoftCoreAtom,
    TwoCenterMolecule,
    /// `½ k x²`; used for analytic checks. `k = 0` is a free particle.
    Harmonic { stiffness: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoreCenter {
    pub charge: f64,
    pub position: f64,
}

/// `V(x) = -Σ Z_k / √((x - x_k)² + a)` for the soft-core kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialModel {
    #[serde(flatten)]
    pub kind: PotentialKind,
    #[serde(default)]
    pub centers: Vec<CoreCenter>,
    /// Softening `a` (a.u.², enters as `x² + a`).
    #[serde(default = "one")]
    pub softening: f64,
    /// Ionization potential in eV; when set, `calibrate` tunes the softening to it.
    #[serde(default)]
    pub target_ip: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl PotentialModel {
    pub fn soft_core(charge: f64, softening: f64) -> Self {
        Self {
            kind: PotentialKind::SoftCoreAtom,
            centers: vec![CoreCenter {
                charge,
                position: 0.0,
            }],
            softening,
            target_ip: None,
        }
    }

    /// Hydrogen-like atom with ground-state energy -0.5 a.u.
    pub fn hydrogen() -> Self {
        Self::soft_core(1.0, 2.0)
    }

    /// Two fixed centers `(charge, position)`.
    pub fn two_center(a: (f64, f64), b: (f64, f64), softening: f64) -> Self {
        Self {
            kind: PotentialKind::TwoCenterMolecule,
            centers: vec![
                CoreCenter {
                    charge: a.0,
                    position: a.1,
                },
                CoreCenter {
                    charge: b.0,
                    position: b.1,
                },
            ],
            softening,
            target_ip: None,
        }
    }

    pub fn harmonic(stiffness: f64) -> Self {
        Self {
            kind: PotentialKind::Harmonic { stiffness },
            centers: Vec::new(),
            softening: 1.0,
            target_ip: None,
        }
    }

    pub fn with_target_ip(mut self, ip_ev: f64) -> Self {
        self.target_ip = Some(ip_ev);
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            PotentialKind::Harmonic { stiffness } => {
                if !(stiffness >= 0.0) {
                    return Err(Error::Parameter(format!("stiffness {stiffness} < 0")));
                }
            }
            PotentialKind::SoftCoreAtom => {
                if self.centers.is_empty() {
                    return Err(Error::Parameter("soft-core atom needs a center".into()));
                }
            }
            PotentialKind::TwoCenterMolecule => {
                if self.centers.len() != 2 {
                    return Err(Error::Parameter(format!(
                        "two-center molecule needs exactly two centers, got {}",
                        self.centers.len()
                    )));
                }
            }
        }
        if !matches!(self.kind, PotentialKind::Harmonic { .. }) && !(self.softening > 0.0) {
            return Err(Error::Parameter(format!(
                "softening must be positive, got {}",
                self.softening
            )));
        }
        if let Some(ip) = self.target_ip {
            if !(ip > 0.0) {
                return Err(Error::Parameter(format!("target I_p {ip} eV must be positive")));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            PotentialKind::Harmonic { stiffness } => 0.5 * stiffness * x * x,
            _ => -self
                .centers
                .iter()
                .map(|c| c.charge / ((x - c.position).powi(2) + self.softening).sqrt())
                .sum::<f64>(),
        }
    }

    /// True when `V(-x) = V(x)`.
    pub fn is_symmetric(&self) -> bool {
        match self.kind {
            PotentialKind::Harmonic { .. } => true,
            _ => {
                let mut a: Vec<(f64, f64)> = self.centers.iter().map(|c| (c.position, c.charge)).collect();
                let mut b: Vec<(f64, f64)> = self.centers.iter().map(|c| (-c.position, c.charge)).collect();
                a.sort_by(|p, q| p.partial_cmp(q).unwrap());
                b.sort_by(|p, q| p.partial_cmp(q).unwrap());
                a.iter()
                    .zip(&b)
                    .all(|(p, q)| (p.0 - q.0).abs() < 1e-14 && (p.1 - q.1).abs() < 1e-14)
            }
        }
    }
}

pub fn build_potential(model: &PotentialModel, grid: &SpatialGrid) -> Result<Vec<f64>> {
    model.validate()?;
    Ok(grid.points().into_iter().map(|x| model.eval(x)).collect())
}

/// Normalized wavefunction on a spatial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectronicState {
    pub grid: SpatialGrid,
    pub amplitudes: Vec<C64>,
    pub energy: Option<f64>,
    pub label: String,
}

impl ElectronicState {
    /// Gaussian packet `exp(-(x-x0)²/(4σ²) + i p0 x)`, normalized.
    pub fn gaussian(grid: &SpatialGrid, x0: f64, sigma: f64, p0: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::Parameter(format!("packet width {sigma}")));
        }
        let mut amplitudes: Vec<C64> = grid
            .points()
            .into_iter()
            .map(|x| C64::from_polar((-(x - x0).powi(2) / (4.0 * sigma * sigma)).exp(), p0 * x))
            .collect();
        normalize(&mut amplitudes, grid.spacing())?;
        Ok(Self {
            grid: *grid,
            amplitudes,
            energy: None,
            label: format!("gaussian(x0={x0}, sigma={sigma})"),
        })
    }

    pub fn norm(&self) -> f64 {
        grid::norm_sqr(&self.amplitudes, self.grid.spacing()).sqrt()
    }

    pub fn overlap(&self, other: &Self) -> C64 {
        grid::inner(&self.amplitudes, &other.amplitudes, self.grid.spacing())
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Number of sign changes of the real part, ignoring the far tails.
    pub fn node_count(&self) -> usize {
        let max = self.amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let mut last = 0.0f64;
        let mut nodes = 0;
        for a in &self.amplitudes {
            if a.norm() < 1e-4 * max {
                continue;
            }
            let s = a.re.signum();
            if last != 0.0 && s != last {
                nodes += 1;
            }
            last = s;
        }
        nodes
    }

    /// `⟨ψ(-x)|ψ(x)⟩`; ±1 for states of definite parity on a symmetric grid.
    pub fn parity(&self) -> f64 {
        let n = self.amplitudes.len();
        let dx = self.grid.spacing();
        (0..n)
            .map(|i| (self.amplitudes[n - 1 - i].conj() * self.amplitudes[i]).re)
            .sum::<f64>()
            * dx
    }
}

fn normalize(v: &mut [C64], dx: f64) -> Result<()> {
    let n = grid::norm_sqr(v, dx).sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Parameter("cannot normalize a zero vector".into()));
    }
    for a in v.iter_mut() {
        *a /= n;
    }
    Ok(())
}

/// `Σ c_i ψ_i`, normalized.
pub fn make_superposition(states: &[ElectronicState], coefficients: &[C64]) -> Result<ElectronicState> {
    if states.is_empty() || states.len() != coefficients.len() {
        return Err(Error::Shape(format!(
            "{} states but {} coefficients",
            states.len(),
            coefficients.len()
        )));
    }
    let grid = states[0].grid;
    if states.iter().any(|s| !s.grid.same_as(&grid)) {
        return Err(Error::Shape("superposed states live on different grids".into()));
    }
    if coefficients.iter().all(|c| c.norm() == 0.0) {
        return Err(Error::Parameter("all superposition coefficients vanish".into()));
    }
    let mut amplitudes = vec![C64::new(0.0, 0.0); grid.n_points];
    for (s, c) in states.iter().zip(coefficients) {
        for (a, b) in amplitudes.iter_mut().zip(&s.amplitudes) {
            *a += c * b;
        }
    }
    normalize(&mut amplitudes, grid.spacing())?;
    let label = states
        .iter()
        .zip(coefficients)
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(s, c)| format!("({:.3}{:+.3}i)·{}", c.re, c.im, s.label))
        .collect::<Vec<_>>()
        .join(" + ");
    let energy = if states.len() == 1 { states[0].energy } else { None };
    Ok(ElectronicState {
        grid,
        amplitudes,
        energy,
        label,
    })
}

/// Tunables of the eigensolver.
#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub dtau: f64,
    pub energy_tol: f64,
    pub max_relax_steps: usize,
    pub residual_tol: f64,
    pub max_polish_iterations: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            dtau: 0.05,
            energy_tol: 1e-10,
            max_relax_steps: 200_000,
            residual_tol: 1e-9,
            max_polish_iterations: 400,
        }
    }
}

/// Applies `H = -½∂² + V` spectrally to real vectors.
struct Hamiltonian {
    v: Vec<f64>,
    half_k2: Vec<f64>,
    fft: FftPair,
    buf: Vec<C64>,
}

impl Hamiltonian {
    fn new(grid: &SpatialGrid, v: Vec<f64>) -> Self {
        Self {
            half_k2: grid.wavenumbers().iter().map(|k| 0.5 * k * k).collect(),
            fft: FftPair::new(grid.n_points),
            buf: vec![C64::new(0.0, 0.0); grid.n_points],
            v,
        }
    }

    fn apply(&mut self, x: &[f64], out: &mut [f64]) {
        for (b, &x) in self.buf.iter_mut().zip(x) {
            *b = C64::from(x);
        }
        self.fft.forward(&mut self.buf);
        for (b, t) in self.buf.iter_mut().zip(&self.half_k2) {
            *b *= t;
        }
        self.fft.inverse(&mut self.buf);
        for i in 0..x.len() {
            out[i] = self.buf[i].re + self.v[i] * x[i];
        }
    }

    /// `(T + 1)⁻¹ r`.
    fn precondition(&mut self, r: &[f64], out: &mut [f64]) {
        for (b, &x) in self.buf.iter_mut().zip(r) {
            *b = C64::from(x);
        }
        self.fft.forward(&mut self.buf);
        for (b, t) in self.buf.iter_mut().zip(&self.half_k2) {
            *b /= t + 1.0;
        }
        self.fft.inverse(&mut self.buf);
        for (o, b) in out.iter_mut().zip(&self.buf) {
            *o = b.re;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormalize `vecs` in place (Euclidean), dropping nearly dependent ones.
fn orthonormalize(vecs: &mut Vec<Vec<f64>>, keep_first: usize) {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vecs.len());
    for (idx, mut v) in vecs.drain(..).enumerate() {
        let n0 = dot(&v, &v).sqrt();
        for _ in 0..2 {
            for u in &out {
                let c = dot(u, &v);
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
            }
        }
        let n = dot(&v, &v).sqrt();
        if idx < keep_first || n > 1e-10 * n0.max(1e-300) {
            if n == 0.0 {
                continue;
            }
            v.iter_mut().for_each(|a| *a /= n);
            out.push(v);
        }
    }
    *vecs = out;
}

fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-3 * max) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Imaginary-time relaxation of `n` states with Gram–Schmidt deflation.
fn relax(grid: &SpatialGrid, v: &[f64], n: usize, opts: &EigenOptions, ham: &mut Hamiltonian) -> Vec<Vec<f64>> {
    let dx = grid.spacing();
    let xs = grid.points();
    let mut prop = SplitOperator::new_imaginary(grid, v, opts.dtau);
    let width = (grid.max - grid.min) / 8.0;
    let center = 0.5 * (grid.max + grid.min);
    let mut states: Vec<Vec<C64>> = (0..n)
        .map(|k| {
            xs.iter()
                .map(|&x| {
                    let u = (x - center) / width;
                    C64::from(u.powi(k as i32) * (-0.5 * u * u).exp() + 1e-3 * (0.37 * x + k as f64).sin() * (-0.5 * u * u).exp())
                })
                .collect()
        })
        .collect();
    let mut energies = vec![f64::INFINITY; n];
    let mut real = vec![0.0; grid.n_points];
    let mut hx = vec![0.0; grid.n_points];
    for step in 0..opts.max_relax_steps {
        for s in states.iter_mut() {
            prop.step(s, 0.0, 0.0);
        }
        for k in 0..n {
            let (done, rest) = states.split_at_mut(k);
            let s = &mut rest[0];
            for u in done.iter() {
                let c = grid::inner(u, s, dx);
                s.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
            }
            let norm = grid::norm_sqr(s, dx).sqrt();
            s.iter_mut().for_each(|a| *a /= norm);
        }
        if step % 10 == 9 {
            let mut change: f64 = 0.0;
            for (k, s) in states.iter().enumerate() {
                real.iter_mut().zip(s).for_each(|(r, a)| *r = a.re);
                ham.apply(&real, &mut hx);
                let e = dot(&real, &hx) / dot(&real, &real);
                change = change.max((e - energies[k]).abs() / 10.0);
                energies[k] = e;
            }
            if change < opts.energy_tol {
                break;
            }
        }
    }
    states
        .into_iter()
        .map(|s| s.into_iter().map(|a| a.re).collect())
        .collect()
}

/// Block Rayleigh–Ritz refinement with a kinetic preconditioner.
fn polish(x0: Vec<Vec<f64>>, n_wanted: usize, opts: &EigenOptions, ham: &mut Hamiltonian) -> Result<(Vec<f64>, Vec<Vec<f64>>, Vec<f64>)> {
    let len = x0[0].len();
    let m = x0.len();
    let mut x = x0;
    orthonormalize(&mut x, m);
    let mut p: Vec<Vec<f64>> = Vec::new();
    let mut residuals = vec![f64::INFINITY; m];
    let mut energies = vec![0.0; m];
    for iteration in 0..opts.max_polish_iterations {
        let hx: Vec<Vec<f64>> = x
            .iter()
            .map(|v| {
                let mut out = vec![0.0; len];
                ham.apply(v, &mut out);
                out
            })
            .collect();
        let mut w = Vec::with_capacity(m);
        for k in 0..m {
            energies[k] = dot(&x[k], &hx[k]);
            let r: Vec<f64> = hx[k].iter().zip(&x[k]).map(|(h, v)| h - energies[k] * v).collect();
            residuals[k] = dot(&r, &r).sqrt();
            let mut t = vec![0.0; len];
            ham.precondition(&r, &mut t);
            w.push(t);
        }
        if residuals[..n_wanted].iter().all(|&r| r < opts.residual_tol) {
            return Ok((energies, x, residuals));
        }
        let mut basis = x.clone();
        basis.extend(w);
        basis.extend(p.iter().cloned());
        orthonormalize(&mut basis, m);
        let hb: Vec<Vec<f64>> = basis
            .iter()
            .map(|v| {
                let mut out = vec![0.0; len];
                ham.apply(v, &mut out);
                out
            })
            .collect();
        let dim = basis.len();
        let mut h = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let val = 0.5 * (dot(&basis[i], &hb[j]) + dot(&basis[j], &hb[i]));
                h[(i, j)] = val;
                h[(j, i)] = val;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let mut new_x = Vec::with_capacity(m);
        let mut new_p = Vec::with_capacity(m);
        for &col in order.iter().take(m) {
            let c = eig.eigenvectors.column(col);
            let mut v = vec![0.0; len];
            let mut d = vec![0.0; len];
            for (j, b) in basis.iter().enumerate() {
                let cj = c[j];
                v.iter_mut().zip(b).for_each(|(a, b)| *a += cj * b);
                if j >= m {
                    d.iter_mut().zip(b).for_each(|(a, b)| *a += cj * b);
                }
            }
            new_x.push(v);
            new_p.push(d);
        }
        x = new_x;
        orthonormalize(&mut x, m);
        p = new_p;
        log::trace!("polish iteration {iteration}: residuals {:?}", &residuals[..n_wanted]);
    }
    let (state, residual) = residuals[..n_wanted]
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (k, &r)| if r > acc.1 { (k, r) } else { acc });
    Err(Error::NoConvergence {
        state,
        residual,
        iterations: opts.max_polish_iterations,
    })
}

/// Lowest `n_states` eigenstates, energies ascending.
pub fn eigensolve(model: &PotentialModel, grid: &SpatialGrid, n_states: usize) -> Result<Vec<ElectronicState>> {
    eigensolve_with(model, grid, n_states, &EigenOptions::default())
}

pub fn eigensolve_with(model: &PotentialModel, grid: &SpatialGrid, n_states: usize, opts: &EigenOptions) -> Result<Vec<ElectronicState>> {
    if n_states == 0 {
        return Err(Error::Parameter("n_states must be at least 1".into()));
    }
    if n_states + 2 > grid.n_points / 4 {
        return Err(Error::Parameter(format!(
            "{n_states} states requested on a {}-point grid",
            grid.n_points
        )));
    }
    let v = build_potential(model, grid)?;
    let dx = grid.spacing();
    let mut ham = Hamiltonian::new(grid, v.clone());
    let guard = n_states + 2;
    let warm = relax(grid, &v, guard, opts, &mut ham);
    let (energies, mut vecs, _) = polish(warm, n_states, opts, &mut ham)?;

    let mut out = Vec::with_capacity(n_states);
    for (k, vec) in vecs.iter_mut().enumerate().take(n_states) {
        fix_sign(vec);
        let scale = 1.0 / dx.sqrt();
        let amplitudes: Vec<C64> = vec.iter().map(|&a| C64::from(a * scale)).collect();
        let peak = amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let edge = amplitudes[0].norm().max(amplitudes[grid.n_points - 1].norm());
        if edge > 1e-8 * peak.max(1.0) {
            return Err(Error::Support(format!(
                "eigenstate {k} has amplitude {edge:.2e} at the grid edge; widen the grid"
            )));
        }
        out.push(ElectronicState {
            grid: *grid,
            amplitudes,
            energy: Some(energies[k]),
            label: format!("psi{k}"),
        });
    }
    Ok(out)
}

/// `‖Hψ − Eψ‖` for a state with known energy.
pub fn residual(model: &PotentialModel, state: &ElectronicState) -> Result<f64> {
    let energy = state
        .energy
        .ok_or_else(|| Error::Parameter("state carries no energy".into()))?;
    let v = build_potential(model, &state.grid)?;
    let mut ham = Hamiltonian::new(&state.grid, v);
    let dx = state.grid.spacing();
    let mut total = 0.0;
    for part in 0..2 {
        let x: Vec<f64> = state
            .amplitudes
            .iter()
            .map(|a| if part == 0 { a.re } else { a.im })
            .collect();
        let mut hx = vec![0.0; x.len()];
        ham.apply(&x, &mut hx);
        total += hx
            .iter()
            .zip(&x)
            .map(|(h, x)| (h - energy * x).powi(2))
            .sum::<f64>();
    }
    Ok((total * dx).sqrt())
}

/// Tune the softening until the ground-state energy equals `-target_ip`.
pub fn calibrate(model: &PotentialModel, grid: &SpatialGrid) -> Result<PotentialModel> {
    let target = model
        .target_ip
        .ok_or_else(|| Error::Parameter("calibration needs target_ip".into()))?;
    if matches!(model.kind, PotentialKind::Harmonic { .. }) {
        return Err(Error::Parameter("harmonic models have no softening".into()));
    }
    let e_target = -units::ev_to_au(target);
    let opts = EigenOptions {
        residual_tol: 1e-8,
        ..EigenOptions::default()
    };
    let ground = |a: f64| -> Result<f64> {
        let mut m = model.clone();
        m.softening = a;
        Ok(eigensolve_with(&m, grid, 1, &opts)?[0].energy.unwrap())
    };
    // E0 rises monotonically with the softening; bracket around the starting value.
    let start = if model.softening > 0.0 { model.softening } else { 1.0 };
    let (mut lo, mut hi) = (start, start);
    while ground(hi)? < e_target {
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::Parameter(format!(
                "target I_p {target} eV is not reachable by softening"
            )));
        }
    }
    while ground(lo)? > e_target {
        lo *= 0.5;
        if lo < 1e-3 {
            return Err(Error::Parameter(format!(
                "target I_p {target} eV exceeds the most strongly bound configuration"
            )));
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let e = ground(mid)?;
        if (e - e_target).abs() < 1e-7 {
            lo = mid;
            hi = mid;
            break;
        }
        if e < e_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut out = model.clone();
    out.softening = 0.5 * (lo + hi);
    Ok(out)
}

/// Semiclassical cutoff `I_p + 3.17 U_p` (a.u.).
pub fn cutoff_energy(ip: f64, f0: f64, omega: f64) -> f64 {
    ip + 3.17 * f0 * f0 / (4.0 * omega * omega)
}

/// `ΔE` between two states in units of `omega`.
pub fn resonance_order(lower: &ElectronicState, upper: &ElectronicState, omega: f64) -> Option<f64> {
    Some((upper.energy? - lower.energy?) / omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn potential_formulas() {
        let grid = SpatialGrid::symmetric(10.0, 64).unwrap();
        let m = PotentialModel::soft_core(1.0, 2.0);
        assert!((m.eval(0.0) + 1.0 / 2f64.sqrt()).abs() < 1e-15);
        let m2 = PotentialModel::two_center((1.0, -1.0), (1.0, 1.0), 1.0);
        assert!((m2.eval(0.0) + 2.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!(build_potential(&PotentialModel::soft_core(1.0, 0.0), &grid).is_err());
        assert!(build_potential(&PotentialModel::soft_core(1.0, -1.0), &grid).is_err());
    }

    #[test]
    fn oscillator_levels() {
        let grid = SpatialGrid::symmetric(12.0, 256).unwrap();
        let states = eigensolve(&PotentialModel::harmonic(1.0), &grid, 3).unwrap();
        for (k, s) in states.iter().enumerate() {
            assert!((s.energy.unwrap() - (k as f64 + 0.5)).abs() < 1e-6);
            assert_eq!(s.node_count(), k);
            assert!((s.parity() - if k % 2 == 0 { 1.0 } else { -1.0 }).abs() < 1e-8);
        }
    }

    #[test]
    fn hydrogen_ground_state() {
        let grid = SpatialGrid::symmetric(60.0, 512).unwrap();
        let model = PotentialModel::hydrogen();
        let states = eigensolve(&model, &grid, 2).unwrap();
        assert!((states[0].energy.unwrap() + 0.5).abs() < 1e-6);
        assert_eq!(states[0].node_count(), 0);
        assert_eq!(states[1].node_count(), 1);
        for s in &states {
            assert!(residual(&model, s).unwrap() < 1e-6);
            assert!((s.norm() - 1.0).abs() < 1e-10);
        }
        assert!(states[0].overlap(&states[1]).norm() < 1e-8);
    }

    #[test]
    fn superposition_weights() {
        let grid = SpatialGrid::symmetric(12.0, 256).unwrap();
        let s = eigensolve(&PotentialModel::harmonic(1.0), &grid, 4).unwrap();
        let one = C64::new(1.0, 0.0);
        let sup = make_superposition(&s[..2], &[one, one]).unwrap();
        assert!((s[0].overlap(&sup).norm_sqr() - 0.5).abs() < 1e-12);
        assert!((s[1].overlap(&sup).norm_sqr() - 0.5).abs() < 1e-12);
        let same = make_superposition(&s[..1], &[one]).unwrap();
        assert!(same.amplitudes.iter().zip(&s[0].amplitudes).all(|(a, b)| (a - b).norm() < 1e-14));
        let phased = make_superposition(&[s[0].clone(), s[3].clone()], &[one, C64::i()]).unwrap();
        let rel = s[3].overlap(&phased).arg() - s[0].overlap(&phased).arg();
        assert!((rel - PI / 2.0).abs() < 1e-10);
        let other = SpatialGrid::symmetric(10.0, 256).unwrap();
        let g = ElectronicState::gaussian(&other, 0.0, 1.0, 0.0).unwrap();
        assert!(matches!(make_superposition(&[s[0].clone(), g], &[one, one]), Err(Error::Shape(_))));
    }
}
