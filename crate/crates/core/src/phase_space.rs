//! Wigner functions and nonclassicality measures of the light mode.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{FftPair, QuadratureGrid};
use crate::interp;
use crate::light::state::{hermite_functions, LightState, MixedLightState};

/// Pointwise tolerance on both marginals.
pub const MARGINAL_TOL: f64 = 1e-6;

/// W(q, p) on a rectangular patch of phase space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub q_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    /// Row-major, one row per q.
    pub values: Vec<f64>,
    /// ∬W over the full (uncropped) plane.
    pub integral: f64,
    /// ∬|W| − 1 over the full plane.
    pub negativity_volume: f64,
    /// ∬ over W < 0 of |W|; half of `negativity_volume`.
    pub negative_part: f64,
    /// Largest pointwise mismatch of the q and p marginals.
    pub marginal_error: (f64, f64),
}

impl WignerGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p_axis.len() + j]
    }

    pub fn dq(&self) -> f64 {
        axis_step(&self.q_axis)
    }

    pub fn dp(&self) -> f64 {
        axis_step(&self.p_axis)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Line segments of the W = 0 level set (marching squares).
    pub fn zero_contour(&self) -> Vec<[(f64, f64); 2]> {
        let (nq, np) = (self.q_axis.len(), self.p_axis.len());
        let mut segs = Vec::new();
        if nq < 2 || np < 2 {
            return segs;
        }
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let floor = 1e-8 * scale;
        for i in 0..nq - 1 {
            for j in 0..np - 1 {
                let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                let v: Vec<f64> = corners.iter().map(|&(a, b)| self.at(a, b)).collect();
                if v.iter().all(|x| x.abs() < floor) {
                    continue;
                }
                let mut pts = Vec::with_capacity(4);
                for e in 0..4 {
                    let (a, b) = (v[e], v[(e + 1) % 4]);
                    if (a < 0.0) != (b < 0.0) {
                        let t = a / (a - b);
                        let (ia, ja) = corners[e];
                        let (ib, jb) = corners[(e + 1) % 4];
                        let q = self.q_axis[ia] + t * (self.q_axis[ib] - self.q_axis[ia]);
                        let p = self.p_axis[ja] + t * (self.p_axis[jb] - self.p_axis[ja]);
                        pts.push((q, p));
                    }
                }
                for pair in pts.chunks_exact(2) {
                    segs.push([pair[0], pair[1]]);
                }
            }
        }
        segs
    }

    /// Matrix CSV: header row of p values, then `q, W(q, p_0), …` per row.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(out, "q\\p")?;
        for p in &self.p_axis {
            write!(out, ",{p:.10e}")?;
        }
        writeln!(out)?;
        for (i, q) in self.q_axis.iter().enumerate() {
            write!(out, "{q:.10e}")?;
            for j in 0..self.p_axis.len() {
                write!(out, ",{:.10e}", self.at(i, j))?;
            }
            writeln!(out)?;
        }
        out.flush()?;
        Ok(())
    }

    /// `<stem>.csv` plus `<stem>.json` holding the axes, metrics and the zero contour.
    pub fn write_bundle(&self, dir: &Path, stem: &str) -> Result<Vec<std::path::PathBuf>> {
        let csv = dir.join(format!("{stem}.csv"));
        self.write_csv(&csv)?;
        let json = dir.join(format!("{stem}.json"));
        let meta = serde_json::json!({
            "q_axis": self.q_axis,
            "p_axis": self.p_axis,
            "integral": self.integral,
            "negativity_volume": self.negativity_volume,
            "negative_part": self.negative_part,
            "marginal_error": [self.marginal_error.0, self.marginal_error.1],
            "min_value": self.min_value(),
            "zero_contour": self.zero_contour(),
        });
        std::fs::write(&json, serde_json::to_vec_pretty(&meta)?)?;
        Ok(vec![csv, json])
    }
}

fn axis_step(axis: &[f64]) -> f64 {
    if axis.len() < 2 {
        0.0
    } else {
        axis[1] - axis[0]
    }
}

/// Cropping of the stored matrix; metrics always use the full plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WignerOptions {
    pub q_range: Option<(f64, f64)>,
    pub p_range: Option<(f64, f64)>,
    /// Relative density below which rows and columns are dropped when no range is given.
    pub support_threshold: f64,
    /// Fail with a resolution error when a marginal is off by more than `MARGINAL_TOL`.
    pub check_marginals: bool,
}

impl Default for WignerOptions {
    fn default() -> Self {
        Self {
            q_range: None,
            p_range: None,
            support_threshold: 1e-12,
            check_marginals: true,
        }
    }
}

/// ρ(q_i, q_j) on a quadrature grid, normalized so that Σ ρ_ii dq = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub grid: QuadratureGrid,
    pub rho: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &LightState) -> Self {
        let a = &state.amplitudes;
        let n = a.len();
        Self {
            grid: state.grid,
            rho: DMatrix::from_fn(n, n, |i, j| a[i] * a[j].conj()),
        }
    }

    pub fn from_mixture(state: &MixedLightState) -> Self {
        let g = state.grid();
        let n = g.n_points;
        let mut rho = DMatrix::zeros(n, n);
        for (w, s) in state.weights.iter().zip(&state.states) {
            let a = &s.amplitudes;
            for j in 0..n {
                for i in 0..n {
                    rho[(i, j)] += a[i] * a[j].conj() * *w;
                }
            }
        }
        Self { grid: g, rho }
    }

    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|z| z.re).sum::<f64>() * self.grid.spacing()
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        let h = self.grid.spacing();
        self.rho.iter().map(|z| z.norm_sqr()).sum::<f64>() * h * h
    }

    /// max |ρ − ρ†|.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.rho.nrows();
        let mut e = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                e = e.max((self.rho[(i, j)] - self.rho[(j, i)].conj()).norm());
            }
        }
        e
    }

    /// ⟨b|ρ|b⟩.
    pub fn expectation(&self, b: &LightState) -> Result<f64> {
        if !self.grid.same_as(&b.grid) {
            return Err(Error::Shape("density matrix and state live on different grids".into()));
        }
        let h = self.grid.spacing();
        let v = nalgebra::DVector::from_column_slice(&b.amplitudes);
        let rv = &self.rho * &v;
        Ok(v.dotc(&rv).re * h * h)
    }

    /// Eigen-decomposition into a weighted ensemble, dropping weights below `tol`.
    pub fn to_mixture(&self, tol: f64) -> Result<MixedLightState> {
        let h = self.grid.spacing();
        let eig = self.rho.clone().scale(h).symmetric_eigen();
        let mut pairs: Vec<(f64, usize)> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &w)| (w, k))
            .filter(|(w, _)| *w > tol)
            .collect();
        if pairs.is_empty() {
            return Err(Error::Parameter("density matrix has no positive weight".into()));
        }
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let total: f64 = pairs.iter().map(|p| p.0).sum();
        let mut weights = Vec::with_capacity(pairs.len());
        let mut states = Vec::with_capacity(pairs.len());
        for (w, k) in pairs {
            let mut s = LightState::new(self.grid, eig.eigenvectors.column(k).iter().copied().collect())?;
            s.normalize()?;
            weights.push(w / total);
            states.push(s);
        }
        Ok(MixedLightState { weights, states })
    }
}

fn density_support(density: &[f64], threshold: f64) -> (usize, usize) {
    let max = density.iter().fold(0.0f64, |m, v| m.max(*v));
    let cut = threshold * max;
    let lo = density.iter().position(|&v| v > cut).unwrap_or(0);
    let hi = density.iter().rposition(|&v| v > cut).unwrap_or(density.len() - 1);
    (lo.saturating_sub(2), (hi + 2).min(density.len() - 1))
}

fn range_indices(axis: &[f64], (lo, hi): (f64, f64)) -> (usize, usize) {
    let a = axis.iter().position(|&x| x >= lo).unwrap_or(axis.len() - 1);
    let b = axis.iter().rposition(|&x| x <= hi).unwrap_or(0);
    (a.min(b), a.max(b))
}

/// |φ̃(p)|² of every component on the Wigner p axis (zero-padded DFT).
fn momentum_density(state: &MixedLightState, l: usize) -> Vec<f64> {
    let g = state.grid();
    let h = g.spacing();
    let m = 2 * l;
    let mut fft = FftPair::new(m);
    let mut out = vec![0.0; l];
    for (w, s) in state.weights.iter().zip(&state.states) {
        let mut buf = vec![C64::new(0.0, 0.0); m];
        buf[..s.amplitudes.len()].copy_from_slice(&s.amplitudes);
        fft.forward(&mut buf);
        for (j, o) in out.iter_mut().enumerate() {
            // p index j − l/2 on a spacing π/(l h) equals DFT bin j − l/2 of length 2l
            let idx = (j as isize - (l / 2) as isize).rem_euclid(m as isize) as usize;
            *o += w * buf[idx].norm_sqr() * h * h / (2.0 * PI);
        }
    }
    out
}

/// Wigner function of a pure state or an incoherent mixture.
///
/// W(q_i, p) = (1/π) Σ_k ρ(q_{i−k}, q_{i+k}) e^{2ipkh} h, evaluated for all p at
/// once by an FFT of length 2N so that the correlation never wraps.
pub fn wigner(state: &MixedLightState, opts: &WignerOptions) -> Result<WignerGrid> {
    let g = state.grid();
    let n = g.n_points;
    let h = g.spacing();
    let l = 2 * n;
    let dp = PI / (l as f64 * h);
    let q_axis_full = g.points();
    let p_axis_full: Vec<f64> = (0..l).map(|j| (j as f64 - (l / 2) as f64) * dp).collect();

    let density: Vec<f64> = (0..n)
        .map(|i| state.weights.iter().zip(&state.states).map(|(w, s)| w * s.amplitudes[i].norm_sqr()).sum())
        .collect();
    let pdens = momentum_density(state, l);

    let (qa, qb) = match opts.q_range {
        Some(r) => range_indices(&q_axis_full, r),
        None => density_support(&density, opts.support_threshold),
    };
    let (pa, pb) = match opts.p_range {
        Some(r) => range_indices(&p_axis_full, r),
        None => density_support(&pdens, opts.support_threshold),
    };
    let np = pb - pa + 1;

    struct Acc {
        col: Vec<f64>,
        abs: f64,
        total: f64,
        row_err: f64,
        rows: Vec<(usize, Vec<f64>)>,
    }
    let empty = || Acc {
        col: vec![0.0; l],
        abs: 0.0,
        total: 0.0,
        row_err: 0.0,
        rows: Vec::new(),
    };

    let acc = (0..n)
        .into_par_iter()
        .fold(
            || (empty(), FftPair::new(l), vec![C64::new(0.0, 0.0); l]),
            |(mut acc, mut fft, mut buf), i| {
                buf.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                let kmax = i.min(n - 1 - i);
                for k in 0..=kmax {
                    let mut c = C64::new(0.0, 0.0);
                    let mut cm = C64::new(0.0, 0.0);
                    for (w, s) in state.weights.iter().zip(&state.states) {
                        let a = &s.amplitudes;
                        c += a[i + k].conj() * a[i - k] * *w;
                        if k > 0 {
                            cm += a[i - k].conj() * a[i + k] * *w;
                        }
                    }
                    buf[k] = c;
                    if k > 0 {
                        buf[l - k] = cm;
                    }
                }
                fft.inverse_raw(&mut buf);
                let mut row = vec![0.0; l];
                for (j, r) in row.iter_mut().enumerate() {
                    let idx = (j as isize - (l / 2) as isize).rem_euclid(l as isize) as usize;
                    *r = buf[idx].re * h / PI;
                }
                let mut sum = 0.0;
                for (j, &v) in row.iter().enumerate() {
                    acc.col[j] += v * h;
                    acc.abs += v.abs() * h * dp;
                    sum += v * dp;
                }
                acc.total += sum * h;
                acc.row_err = acc.row_err.max((sum - density[i]).abs());
                if i >= qa && i <= qb {
                    acc.rows.push((i, row[pa..=pb].to_vec()));
                }
                (acc, fft, buf)
            },
        )
        .map(|(acc, _, _)| acc)
        .reduce(empty, |mut a, b| {
            a.col.iter_mut().zip(&b.col).for_each(|(x, y)| *x += y);
            a.abs += b.abs;
            a.total += b.total;
            a.row_err = a.row_err.max(b.row_err);
            a.rows.extend(b.rows);
            a
        });

    let col_err = acc
        .col
        .iter()
        .zip(&pdens)
        .fold(0.0f64, |m, (c, d)| m.max((c - d).abs()));
    if opts.check_marginals && (acc.row_err > MARGINAL_TOL || col_err > MARGINAL_TOL) {
        return Err(Error::Resolution(format!(
            "Wigner marginals off by {:.2e} (q) and {:.2e} (p); the q grid is too coarse for the state's momenta",
            acc.row_err, col_err
        )));
    }

    let mut rows = acc.rows;
    rows.sort_by_key(|r| r.0);
    let mut values = Vec::with_capacity(rows.len() * np);
    for (_, r) in rows {
        values.extend(r);
    }
    Ok(WignerGrid {
        q_axis: q_axis_full[qa..=qb].to_vec(),
        p_axis: p_axis_full[pa..=pb].to_vec(),
        values,
        integral: acc.total,
        negativity_volume: (acc.abs - 1.0).max(0.0),
        negative_part: (0.5 * (acc.abs - acc.total)).max(0.0),
        marginal_error: (acc.row_err, col_err),
    })
}

pub fn wigner_pure(state: &LightState, opts: &WignerOptions) -> Result<WignerGrid> {
    wigner(&MixedLightState::pure(state.clone()), opts)
}

/// W at one phase-space point by direct quadrature with interpolated amplitudes.
pub fn wigner_point(state: &LightState, q: f64, p: f64) -> f64 {
    let g = &state.grid;
    let h = g.spacing();
    let half = 0.5 * (g.max - g.min);
    let kmax = (half / h).ceil() as i64;
    let mut sum = 0.0;
    for k in -kmax..=kmax {
        let y = k as f64 * h;
        let a = interp::interpolate(g, &state.amplitudes, q + y);
        let b = interp::interpolate(g, &state.amplitudes, q - y);
        sum += (a.conj() * b * C64::from_polar(1.0, 2.0 * p * y)).re;
    }
    sum * h / PI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonclassicalityReport {
    pub negativity_volume: f64,
    pub negative_part: f64,
    pub wigner_min: f64,
    pub mean_q: f64,
    pub mean_p: f64,
    pub var_q: f64,
    pub var_p: f64,
    pub cov: f64,
    pub min_rotated_variance: f64,
    /// ⟨q² + p² − 1⟩/2.
    pub mean_photons: f64,
    /// Displacement |⟨q⟩ + i⟨p⟩|.
    pub q_bar: f64,
    /// q̄²/2.
    pub mean_photons_estimate: f64,
    pub fidelity_vs_reference: Option<f64>,
}

impl NonclassicalityReport {
    /// var_q·var_p − cov², which the uncertainty relation bounds by 1/4.
    pub fn uncertainty_product(&self) -> f64 {
        self.var_q * self.var_p - self.cov * self.cov
    }
}

pub fn analyze(state: &MixedLightState, reference: Option<&LightState>, opts: &WignerOptions) -> Result<NonclassicalityReport> {
    let w = wigner(state, opts)?;
    report_from(state, &w, reference)
}

/// Metrics from an already computed Wigner grid of `state`.
pub fn report_from(state: &MixedLightState, w: &WignerGrid, reference: Option<&LightState>) -> Result<NonclassicalityReport> {
    let m = state.moments();
    let q_bar = m.mean_q.hypot(m.mean_p);
    let fidelity_vs_reference = match reference {
        Some(r) => Some(fidelity_mixed(state, r)?),
        None => None,
    };
    Ok(NonclassicalityReport {
        negativity_volume: w.negativity_volume,
        negative_part: w.negative_part,
        wigner_min: w.min_value(),
        mean_q: m.mean_q,
        mean_p: m.mean_p,
        var_q: m.var_q,
        var_p: m.var_p,
        cov: m.cov,
        min_rotated_variance: m.min_rotated_variance(),
        mean_photons: m.mean_photons(),
        q_bar,
        mean_photons_estimate: 0.5 * q_bar * q_bar,
        fidelity_vs_reference,
    })
}

/// |⟨a|b⟩|² for normalized states.
pub fn fidelity(a: &LightState, b: &LightState) -> Result<f64> {
    let s = a.overlap(b)?;
    Ok(s.norm_sqr() / (a.norm_sqr() * b.norm_sqr()))
}

/// ⟨b|ρ_a|b⟩ for an ensemble ρ_a.
pub fn fidelity_mixed(a: &MixedLightState, b: &LightState) -> Result<f64> {
    let mut f = 0.0;
    for (w, s) in a.weights.iter().zip(&a.states) {
        f += w * fidelity(s, b)?;
    }
    Ok(f)
}

/// Free evolution e^{−iθ n̂}: rigid rotation of W by θ, computed in the Fock basis.
pub fn rotate(state: &LightState, theta: f64, nmax: usize) -> Result<LightState> {
    let g = state.grid;
    let h = g.spacing();
    let qs = g.points();
    let basis: Vec<Vec<f64>> = qs.iter().map(|&q| hermite_functions(q, nmax)).collect();
    let mut coeffs = vec![C64::new(0.0, 0.0); nmax + 1];
    for (a, row) in state.amplitudes.iter().zip(&basis) {
        for (c, &hn) in coeffs.iter_mut().zip(row) {
            *c += a * hn * h;
        }
    }
    let captured: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let norm = state.norm_sqr();
    if (norm - captured).abs() > 1e-10 * norm {
        return Err(Error::Resolution(format!(
            "Fock expansion up to n = {nmax} captures {captured:.12} of norm {norm:.12}"
        )));
    }
    for (n, c) in coeffs.iter_mut().enumerate() {
        *c *= C64::from_polar(1.0, -theta * n as f64);
    }
    let amplitudes = basis
        .iter()
        .map(|row| row.iter().zip(&coeffs).map(|(&hn, c)| c * hn).sum())
        .collect();
    LightState::new(g, amplitudes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::light::state::{fock_state, gaussian_state};

    fn grid() -> QuadratureGrid {
        QuadratureGrid::symmetric(10.0, 256).unwrap()
    }

    #[test]
    fn vacuum_wigner_is_gaussian() {
        let s = gaussian_state(&grid(), 0.0, 0.0, 0.5).unwrap();
        let w = wigner_pure(&s, &WignerOptions::default()).unwrap();
        assert!((w.integral - 1.0).abs() < 1e-10);
        assert!(w.negativity_volume < 1e-8);
        for (i, q) in w.q_axis.iter().enumerate().step_by(7) {
            for (j, p) in w.p_axis.iter().enumerate().step_by(11) {
                let exact = (-(q * q) - p * p).exp() / PI;
                assert!((w.at(i, j) - exact).abs() < 1e-10, "{q} {p}");
            }
        }
        assert!((wigner_point(&s, 0.0, 0.0) - 1.0 / PI).abs() < 1e-9);
    }

    #[test]
    fn fock_one_is_negative_at_origin() {
        let s = fock_state(&grid(), 1).unwrap();
        assert!((wigner_point(&s, 0.0, 0.0) + 1.0 / PI).abs() < 1e-9);
        let w = wigner_pure(&s, &WignerOptions::default()).unwrap();
        let negative = 2.0 * (-0.5f64).exp() - 1.0;
        assert!((w.negative_part - negative).abs() < 1e-3, "{}", w.negative_part);
        assert!((w.negativity_volume - 2.0 * negative).abs() < 2e-3);
    }

    #[test]
    fn coarse_grid_is_reported() {
        let g = QuadratureGrid::symmetric(10.0, 64).unwrap();
        let s = gaussian_state(&g, 0.0, 5.0, 0.5).unwrap();
        assert!(matches!(wigner_pure(&s, &WignerOptions::default()), Err(Error::Resolution(_))));
    }

    #[test]
    fn fidelity_examples() {
        let g = grid();
        let v = gaussian_state(&g, 0.0, 0.0, 0.5).unwrap();
        let c = gaussian_state(&g, 1.0, 0.0, 0.5).unwrap();
        let f1 = fock_state(&g, 1).unwrap();
        assert!((fidelity(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&v, &f1).unwrap() < 1e-10);
        assert!((fidelity(&v, &c).unwrap() - (-0.5f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn rotation_swaps_quadratures() {
        let g = grid();
        let s = gaussian_state(&g, 2.0, 0.0, 0.25).unwrap();
        let r = rotate(&s, PI / 2.0, 120).unwrap();
        let m = r.moments();
        assert!((m.mean_q).abs() < 1e-8 && (m.mean_p + 2.0).abs() < 1e-8);
        assert!((m.var_q - 1.0).abs() < 1e-8 && (m.var_p - 0.25).abs() < 1e-8);
    }

    #[test]
    fn density_matrix_round_trip() {
        let g = QuadratureGrid::symmetric(8.0, 64).unwrap();
        let mix = MixedLightState {
            weights: vec![0.5, 0.5],
            states: vec![fock_state(&g, 0).unwrap(), fock_state(&g, 1).unwrap()],
        };
        let rho = DensityMatrix::from_mixture(&mix);
        assert!((rho.trace() - 1.0).abs() < 1e-10);
        assert!((rho.purity() - 0.5).abs() < 1e-10);
        let back = rho.to_mixture(1e-12).unwrap();
        assert_eq!(back.states.len(), 2);
        assert!((rho.expectation(&mix.states[0]).unwrap() - 0.5).abs() < 1e-10);
    }
}
