//! Dipole response over the light quadrature: the sampled surface ⟨x⟩(βq, t),
//! its polynomial series in βq, and the resonant profile d_Ω(q).

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::TraceCache;
use crate::error::{Error, Result};
use crate::poly::{self, PolyLeastSquares, Polynomial, Rational};
use crate::tdse::{self, DipoleTrace, ElectronRunSpec, ModeParams};

/// Standard deviation of the vacuum quadrature distribution.
pub const VACUUM_SIGMA: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Quadrature values at which the electron is propagated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QSampling {
    pub q_values: Vec<f64>,
    pub centered_on: f64,
    /// Half-width in vacuum standard deviations.
    pub span: f64,
}

impl QSampling {
    /// `n` uniform points over `center ± span·σ`.
    pub fn uniform(center: f64, span: f64, n: usize) -> Result<Self> {
        let half = span * VACUUM_SIGMA;
        Self::covering(center - half, center + half, n, center)
    }

    /// `n` uniform points over `[lo, hi]`, which must enclose `center ± 4σ`.
    pub fn covering(lo: f64, hi: f64, n: usize, center: f64) -> Result<Self> {
        if n == 0 || !(hi >= lo) {
            return Err(Error::Parameter(format!("cannot sample {n} points over [{lo}, {hi}]")));
        }
        let q_values = if n == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        };
        Self::from_values(q_values, center)
    }

    pub fn from_values(q_values: Vec<f64>, centered_on: f64) -> Result<Self> {
        if q_values.is_empty() {
            return Err(Error::Parameter("empty q sampling".into()));
        }
        if q_values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parameter("q samples must be strictly increasing".into()));
        }
        let lo = q_values[0];
        let hi = *q_values.last().unwrap();
        let span = (centered_on - lo).min(hi - centered_on) / VACUUM_SIGMA;
        if q_values.len() > 1 && span < 4.0 - 1e-12 {
            return Err(Error::Parameter(format!(
                "q samples [{lo}, {hi}] cover only ±{span:.2}σ around {centered_on}; at least ±4σ needed"
            )));
        }
        Ok(Self {
            q_values,
            centered_on,
            span,
        })
    }

    pub fn single(q: f64) -> Self {
        Self {
            q_values: vec![q],
            centered_on: q,
            span: 0.0,
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.q_values[0], *self.q_values.last().unwrap())
    }
}

/// ⟨x⟩(q_m, t_n) on a shared time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DipoleSurface {
    pub q_values: Vec<f64>,
    pub beta: f64,
    pub dt: f64,
    /// One row per q value.
    pub traces: Vec<Vec<f64>>,
    /// Final norm of each propagation.
    pub final_norms: Vec<f64>,
}

impl DipoleSurface {
    pub fn from_traces(beta: f64, q_values: Vec<f64>, traces: Vec<DipoleTrace>) -> Result<Self> {
        if traces.is_empty() || traces.len() != q_values.len() {
            return Err(Error::Shape(format!(
                "{} traces for {} q values",
                traces.len(),
                q_values.len()
            )));
        }
        let dt = traces[0].dt;
        let len = traces[0].values.len();
        if traces.iter().any(|t| t.dt != dt || t.values.len() != len) {
            return Err(Error::Shape("traces differ in time step or length".into()));
        }
        Ok(Self {
            q_values,
            beta,
            dt,
            final_norms: traces.iter().map(|t| *t.norm_trace.last().unwrap()).collect(),
            traces: traces.into_iter().map(|t| t.values).collect(),
        })
    }

    pub fn n_times(&self) -> usize {
        self.traces[0].len()
    }

    pub fn column(&self, n: usize) -> Vec<f64> {
        self.traces.iter().map(|row| row[n]).collect()
    }

    pub fn duration(&self) -> f64 {
        (self.n_times() - 1) as f64 * self.dt
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.q_values[0], *self.q_values.last().unwrap())
    }
}

/// Propagate `base` at every sampled q (βq = mode.beta·q) in parallel.
/// Rows come back in sampling order regardless of scheduling.
pub fn sweep(base: &ElectronRunSpec, sampling: &QSampling, cache: Option<&TraceCache>) -> Result<DipoleSurface> {
    let traces: Vec<DipoleTrace> = sampling
        .q_values
        .par_iter()
        .map(|&q| {
            let mut spec = base.clone();
            spec.beta_q = base.mode.beta * q;
            let run = || tdse::propagate_electron(&spec);
            let out = match cache {
                Some(c) => c.get_or_compute(&spec, run),
                None => run(),
            };
            out.map_err(|e| Error::Sweep {
                q,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    DipoleSurface::from_traces(base.mode.beta, sampling.q_values.clone(), traces)
}

/// ⟨x⟩(βq, t) ≈ Σ_k f_k(t) (βq)^k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesCoefficients {
    pub order: usize,
    pub beta: f64,
    pub dt: f64,
    /// `f[k][n]` is f_k at time n·dt.
    pub f: Vec<Vec<f64>>,
    pub residual_rms: Vec<f64>,
    pub residual_max: Vec<f64>,
    /// q range the fit was made over.
    pub support: (f64, f64),
}

impl SeriesCoefficients {
    pub fn n_times(&self) -> usize {
        self.f[0].len()
    }

    /// Value and q-derivative at sample `n`.
    pub fn eval(&self, q: f64, n: usize) -> (f64, f64) {
        let u = self.beta * q;
        let mut v = 0.0;
        let mut d = 0.0;
        for k in (0..=self.order).rev() {
            d = d * u + v;
            v = v * u + self.f[k][n];
        }
        (v, d * self.beta)
    }

    /// Keep terms up to `(βq)^order`.
    pub fn truncate(&self, order: usize) -> Self {
        let mut out = self.clone();
        out.order = order.min(self.order);
        out.f.truncate(out.order + 1);
        out
    }
}

/// Least-squares polynomial in βq at every time sample.
pub fn fit_series(surface: &DipoleSurface, order: usize) -> Result<SeriesCoefficients> {
    if surface.q_values.len() < order + 2 {
        return Err(Error::Parameter(format!(
            "{} q samples cannot support an order-{order} series (need {})",
            surface.q_values.len(),
            order + 2
        )));
    }
    let xs: Vec<f64> = surface.q_values.iter().map(|q| surface.beta * q).collect();
    let same = xs.windows(2).all(|w| w[0] == w[1]);
    let nt = surface.n_times();
    let mut f = vec![vec![0.0; nt]; order + 1];
    let mut residual_rms = vec![0.0; nt];
    let mut residual_max = vec![0.0; nt];
    if same {
        // β = 0: the surface is q-independent; keep the mean as f₀.
        for n in 0..nt {
            let col = surface.column(n);
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            f[0][n] = mean;
            let (rms, max) = poly::residuals(&xs, &col, |_| mean);
            residual_rms[n] = rms;
            residual_max[n] = max;
        }
    } else {
        let ls = PolyLeastSquares::new(&xs, order)?;
        for n in 0..nt {
            let col = surface.column(n);
            let (p, rms, max) = ls.fit(&col);
            for (k, row) in f.iter_mut().enumerate() {
                row[n] = p.coeffs.get(k).copied().unwrap_or(0.0);
            }
            residual_rms[n] = rms;
            residual_max[n] = max;
        }
    }
    Ok(SeriesCoefficients {
        order,
        beta: surface.beta,
        dt: surface.dt,
        f,
        residual_rms,
        residual_max,
        support: surface.bounds(),
    })
}

/// d_Ω = (2/t_int) ∫₀^t_int x(t) cos(Ωt) dt by the trapezoid rule.
///
/// Returns the coefficient and an estimate of the spectral leakage, which is
/// zero when `t_int` spans an integer number of periods.
pub fn resonant_coefficient(values: &[f64], dt: f64, omega: f64, t_int: f64) -> Result<(f64, f64)> {
    let duration = (values.len() - 1) as f64 * dt;
    if !(t_int > 0.0) || t_int > duration * (1.0 + 1e-12) {
        return Err(Error::Parameter(format!(
            "interaction time {t_int} outside the trace duration {duration}"
        )));
    }
    let periods = t_int * omega / (2.0 * PI);
    let leakage = if (periods - periods.round()).abs() < 1e-9 * periods.max(1.0) {
        0.0
    } else {
        ((2.0 * omega * t_int).sin() / (2.0 * omega * t_int)).abs()
    };
    let full = ((t_int / dt) * (1.0 + 1e-14)).floor() as usize;
    let full = full.min(values.len() - 1);
    let g = |n: usize| values[n] * (omega * n as f64 * dt).cos();
    let mut s = 0.5 * (g(0) + g(full));
    for n in 1..full {
        s += g(n);
    }
    s *= dt;
    let rest = t_int - full as f64 * dt;
    if rest > 1e-12 * dt && full + 1 < values.len() {
        let frac = rest / dt;
        let x_end = values[full] + frac * (values[full + 1] - values[full]);
        s += 0.5 * rest * (g(full) + x_end * (omega * t_int).cos());
    }
    Ok((2.0 * s / t_int, leakage))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitKind {
    #[default]
    Polynomial,
    /// Numerator of the given order over a denominator of `den_order`.
    Rational { den_order: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum FomegaModel {
    Polynomial(Polynomial),
    Rational(Rational),
}

impl FomegaModel {
    pub fn eval(&self, q: f64) -> f64 {
        match self {
            Self::Polynomial(p) => p.eval(q),
            Self::Rational(r) => r.eval(q),
        }
    }

    pub fn eval_with_derivative(&self, q: f64) -> (f64, f64) {
        match self {
            Self::Polynomial(p) => p.eval_with_derivative(q),
            Self::Rational(r) => r.eval_with_derivative(q),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        match self {
            Self::Polynomial(p) => Self::Polynomial(p.scale(s)),
            Self::Rational(r) => Self::Rational(Rational {
                num: r.num.scale(s),
                den: r.den.clone(),
            }),
        }
    }

    /// Monomial coefficients (numerator only for rationals).
    pub fn coefficients(&self) -> &[f64] {
        match self {
            Self::Polynomial(p) => &p.coeffs,
            Self::Rational(r) => &r.num.coeffs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FomegaFit {
    pub kind: FitKind,
    pub order: usize,
    pub model: FomegaModel,
    pub residual_rms: f64,
    pub residual_max: f64,
    /// RMS residual below `FIT_ACCEPT` of the profile amplitude.
    pub accepted: bool,
    /// Range over which `model` was checked to be nonvanishing; the sample
    /// range for unchecked fits.
    pub support: (f64, f64),
}

/// d_Ω(q) samples with an optional analytic fit f_Ω(q).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonantProfile {
    pub q_values: Vec<f64>,
    pub d_omega: Vec<f64>,
    pub omega: f64,
    pub t_int: f64,
    /// Emitters summed into `d_omega`.
    #[serde(default = "one")]
    pub n_emitters: f64,
    pub fit: Option<FomegaFit>,
}

fn one() -> f64 {
    1.0
}

impl ResonantProfile {
    pub fn amplitude(&self) -> f64 {
        self.d_omega.iter().fold(0.0f64, |m, d| m.max(d.abs()))
    }

    /// f_Ω(q) from the fit.
    pub fn f(&self, q: f64) -> Option<f64> {
        self.fit.as_ref().map(|fit| fit.model.eval(q))
    }
}

/// d_Ω(q_m) for every row of `surface`.
pub fn resonant_dipole(surface: &DipoleSurface, mode: &ModeParams, t_int: f64) -> Result<ResonantProfile> {
    let mut d_omega = Vec::with_capacity(surface.q_values.len());
    let mut worst: f64 = 0.0;
    for row in &surface.traces {
        let (d, leak) = resonant_coefficient(row, surface.dt, mode.omega, t_int)?;
        worst = worst.max(leak);
        d_omega.push(d);
    }
    if worst > 0.0 {
        log::warn!(
            "interaction time {t_int:.3} a.u. is not an integer number of mode periods; relative leakage up to {worst:.2e}"
        );
    }
    Ok(ResonantProfile {
        q_values: surface.q_values.clone(),
        d_omega,
        omega: mode.omega,
        t_int,
        n_emitters: 1.0,
        fit: None,
    })
}

/// Relative RMS residual below which an f_Ω fit counts as accepted.
pub const FIT_ACCEPT: f64 = 1e-2;

/// Fit f_Ω(q) to the profile samples and check that it stays away from zero
/// on `support`.
pub fn fit_fomega(profile: &ResonantProfile, order: usize, kind: FitKind, support: (f64, f64)) -> Result<ResonantProfile> {
    let mut out = fit_fomega_unchecked(profile, order, kind)?;
    let fit = out.fit.as_mut().expect("fit set above");
    check_nonvanishing(&fit.model, support)?;
    fit.support = support;
    Ok(out)
}

/// As [`fit_fomega`] without the zero check; `support` is left at the sample
/// range. Flow maps built from the result still check their own domain.
pub fn fit_fomega_unchecked(profile: &ResonantProfile, order: usize, kind: FitKind) -> Result<ResonantProfile> {
    let qs = &profile.q_values;
    let ds = &profile.d_omega;
    let unknowns = match kind {
        FitKind::Polynomial => order + 1,
        FitKind::Rational { den_order } => order + 1 + den_order,
    };
    let constant = ds.iter().all(|d| (d - ds[0]).abs() <= 1e-15 * ds[0].abs().max(1e-300));
    if qs.len() < unknowns + 1 && !(constant && order == 0) {
        return Err(Error::Parameter(format!(
            "{} samples cannot support an order-{order} fit (need {})",
            qs.len(),
            unknowns + 1
        )));
    }
    let model = match kind {
        FitKind::Polynomial => {
            if qs.len() == 1 {
                FomegaModel::Polynomial(Polynomial::constant(ds[0]))
            } else {
                FomegaModel::Polynomial(PolyLeastSquares::new(qs, order)?.fit(ds).0)
            }
        }
        FitKind::Rational { den_order } => FomegaModel::Rational(poly::fit_rational(qs, ds, order, den_order)?),
    };
    let (rms, max) = poly::residuals(qs, ds, |q| model.eval(q));
    let support = qs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), q| (a.min(*q), b.max(*q)));
    let accepted = rms <= FIT_ACCEPT * profile.amplitude();
    if !accepted {
        log::warn!(
            "f_Ω fit of order {order} leaves rms residual {rms:.3e} against amplitude {:.3e}",
            profile.amplitude()
        );
    }
    let mut out = profile.clone();
    out.fit = Some(FomegaFit {
        kind,
        order,
        model,
        residual_rms: rms,
        residual_max: max,
        accepted,
        support,
    });
    Ok(out)
}

/// Reject models with a zero (or pole-induced sign change) inside `[lo, hi]`.
pub fn check_nonvanishing(model: &FomegaModel, (lo, hi): (f64, f64)) -> Result<()> {
    const SAMPLES: usize = 4096;
    let at = |i: usize| lo + (hi - lo) * i as f64 / SAMPLES as f64;
    let mut prev = model.eval(lo);
    if prev == 0.0 || !prev.is_finite() {
        return Err(Error::SingularFlow { location: lo });
    }
    for i in 1..=SAMPLES {
        let q = at(i);
        let v = model.eval(q);
        if v == 0.0 || !v.is_finite() {
            return Err(Error::SingularFlow { location: q });
        }
        if v.signum() != prev.signum() {
            let (mut a, mut b) = (at(i - 1), q);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if model.eval(m).signum() == prev.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Err(Error::SingularFlow {
                location: 0.5 * (a + b),
            });
        }
        prev = v;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(beta: f64, qs: &[f64], dt: f64, nt: usize, f: impl Fn(f64, f64) -> f64) -> DipoleSurface {
        DipoleSurface {
            q_values: qs.to_vec(),
            beta,
            dt,
            traces: qs
                .iter()
                .map(|&q| (0..nt).map(|n| f(beta * q, n as f64 * dt)).collect())
                .collect(),
            final_norms: vec![1.0; qs.len()],
        }
    }

    #[test]
    fn exact_series_recovery() {
        let qs: Vec<f64> = (0..9).map(|i| -4.0 + i as f64).collect();
        let (w, big) = (0.057, 0.74);
        let s = synthetic(0.3, &qs, 0.5, 400, |u, t| (w * t).cos() + u * (big * t).cos());
        let c = fit_series(&s, 3).unwrap();
        for n in 0..400 {
            let t = n as f64 * 0.5;
            assert!((c.f[0][n] - (w * t).cos()).abs() < 1e-10);
            assert!((c.f[1][n] - (big * t).cos()).abs() < 1e-10);
            assert!(c.f[2][n].abs() < 1e-10 && c.f[3][n].abs() < 1e-10);
        }
        let k = synthetic(0.3, &qs, 0.5, 10, |_, _| 0.7);
        let c = fit_series(&k, 2).unwrap();
        assert!(c.f[0].iter().all(|v| (v - 0.7).abs() < 1e-13));
        assert!(c.f[1].iter().chain(&c.f[2]).all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn resonant_normalization() {
        let omega = 0.3;
        let t_int = 10.0 * 2.0 * PI / omega;
        let n = 4000;
        let dt = t_int / n as f64;
        let cos: Vec<f64> = (0..=n).map(|j| (omega * j as f64 * dt).cos()).collect();
        let sin: Vec<f64> = (0..=n).map(|j| (omega * j as f64 * dt).sin()).collect();
        let (d, leak) = resonant_coefficient(&cos, dt, omega, t_int).unwrap();
        assert!((d - 1.0).abs() < 1e-10 && leak == 0.0);
        assert!(resonant_coefficient(&sin, dt, omega, t_int).unwrap().0.abs() < 1e-10);
        let (_, leak) = resonant_coefficient(&cos, dt, omega, 0.93 * t_int).unwrap();
        assert!(leak > 0.0);
    }

    fn profile(qs: Vec<f64>, f: impl Fn(f64) -> f64) -> ResonantProfile {
        ResonantProfile {
            d_omega: qs.iter().map(|&q| f(q)).collect(),
            q_values: qs,
            omega: 1.0,
            t_int: 1.0,
            n_emitters: 1.0,
            fit: None,
        }
    }

    #[test]
    fn fomega_fits() {
        let qs: Vec<f64> = (0..9).map(|i| -4.0 + i as f64).collect();
        let p = fit_fomega(&profile(qs.clone(), |q| 0.2 + 0.05 * q * q), 2, FitKind::Polynomial, (-4.0, 4.0)).unwrap();
        let c = p.fit.as_ref().unwrap().model.coefficients().to_vec();
        assert!((c[0] - 0.2).abs() < 1e-12 && c[1].abs() < 1e-12 && (c[2] - 0.05).abs() < 1e-12);
        let k = fit_fomega(&profile(qs.clone(), |_| 0.4), 0, FitKind::Polynomial, (-4.0, 4.0)).unwrap();
        assert!(k.fit.as_ref().unwrap().residual_rms < 1e-14);
        let bad = fit_fomega(&profile(qs.clone(), |q| 0.1 + 0.1 * q), 1, FitKind::Polynomial, (-4.0, 4.0));
        match bad {
            Err(Error::SingularFlow { location }) => assert!((location + 1.0).abs() < 1e-9),
            other => panic!("expected singular flow, got {other:?}"),
        }
        let r = fit_fomega(&profile(qs, |q| 1.0 / (1.0 + 0.1 * q)), 0, FitKind::Rational { den_order: 1 }, (-4.0, 4.0)).unwrap();
        assert!(r.fit.unwrap().residual_max < 1e-12);
    }

    #[test]
    fn sampling_span() {
        assert!(QSampling::uniform(0.0, 4.0, 9).is_ok());
        assert!(QSampling::covering(-1.0, 1.0, 5, 0.0).is_err());
        assert!(QSampling::from_values(vec![0.0, -1.0], 0.0).is_err());
    }
}
