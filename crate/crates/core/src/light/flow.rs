//! Generalized shift operator exp[a f(q) ∂_q] realized through
//! Q(q) = ∫ dq'/f(q'):  exp[a f ∂_q] φ(q) = φ(Q⁻¹[Q(q) + a]).

use serde::{Deserialize, Serialize};

use super::state::LightState;
use crate::error::{Error, Result};
use crate::interp;
use crate::poly::{self, ChebSeries};
use crate::response::{self, FomegaModel, ResonantProfile};
use crate::tdse::ModeParams;
use crate::units::ELECTRON_CHARGE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InverseMethod {
    /// Safeguarded Newton iteration on Q(X) = y at every point.
    #[default]
    NewtonPerPoint,
    /// Truncated reversion of the power series of Q about the anchor.
    SeriesReversion,
}

/// Amplitude weighting of the transported state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FlowWeighting {
    /// φ₀(X), then renormalized.
    #[default]
    Transport,
    /// φ₀(X)·√(X'), the unitary form of the symmetrized generator.
    HalfDensity,
}

/// Flow amplitude a = e·β·Ω·t_int/(2c) matching the d_Ω normalization.
pub fn flow_amplitude(mode: &ModeParams, t_int: f64) -> f64 {
    ELECTRON_CHARGE * mode.beta * mode.omega * t_int / (2.0 * mode.c)
}

const ROUND_TRIP_TOL: f64 = 1e-10;
const REVERSION_ORDER: usize = 24;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowMap {
    pub f: FomegaModel,
    pub a: f64,
    pub domain: (f64, f64),
    /// Point where Q vanishes.
    pub anchor: f64,
    pub q_series: ChebSeries,
    pub inverse_method: InverseMethod,
    /// Power series of Q⁻¹ about the anchor (series reversion only).
    pub reversion: Option<Vec<f64>>,
    /// Largest |Q⁻¹(Q(q)) − q| found on the self-test points.
    pub round_trip_error: f64,
}

impl FlowMap {
    pub fn q(&self, q: f64) -> f64 {
        self.q_series.eval(q)
    }

    fn increasing(&self) -> bool {
        self.f.eval(self.anchor) > 0.0
    }

    /// Q⁻¹(y), or `None` when the preimage leaves the domain.
    pub fn q_inverse(&self, y: f64, guess: f64) -> Option<f64> {
        let (lo, hi) = self.domain;
        let (qlo, qhi) = (self.q(lo), self.q(hi));
        let (ymin, ymax) = if qlo < qhi { (qlo, qhi) } else { (qhi, qlo) };
        let slack = 1e-13 * (ymax - ymin).abs().max(1.0);
        if y < ymin - slack || y > ymax + slack {
            return None;
        }
        match self.inverse_method {
            InverseMethod::SeriesReversion => {
                let b = self.reversion.as_ref()?;
                let u = y;
                let mut x = 0.0;
                for c in b.iter().rev() {
                    x = x * u + c;
                }
                Some(self.anchor + x)
            }
            InverseMethod::NewtonPerPoint => Some(self.newton(y, guess)),
        }
    }

    fn newton(&self, y: f64, guess: f64) -> f64 {
        let (mut lo, mut hi) = self.domain;
        let inc = self.increasing();
        let mut x = guess.clamp(lo, hi);
        for _ in 0..100 {
            let r = self.q(x) - y;
            // keep a bracket on the monotone Q
            if (r < 0.0) == inc {
                lo = x;
            } else {
                hi = x;
            }
            let step = r * self.f.eval(x);
            let mut nx = x - step;
            if !(nx > lo && nx < hi) {
                nx = 0.5 * (lo + hi);
            }
            if (nx - x).abs() <= 1e-15 * x.abs().max(1.0) {
                return nx;
            }
            x = nx;
            if hi - lo < 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        x
    }

    /// X(q) = Q⁻¹(Q(q) + a).
    pub fn image(&self, q: f64) -> Option<f64> {
        let (lo, hi) = self.domain;
        if q < lo || q > hi {
            return None;
        }
        let guess = characteristic(&self.f, q, self.a, 8);
        self.q_inverse(self.q(q) + self.a, guess)
    }
}

/// Integrate dq/ds = f(q) from `q` over `a` with `steps` RK4 steps.
pub fn characteristic(f: &FomegaModel, q: f64, a: f64, steps: usize) -> f64 {
    let h = a / steps as f64;
    let mut x = q;
    for _ in 0..steps {
        let k1 = f.eval(x);
        let k2 = f.eval(x + 0.5 * h * k1);
        let k3 = f.eval(x + 0.5 * h * k2);
        let k4 = f.eval(x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    x
}

/// Build the map for flow amplitude `a` on `domain` (defaults to the fit support).
pub fn build_flow_map(profile: &ResonantProfile, a: f64, domain: Option<(f64, f64)>, method: InverseMethod) -> Result<FlowMap> {
    let fit = profile
        .fit
        .as_ref()
        .ok_or_else(|| Error::Parameter("flow map needs a fitted f_Ω".into()))?;
    let domain = domain.unwrap_or(fit.support);
    build_from_model(&fit.model, a, domain, method)
}

pub fn build_from_model(f: &FomegaModel, a: f64, domain: (f64, f64), method: InverseMethod) -> Result<FlowMap> {
    let (lo, hi) = domain;
    if !(hi > lo) {
        return Err(Error::Parameter(format!("empty flow domain [{lo}, {hi}]")));
    }
    response::check_nonvanishing(f, domain)?;
    let anchor = if lo <= 0.0 && 0.0 <= hi { 0.0 } else { 0.5 * (lo + hi) };
    let recip = ChebSeries::adaptive(|q| 1.0 / f.eval(q), lo, hi, 1e-15, 1 << 14)?;
    let q_series = recip.integral(anchor);
    let reversion = match method {
        InverseMethod::NewtonPerPoint => None,
        InverseMethod::SeriesReversion => {
            let coeffs = match f {
                FomegaModel::Polynomial(p) => shifted(&p.coeffs, anchor),
                FomegaModel::Rational(_) => {
                    return Err(Error::Parameter("series reversion needs a polynomial f_Ω".into()))
                }
            };
            let r = poly::reciprocal_series(&coeffs, REVERSION_ORDER)?;
            let mut qs = vec![0.0; REVERSION_ORDER + 1];
            for k in 0..REVERSION_ORDER {
                qs[k + 1] = r[k] / (k + 1) as f64;
            }
            Some(poly::reverse_series(&qs, REVERSION_ORDER)?)
        }
    };
    let mut map = FlowMap {
        f: f.clone(),
        a,
        domain,
        anchor,
        q_series,
        inverse_method: method,
        reversion,
        round_trip_error: 0.0,
    };
    let mut worst: f64 = 0.0;
    for i in 0..=200 {
        let q = lo + (hi - lo) * i as f64 / 200.0;
        let back = map.q_inverse(map.q(q), q).unwrap_or(f64::INFINITY);
        worst = worst.max((back - q).abs());
    }
    map.round_trip_error = worst;
    if !(worst <= ROUND_TRIP_TOL) {
        return Err(Error::Domain(format!(
            "Q⁻¹∘Q round trip error {worst:.2e} exceeds {ROUND_TRIP_TOL:e} ({method:?})"
        )));
    }
    Ok(map)
}

/// Coefficients of p(anchor + u) in powers of u.
fn shifted(c: &[f64], anchor: f64) -> Vec<f64> {
    let n = c.len();
    let mut out = vec![0.0; n];
    for (k, &ck) in c.iter().enumerate() {
        let mut binom = 1.0;
        for j in 0..=k {
            out[j] += ck * binom * anchor.powi((k - j) as i32);
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct FlowOutput {
    pub state: LightState,
    /// Factor applied to restore unit norm.
    pub renormalization: f64,
    /// Probability of φ₀ whose image falls outside the grid or domain.
    pub lost_mass: f64,
}

/// Mass of φ₀ allowed to be mapped off the grid.
pub const MAX_LOST_MASS: f64 = 1e-8;

pub fn apply_flow(state: &LightState, map: &FlowMap, weighting: FlowWeighting) -> Result<FlowOutput> {
    let grid = state.grid;
    let qs = grid.points();
    let dq = grid.spacing();
    let mut out = Vec::with_capacity(qs.len());
    let mut covered: Option<(f64, f64)> = None;
    for &q in &qs {
        let value = match map.image(q) {
            Some(x) => {
                covered = Some(match covered {
                    None => (x, x),
                    Some((a, b)) => (a.min(x), b.max(x)),
                });
                let v = interp::interpolate(&grid, &state.amplitudes, x);
                match weighting {
                    FlowWeighting::Transport => v,
                    FlowWeighting::HalfDensity => v * (map.f.eval(x) / map.f.eval(q)).sqrt(),
                }
            }
            None => num_complex::Complex64::new(0.0, 0.0),
        };
        out.push(value);
    }
    // φ₀ mass outside the set of source points reached from the grid
    let (a, b) = covered.unwrap_or((f64::INFINITY, f64::NEG_INFINITY));
    let lost_mass: f64 = qs
        .iter()
        .zip(&state.amplitudes)
        .filter(|(q, _)| **q < a - 0.5 * dq || **q > b + 0.5 * dq)
        .map(|(_, z)| z.norm_sqr())
        .sum::<f64>()
        * dq;
    if lost_mass > MAX_LOST_MASS {
        return Err(Error::Domain(format!(
            "flow moves probability {lost_mass:.2e} across the grid or domain boundary"
        )));
    }
    let mut s = LightState::new(grid, out)?;
    let renormalization = s.normalize()?;
    Ok(FlowOutput {
        state: s,
        renormalization,
        lost_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::QuadratureGrid;
    use crate::light::state::gaussian_state;
    use crate::poly::Polynomial;

    fn model(c: Vec<f64>) -> FomegaModel {
        FomegaModel::Polynomial(Polynomial::new(c))
    }

    #[test]
    fn constant_flow_translates() {
        let g = QuadratureGrid::symmetric(12.0, 256).unwrap();
        let s = gaussian_state(&g, 0.0, 0.0, 0.5).unwrap();
        let map = build_from_model(&model(vec![1.0]), 2.0, (-12.0, 12.0), InverseMethod::NewtonPerPoint).unwrap();
        for q in [-3.0, 0.0, 1.7] {
            assert!((map.image(q).unwrap() - (q + 2.0)).abs() < 1e-12);
        }
        let out = apply_flow(&s, &map, FlowWeighting::Transport).unwrap();
        let m = out.state.moments();
        assert!((m.mean_q + 2.0).abs() < 1e-9);
        assert!((m.var_q - 0.5).abs() < 1e-8);
    }

    #[test]
    fn affine_flow_is_analytic() {
        let (c0, c1, a) = (1.0, 0.1, 1.0);
        let map = build_from_model(&model(vec![c0, c1]), a, (-8.0, 8.0), InverseMethod::NewtonPerPoint).unwrap();
        for q in [-2.0, 0.0, 0.5, 3.0] {
            let q_exact = (1.0 / c1) * (1.0 + c1 * q / c0).ln();
            assert!((map.q(q) - q_exact).abs() < 1e-12);
            let x = (q + c0 / c1) * (c1 * a).exp() - c0 / c1;
            assert!((map.image(q).unwrap() - x).abs() < 1e-11);
        }
    }

    #[test]
    fn zero_amplitude_is_identity() {
        let g = QuadratureGrid::symmetric(10.0, 128).unwrap();
        let s = gaussian_state(&g, 0.5, 0.3, 0.7).unwrap();
        let map = build_from_model(&model(vec![0.8, 0.1, 0.02]), 0.0, (-10.0, 10.0), InverseMethod::NewtonPerPoint).unwrap();
        let out = apply_flow(&s, &map, FlowWeighting::Transport).unwrap();
        let err = out
            .state
            .amplitudes
            .iter()
            .zip(&s.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn series_reversion_round_trip() {
        let map = build_from_model(&model(vec![1.0, 0.05, -0.01]), 0.3, (-1.5, 1.5), InverseMethod::SeriesReversion).unwrap();
        assert!(map.round_trip_error < 1e-10);
        let far = build_from_model(&model(vec![1.0, 0.3, 0.05]), 0.3, (-8.0, 8.0), InverseMethod::SeriesReversion);
        assert!(far.is_err());
    }

    #[test]
    fn zero_crossing_is_singular() {
        let r = build_from_model(&model(vec![0.5, 1.0]), 1.0, (-4.0, 4.0), InverseMethod::NewtonPerPoint);
        match r {
            Err(Error::SingularFlow { location }) => assert!((location + 0.5).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }
}
