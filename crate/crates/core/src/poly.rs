//! Polynomials, least-squares fitting in a Chebyshev-scaled basis, power-series
//! reversion and Chebyshev expansions of smooth functions.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest tolerated condition number of a scaled design matrix.
pub const MAX_CONDITION: f64 = 1e12;

/// Monomial-basis polynomial, `coeffs[k]` multiplies `x^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Value and derivative by a single Horner pass.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in self.coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::constant(0.0);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> Self {
        let mut out = vec![0.0];
        out.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c / (k + 1) as f64),
        );
        Self::new(out)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Keep terms up to and including `x^order`.
    pub fn truncate(&self, order: usize) -> Self {
        Self::new(self.coeffs.iter().take(order + 1).copied().collect())
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    fn add_scaled(&mut self, other: &Self, s: f64) {
        if other.coeffs.len() > self.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), 0.0);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }
}

/// Chebyshev polynomials T_0..T_order evaluated at `u`.
fn chebyshev_row(u: f64, order: usize) -> Vec<f64> {
    let mut t = vec![1.0; order + 1];
    if order >= 1 {
        t[1] = u;
    }
    for k in 2..=order {
        t[k] = 2.0 * u * t[k - 1] - t[k - 2];
    }
    t
}

/// Monomial coefficients (in x) of T_k((x - center)/half) for k = 0..=order.
fn chebyshev_to_monomial(order: usize, center: f64, half: f64) -> Vec<Polynomial> {
    // u = (x - center)/half as a polynomial in x
    let u = Polynomial::new(vec![-center / half, 1.0 / half]);
    let mut out = vec![Polynomial::constant(1.0)];
    if order >= 1 {
        out.push(u.clone());
    }
    for k in 2..=order {
        let mut next = u.mul(&out[k - 1]).scale(2.0);
        next.add_scaled(&out[k - 2], -1.0);
        out.push(next);
    }
    out
}

/// Linear least-squares polynomial fit sharing one design matrix across many
/// right-hand sides.
#[derive(Debug, Clone)]
pub struct PolyLeastSquares {
    order: usize,
    xs: Vec<f64>,
    pinv: DMatrix<f64>,
    basis: Vec<Polynomial>,
    pub condition: f64,
}

impl PolyLeastSquares {
    pub fn new(xs: &[f64], order: usize) -> Result<Self> {
        if xs.len() < order + 1 {
            return Err(Error::Parameter(format!(
                "{} samples cannot determine a degree-{order} polynomial",
                xs.len()
            )));
        }
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let center = 0.5 * (lo + hi);
        let half = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };
        let m = xs.len();
        let mut a = DMatrix::<f64>::zeros(m, order + 1);
        for (i, &x) in xs.iter().enumerate() {
            let row = chebyshev_row((x - center) / half, order);
            for (j, t) in row.into_iter().enumerate() {
                a[(i, j)] = t;
            }
        }
        let svd = a.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if condition > MAX_CONDITION {
            return Err(Error::IllConditioned { condition });
        }
        let pinv = svd
            .pseudo_inverse(0.0)
            .map_err(|e| Error::Parameter(e.to_string()))?;
        Ok(Self {
            order,
            xs: xs.to_vec(),
            pinv,
            basis: chebyshev_to_monomial(order, center, half),
            condition,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Chebyshev-basis coefficients for one set of samples.
    pub fn solve_chebyshev(&self, ys: &[f64]) -> Vec<f64> {
        let y = DVector::from_column_slice(ys);
        (&self.pinv * y).iter().copied().collect()
    }

    /// Fitted monomial polynomial plus (rms, max) residuals.
    pub fn fit(&self, ys: &[f64]) -> (Polynomial, f64, f64) {
        let cheb = self.solve_chebyshev(ys);
        let mut poly = Polynomial::new(vec![0.0; self.order + 1]);
        for (c, b) in cheb.iter().zip(&self.basis) {
            poly.add_scaled(b, *c);
        }
        let (rms, max) = residuals(&self.xs, ys, |x| poly.eval(x));
        (poly, rms, max)
    }
}

/// Root-mean-square and maximum absolute residual of a model over samples.
pub fn residuals(xs: &[f64], ys: &[f64], model: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut sq = 0.0;
    let mut max: f64 = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let r = (model(x) - y).abs();
        sq += r * r;
        max = max.max(r);
    }
    ((sq / xs.len().max(1) as f64).sqrt(), max)
}

/// Ratio of polynomials `num / den`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rational {
    pub num: Polynomial,
    pub den: Polynomial,
}

impl Rational {
    pub fn eval(&self, x: f64) -> f64 {
        self.num.eval(x) / self.den.eval(x)
    }

    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let (p, dp) = self.num.eval_with_derivative(x);
        let (q, dq) = self.den.eval_with_derivative(x);
        (p / q, (dp * q - p * dq) / (q * q))
    }
}

/// Linearized least-squares rational fit `p(x)/r(x)` with `r(0) = 1`
/// (degrees `num_order`, `den_order`).
pub fn fit_rational(xs: &[f64], ys: &[f64], num_order: usize, den_order: usize) -> Result<Rational> {
    let unknowns = num_order + 1 + den_order;
    if xs.len() < unknowns {
        return Err(Error::Parameter(format!(
            "{} samples cannot determine a [{num_order}/{den_order}] rational",
            xs.len()
        )));
    }
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    let m = xs.len();
    let mut a = DMatrix::<f64>::zeros(m, unknowns);
    let mut b = DVector::<f64>::zeros(m);
    for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        let u = x / scale;
        let mut up = 1.0;
        for j in 0..=num_order {
            a[(i, j)] = up;
            up *= u;
        }
        let mut up = u;
        for j in 0..den_order {
            a[(i, num_order + 1 + j)] = -y * up;
            up *= u;
        }
        b[i] = y;
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::IllConditioned { condition });
    }
    let sol = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::Parameter(e.to_string()))?;
    let unscale = |c: f64, k: usize| c / scale.powi(k as i32);
    let num = Polynomial::new((0..=num_order).map(|k| unscale(sol[k], k)).collect());
    let mut den = vec![1.0];
    den.extend((0..den_order).map(|k| unscale(sol[num_order + 1 + k], k + 1)));
    Ok(Rational {
        num,
        den: Polynomial::new(den),
    })
}

/// Power series of `1/f` up to `x^order`; requires `f(0) != 0`.
pub fn reciprocal_series(f: &[f64], order: usize) -> Result<Vec<f64>> {
    let f0 = *f.first().unwrap_or(&0.0);
    if f0 == 0.0 {
        return Err(Error::Parameter("reciprocal series needs f(0) != 0".into()));
    }
    let mut r = vec![0.0; order + 1];
    r[0] = 1.0 / f0;
    for n in 1..=order {
        let s: f64 = (1..=n.min(f.len() - 1)).map(|j| f[j] * r[n - j]).sum();
        r[n] = -s / f0;
    }
    Ok(r)
}

/// Reverse `y = Σ_{k≥1} a_k x^k` into `x = Σ_{k≥1} b_k y^k` up to `y^order`.
/// `a[0]` must be zero and `a[1]` nonzero.
pub fn reverse_series(a: &[f64], order: usize) -> Result<Vec<f64>> {
    if a.len() < 2 || a[1] == 0.0 {
        return Err(Error::Parameter("series reversion needs a nonzero linear term".into()));
    }
    let coeff = |k: usize| a.get(k).copied().unwrap_or(0.0);
    let mut b = vec![0.0; order + 1];
    b[1] = 1.0 / a[1];
    for n in 2..=order {
        // [y^n] Σ_{k≥2} a_k B^k with B truncated at y^{n-1}
        let mut power = b[..n].to_vec();
        power.resize(n + 1, 0.0);
        let mut acc = 0.0;
        for k in 2..=n {
            power = truncated_product(&power, &b[..n], n);
            acc += coeff(k) * power[n];
        }
        b[n] = -acc / a[1];
    }
    Ok(b)
}

fn truncated_product(p: &[f64], q: &[f64], order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    for (i, a) in p.iter().enumerate().take(order + 1) {
        if *a == 0.0 {
            continue;
        }
        for (j, b) in q.iter().enumerate() {
            if i + j > order {
                break;
            }
            out[i + j] += a * b;
        }
    }
    out
}

/// Chebyshev expansion of a smooth function on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebSeries {
    pub lo: f64,
    pub hi: f64,
    pub coeffs: Vec<f64>,
}

impl ChebSeries {
    /// Interpolate `f` at `n` Chebyshev points of the first kind.
    pub fn interpolate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Self {
        use std::f64::consts::PI;
        let vals: Vec<f64> = (0..n)
            .map(|j| {
                let th = PI * (j as f64 + 0.5) / n as f64;
                f(0.5 * (lo + hi) + 0.5 * (hi - lo) * th.cos())
            })
            .collect();
        let coeffs = (0..n)
            .map(|k| {
                let s: f64 = vals
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * (PI * k as f64 * (j as f64 + 0.5) / n as f64).cos())
                    .sum();
                let c = 2.0 * s / n as f64;
                if k == 0 {
                    0.5 * c
                } else {
                    c
                }
            })
            .collect();
        Self { lo, hi, coeffs }
    }

    /// Interpolate with doubling until the trailing coefficients drop below
    /// `tol` relative to the largest one.
    pub fn adaptive(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64, max_n: usize) -> Result<Self> {
        // Interpolation coefficients carry rounding noise of order eps * n.
        let tol = tol.max(100.0 * f64::EPSILON);
        let mut n = 32;
        loop {
            let s = Self::interpolate(&f, lo, hi, n);
            let scale = s.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            let tail = s.coeffs[n - 4..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
            if tail <= tol * scale {
                return Ok(s.trimmed(tol * scale));
            }
            if n >= max_n {
                return Err(Error::Resolution(format!(
                    "Chebyshev expansion did not resolve to {tol:e} with {n} terms (tail {:.2e})",
                    tail / scale
                )));
            }
            n *= 2;
        }
    }

    fn trimmed(mut self, tol: f64) -> Self {
        while self.coeffs.len() > 1 && self.coeffs.last().map_or(false, |c| c.abs() < 0.01 * tol) {
            self.coeffs.pop();
        }
        self
    }

    fn to_unit(&self, x: f64) -> f64 {
        (2.0 * x - self.lo - self.hi) / (self.hi - self.lo)
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let u = self.to_unit(x);
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * u * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        u * b1 - b2 + self.coeffs[0]
    }

    /// Antiderivative, fixed so that it vanishes at `x0`.
    pub fn integral(&self, x0: f64) -> Self {
        let n = self.coeffs.len();
        let c = &self.coeffs;
        let get = |k: usize| c.get(k).copied().unwrap_or(0.0);
        let half = 0.5 * (self.hi - self.lo);
        let mut out = vec![0.0; n + 1];
        for k in 1..=n {
            let prev = if k == 1 { 2.0 * get(0) } else { get(k - 1) };
            out[k] = half * (prev - get(k + 1)) / (2 * k) as f64;
        }
        let mut s = Self {
            lo: self.lo,
            hi: self.hi,
            coeffs: out,
        };
        let shift = s.eval(x0);
        s.coeffs[0] -= shift;
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_polynomial_recovery() {
        let xs: Vec<f64> = (0..9).map(|i| -4.0 + i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|q| 0.2 + 0.05 * q * q).collect();
        let (p, rms, _) = PolyLeastSquares::new(&xs, 2).unwrap().fit(&ys);
        assert!((p.coeffs[0] - 0.2).abs() < 1e-12);
        assert!(p.coeffs[1].abs() < 1e-12);
        assert!((p.coeffs[2] - 0.05).abs() < 1e-12);
        assert!(rms < 1e-13);
    }

    #[test]
    fn degenerate_sampling_is_ill_conditioned() {
        let xs = vec![1.0, 1.0, 1.0, 2.0];
        assert!(matches!(
            PolyLeastSquares::new(&xs, 2),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn reversion_of_exponential_series_is_log() {
        // y = e^x - 1 => x = ln(1 + y) = y - y²/2 + y³/3 - …
        let mut a = vec![0.0];
        let mut fact = 1.0;
        for k in 1..12 {
            fact *= k as f64;
            a.push(1.0 / fact);
        }
        let b = reverse_series(&a, 10).unwrap();
        for k in 1..=10 {
            let expected = if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            assert!((b[k] - expected).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn reciprocal_of_geometric() {
        let r = reciprocal_series(&[1.0, -1.0], 6).unwrap();
        assert!(r.iter().all(|c| (c - 1.0).abs() < 1e-15));
    }

    #[test]
    fn chebyshev_integral_of_cos() {
        let s = ChebSeries::adaptive(|x: f64| x.cos(), -3.0, 5.0, 1e-15, 1024).unwrap();
        let i = s.integral(0.0);
        for x in [-2.9, -1.0, 0.0, 0.3, 4.9] {
            assert!((i.eval(x) - x.sin()).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn rational_fit_recovers_pade() {
        let xs: Vec<f64> = (0..15).map(|i| -2.0 + 0.25 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (1.0 + 0.5 * x) / (1.0 + 0.1 * x * x)).collect();
        let r = fit_rational(&xs, &ys, 1, 2).unwrap();
        for x in [-1.7, 0.2, 1.3] {
            assert!((r.eval(x) - (1.0 + 0.5 * x) / (1.0 + 0.1 * x * x)).abs() < 1e-10);
        }
    }
}
