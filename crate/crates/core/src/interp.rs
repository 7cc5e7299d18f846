//! Interpolation on uniform grids (local barycentric Lagrange) and natural
//! cubic splines on arbitrary abscissae.

use num_complex::Complex64 as C64;

use crate::grid::UniformGrid;

/// Stencil width of the local Lagrange interpolant (degree = width - 1).
pub const STENCIL: usize = 10;

/// Barycentric weights of one evaluation point on a uniform grid.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    pub start: usize,
    pub weights: [f64; STENCIL],
}

/// Weights for evaluating at `x`; `None` when `x` is outside the grid.
pub fn stencil(grid: &UniformGrid, x: f64) -> Option<Stencil> {
    let n = grid.n_points;
    let d = grid.spacing();
    let u = (x - grid.min) / d;
    if !(u >= -1e-9 && u <= (n - 1) as f64 + 1e-9) {
        return None;
    }
    let m = STENCIL.min(n);
    let base = u.floor() as isize - (m as isize / 2 - 1);
    let start = base.clamp(0, (n - m) as isize) as usize;
    let mut weights = [0.0; STENCIL];
    let local = u - start as f64;
    // exact node hit
    for j in 0..m {
        if (local - j as f64).abs() < 1e-13 {
            weights[j] = 1.0;
            return Some(Stencil { start, weights });
        }
    }
    let mut sum = 0.0;
    let mut binom = 1.0;
    for j in 0..m {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign * binom / (local - j as f64);
        weights[j] = w;
        sum += w;
        binom = binom * (m - 1 - j) as f64 / (j + 1) as f64;
    }
    weights.iter_mut().take(m).for_each(|w| *w /= sum);
    Some(Stencil { start, weights })
}

impl Stencil {
    pub fn apply(&self, values: &[C64]) -> C64 {
        self.weights
            .iter()
            .zip(&values[self.start..])
            .map(|(&w, &v)| v * w)
            .sum()
    }

    pub fn apply_real(&self, values: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&values[self.start..])
            .map(|(&w, &v)| v * w)
            .sum()
    }
}

/// Interpolate complex samples at `x`; zero outside the grid.
pub fn interpolate(grid: &UniformGrid, values: &[C64], x: f64) -> C64 {
    stencil(grid, x).map_or(C64::new(0.0, 0.0), |s| s.apply(values))
}

/// Natural cubic spline through `(xs, ys)` with strictly increasing `xs`.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(xs: &[f64], ys: &[f64]) -> Self {
        assert_eq!(xs.len(), ys.len());
        let n = xs.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // tridiagonal solve for second derivatives
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                let a = h0 / 6.0;
                let b = (h0 + h1) / 3.0;
                let cc = h1 / 6.0;
                let rhs = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
                let denom = b - a * c[i - 1];
                c[i] = cc / denom;
                d[i] = (rhs - a * d[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                m[i] = d[i] - c[i] * m[i + 1];
            }
        }
        Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            m,
        }
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Value and first derivative at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        if self.xs.len() == 1 {
            return (self.ys[0], 0.0);
        }
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let y = a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let dy = (self.ys[i + 1] - self.ys[i]) / h
            - (3.0 * a * a - 1.0) * h * m0 / 6.0
            + (3.0 * b * b - 1.0) * h * m1 / 6.0;
        (y, dy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange_reproduces_gaussian() {
        let g = UniformGrid::symmetric(10.0, 256).unwrap();
        let f: Vec<C64> = g.points().iter().map(|&x| C64::from((-x * x / 2.0).exp())).collect();
        for k in 0..200 {
            let x = -6.0 + 0.0613 * k as f64;
            let v = interpolate(&g, &f, x);
            assert!((v.re - (-x * x / 2.0).exp()).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn lagrange_exact_on_nodes_and_zero_outside() {
        let g = UniformGrid::symmetric(1.0, 16).unwrap();
        let f: Vec<C64> = (0..16).map(|i| C64::new(i as f64, -(i as f64))).collect();
        for i in 0..16 {
            assert_eq!(interpolate(&g, &f, g.point(i)), f[i]);
        }
        assert_eq!(interpolate(&g, &f, 1.5), C64::new(0.0, 0.0));
    }

    #[test]
    fn spline_is_exact_for_lines() {
        let xs = [0.0, 0.5, 1.7, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let s = CubicSpline::new(&xs, &ys);
        for x in [0.1, 1.0, 2.9] {
            let (y, dy) = s.eval(x);
            assert!((y - (2.0 * x - 1.0)).abs() < 1e-12);
            assert!((dy - 2.0).abs() < 1e-12);
        }
    }
}
