//! Uniform time grids, finite differences, quadrature and interpolation of
//! sampled matrix paths.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMat;

/// `n + 1` equally spaced samples on `[start, end]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(start: f64, end: f64, n: usize) -> Result<Self> {
        if n == 0 || !(end > start) || !start.is_finite() || !end.is_finite() {
            return Err(Error::domain(format!(
                "grid needs n >= 1 and start < end (got n={n}, [{start}, {end}])"
            )));
        }
        Ok(Grid { start, end, n })
    }

    pub fn unit(n: usize) -> Self {
        Grid { start: 0.0, end: 1.0, n }
    }

    pub fn dt(&self) -> f64 {
        (self.end - self.start) / self.n as f64
    }

    pub fn t(&self, j: usize) -> f64 {
        if j == self.n {
            self.end
        } else {
            self.start + j as f64 * self.dt()
        }
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.t(j)).collect()
    }

    pub fn matches(&self, other: &Grid) -> bool {
        self.n == other.n
            && (self.start - other.start).abs() <= 1e-14
            && (self.end - other.end).abs() <= 1e-14
    }

    /// Index of the sample closest to `t`.
    pub fn nearest(&self, t: f64) -> usize {
        let x = ((t - self.start) / self.dt()).round();
        x.clamp(0.0, self.n as f64) as usize
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn combo(terms: &[(f64, &CMat)]) -> CMat {
    let mut out = terms[0].1 * re(terms[0].0);
    for (w, m) in &terms[1..] {
        out += *m * re(*w);
    }
    out
}

/// Second-order derivative: centered in the interior, one-sided
/// second-order at both endpoints. Needs at least three samples.
pub fn derivative(f: &[CMat], dt: f64) -> Vec<CMat> {
    let n = f.len() - 1;
    assert!(n >= 2, "derivative needs at least three samples");
    let h = 1.0 / (2.0 * dt);
    let mut out = Vec::with_capacity(n + 1);
    out.push(combo(&[(-3.0 * h, &f[0]), (4.0 * h, &f[1]), (-h, &f[2])]));
    for j in 1..n {
        out.push(combo(&[(h, &f[j + 1]), (-h, &f[j - 1])]));
    }
    out.push(combo(&[(3.0 * h, &f[n]), (-4.0 * h, &f[n - 1]), (h, &f[n - 2])]));
    out
}

/// Fourth-order derivative with one-sided stencils near the ends.
/// Needs at least five samples.
pub fn derivative4(f: &[CMat], dt: f64) -> Vec<CMat> {
    let n = f.len() - 1;
    assert!(n >= 4, "derivative4 needs at least five samples");
    let h = 1.0 / (12.0 * dt);
    let fwd0 = [-25.0, 48.0, -36.0, 16.0, -3.0];
    let fwd1 = [-3.0, -10.0, 18.0, -6.0, 1.0];
    let mut out = Vec::with_capacity(n + 1);
    let stencil = |w: &[f64; 5], idx: [usize; 5], sign: f64| {
        let terms: Vec<(f64, &CMat)> = (0..5).map(|m| (sign * h * w[m], &f[idx[m]])).collect();
        combo(&terms)
    };
    out.push(stencil(&fwd0, [0, 1, 2, 3, 4], 1.0));
    out.push(stencil(&fwd1, [0, 1, 2, 3, 4], 1.0));
    for j in 2..n - 1 {
        out.push(combo(&[
            (h, &f[j - 2]),
            (-8.0 * h, &f[j - 1]),
            (8.0 * h, &f[j + 1]),
            (-h, &f[j + 2]),
        ]));
    }
    out.push(stencil(&fwd1, [n, n - 1, n - 2, n - 3, n - 4], -1.0));
    out.push(stencil(&fwd0, [n, n - 1, n - 2, n - 3, n - 4], -1.0));
    out
}

/// First-derivative weights at `x0` for nodes `xs` (Fornberg's recursion).
pub fn fd_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    let m = xs.len();
    // c[j][d]: weight of node j for derivative order d ∈ {0, 1}.
    let mut c = vec![[0.0f64; 2]; m];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    for i in 1..m {
        let mut c2 = 1.0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                let d1 = c[i - 1][1];
                let d0 = c[i - 1][0];
                c[i][1] = c1 * (d0 - (xs[i - 1] - x0) * d1) / c2;
                c[i][0] = -c1 * (xs[i - 1] - x0) * d0 / c2;
            }
            c[j][1] = ((xs[i] - x0) * c[j][1] - c[j][0]) / c3;
            c[j][0] = (xs[i] - x0) * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

/// Sixth-order derivative: seven-point stencils, one-sided near the ends.
/// Needs at least seven samples.
pub fn derivative6(f: &[CMat], dt: f64) -> Vec<CMat> {
    let n = f.len() - 1;
    assert!(n >= 6, "derivative6 needs at least seven samples");
    let nodes: Vec<f64> = (0..7).map(|m| m as f64).collect();
    let ends: Vec<Vec<f64>> = (0..3).map(|j| fd_weights(j as f64, &nodes)).collect();
    let centre = fd_weights(3.0, &nodes);
    let apply = |w: &[f64], idx: &dyn Fn(usize) -> usize, sign: f64| {
        let terms: Vec<(f64, &CMat)> = (0..7).map(|m| (sign * w[m] / dt, &f[idx(m)])).collect();
        combo(&terms)
    };
    (0..=n)
        .map(|j| {
            if j < 3 {
                apply(&ends[j], &|m| m, 1.0)
            } else if j > n - 3 {
                apply(&ends[n - j], &|m| n - m, -1.0)
            } else {
                apply(&centre, &|m| j + m - 3, 1.0)
            }
        })
        .collect()
}

/// Real second derivative: centered interior, one-sided second-order ends.
pub fn second_derivative(f: &[f64], dt: f64) -> Vec<f64> {
    let n = f.len() - 1;
    assert!(n >= 3, "second derivative needs at least four samples");
    let h2 = dt * dt;
    let mut out = Vec::with_capacity(n + 1);
    out.push((2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2);
    for j in 1..n {
        out.push((f[j + 1] - 2.0 * f[j] + f[j - 1]) / h2);
    }
    out.push((2.0 * f[n] - 5.0 * f[n - 1] + 4.0 * f[n - 2] - f[n - 3]) / h2);
    out
}

/// Real first derivative with the same stencils as [`derivative`].
pub fn derivative_real(f: &[f64], dt: f64) -> Vec<f64> {
    let n = f.len() - 1;
    assert!(n >= 2);
    let h = 1.0 / (2.0 * dt);
    let mut out = Vec::with_capacity(n + 1);
    out.push(h * (-3.0 * f[0] + 4.0 * f[1] - f[2]));
    for j in 1..n {
        out.push(h * (f[j + 1] - f[j - 1]));
    }
    out.push(h * (3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]));
    out
}

pub fn trapezoid(f: &[f64], dt: f64) -> f64 {
    let n = f.len() - 1;
    if n == 0 {
        return 0.0;
    }
    dt * (0.5 * f[0] + f[1..n].iter().sum::<f64>() + 0.5 * f[n])
}

/// Trapezoid weights `w_j` with `∫ f ≈ dt Σ w_j f_j`.
pub fn trapezoid_weight(j: usize, n: usize) -> f64 {
    if j == 0 || j == n {
        0.5
    } else {
        1.0
    }
}

/// Cubic (four-point) estimate of the value halfway between samples
/// `j` and `j + 1`.
pub fn midpoint_cubic(f: &[CMat], j: usize) -> CMat {
    let n = f.len() - 1;
    if n < 3 {
        return combo(&[(0.5, &f[j]), (0.5, &f[j + 1])]);
    }
    let s = 1.0 / 16.0;
    if j == 0 {
        combo(&[(5.0 * s, &f[0]), (15.0 * s, &f[1]), (-5.0 * s, &f[2]), (s, &f[3])])
    } else if j + 1 == n {
        combo(&[(s, &f[n - 3]), (-5.0 * s, &f[n - 2]), (15.0 * s, &f[n - 1]), (5.0 * s, &f[n])])
    } else {
        combo(&[(-s, &f[j - 1]), (9.0 * s, &f[j]), (9.0 * s, &f[j + 1]), (-s, &f[j + 2])])
    }
}

/// Hermite midpoint value from samples and derivatives at both ends.
pub fn midpoint_hermite(f0: &CMat, f1: &CMat, d0: &CMat, d1: &CMat, dt: f64) -> CMat {
    combo(&[(0.5, f0), (0.5, f1), (dt / 8.0, d0), (-dt / 8.0, d1)])
}

/// Piecewise-linear interpolation of a sampled path at time `t`.
pub fn interp_linear(f: &[CMat], grid: &Grid, t: f64) -> CMat {
    let x = ((t - grid.start) / grid.dt()).clamp(0.0, grid.n as f64);
    let j = (x.floor() as usize).min(grid.n - 1);
    let s = x - j as f64;
    combo(&[(1.0 - s, &f[j]), (s, &f[j + 1])])
}

/// Four-point Lagrange interpolation of a sampled path at time `t`.
pub fn interp_cubic(f: &[CMat], grid: &Grid, t: f64) -> CMat {
    let n = grid.n;
    if n < 3 {
        return interp_linear(f, grid, t);
    }
    let x = ((t - grid.start) / grid.dt()).clamp(0.0, n as f64);
    let base = (x.floor() as isize - 1).clamp(0, n as isize - 3) as usize;
    let nodes = [base, base + 1, base + 2, base + 3];
    let mut terms = Vec::with_capacity(4);
    for (a, &ja) in nodes.iter().enumerate() {
        let mut w = 1.0;
        for (b, &jb) in nodes.iter().enumerate() {
            if a != b {
                w *= (x - jb as f64) / (ja as f64 - jb as f64);
            }
        }
        terms.push((w, &f[ja]));
    }
    combo(&terms)
}
