//! The decoupled system in the variables `α = ½(X₀ + iX₁)`,
//! `βᵢ = ½(X₂ᵢ + iX₂ᵢ₊₁)`: complex rows `βᵢ′ + 2[α, βᵢ] = 0`,
//! `[βᵢ, βⱼ] = 0`, the real row
//! `F̂ = (α + α*)′ + 2([α, α*] + Σ [βᵢ, βᵢ*]) = 0`, and the Kempf–Ness
//! boundary-value solve for `h = g*g` that makes `g·P` satisfy `F̂ = 0`.
//!
//! Complex gauge transformations act by `α ↦ gαg⁻¹ − ½g′g⁻¹`,
//! `βᵢ ↦ gβᵢg⁻¹`.
//!
//! # Discrete functional
//!
//! The unknown `h` is sampled on the grid and the functional
//!
//! `E(h) = Σⱼ d(hⱼ, Ψⱼ^{-*} hⱼ₊₁ Ψⱼ^{-1})² / (4Δt) + Σⱼ wⱼ Δt · 2 Σᵢ Tr(βᵢ h⁻¹ βᵢ* h)`
//!
//! is minimized, where `d` is the affine-invariant distance
//! `‖log(A^{-1/2} B A^{-1/2})‖`, `Ψⱼ` propagates `Ψ′ = 2Ψα` across one
//! edge from `Ψ(tⱼ) = Id`, and `wⱼ` are trapezoid weights. Its continuum
//! limit is `∫ ¼ Tr((h⁻¹∇h)²) + 2 Σ Tr(βᵢ h⁻¹ βᵢ* h)` with
//! `∇h = h′ − 2hα − 2α*h`, which equals the Lagrangian
//! `∫ |α′ + α′*|² + 2 Σ |βᵢ′|²` of the gauged path and whose Euler–Lagrange
//! equation is `F̂(h^{1/2}·P) = 0`. Using one-edge propagators instead of
//! the global gauge removing `α` keeps the problem well conditioned when
//! `α` has poles. `E` is geodesically convex, so the minimizer is unique.
//!
//! Iterates move by `hⱼ ↦ hⱼ^{1/2} exp(ζⱼ) hⱼ^{1/2}`. In these re-centred
//! coordinates the gradient at node `j`, divided by `Δt`, approximates `F̂`
//! of `h^{1/2}·P` at `tⱼ`; the stopping rule is `maxⱼ ‖Gⱼ‖/Δt ≤ tol`.
//! These charts are Riemannian exponentials, so the Hessian at `ζ = 0` is
//! positive semi-definite. Steps are Newton steps with the exact
//! block-tridiagonal Hessian (second variation of the squared distance plus
//! the potential term `2Δt Σ‖[ζ, γᵢ]‖²`, `γ = h^{1/2}βh^{-1/2}`), followed by
//! an Armijo backtracking search.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{self, Grid};
use crate::linalg::{self, c64, comm, eye, frob, herm_eig, zeros, CMat, I};
use crate::nahm::NahmPath;

/// Sampled `(α, β₁, β₂, β₃)`, optionally with derivative samples used in
/// place of finite differences.
#[derive(Clone, Debug)]
pub struct DecoupledPath {
    pub grid: Grid,
    pub k: usize,
    pub alpha: Vec<CMat>,
    pub beta: Vec<[CMat; 3]>,
    pub d_alpha: Option<Vec<CMat>>,
    pub d_beta: Option<Vec<[CMat; 3]>>,
}

impl DecoupledPath {
    pub fn new(grid: Grid, alpha: Vec<CMat>, beta: Vec<[CMat; 3]>) -> Result<Self> {
        if alpha.len() != grid.len() || beta.len() != grid.len() {
            return Err(Error::dim("decoupled path samples do not match the grid"));
        }
        let k = alpha[0].nrows();
        let bad = alpha.iter().chain(beta.iter().flatten()).any(|m| m.nrows() != k || m.ncols() != k);
        if bad {
            return Err(Error::dim(format!("decoupled path samples must be {k}x{k}")));
        }
        Ok(DecoupledPath { grid, k, alpha, beta, d_alpha: None, d_beta: None })
    }

    /// `α ≡ 0`, `βᵢ ≡ tᵢ`.
    pub fn constant(grid: Grid, t: &[CMat; 3]) -> Self {
        let k = t[0].nrows();
        let n = grid.len();
        DecoupledPath {
            grid,
            k,
            alpha: vec![zeros(k); n],
            beta: vec![t.clone(); n],
            d_alpha: Some(vec![zeros(k); n]),
            d_beta: Some(vec![std::array::from_fn(|_| zeros(k)); n]),
        }
    }

    /// `α = ½(X₀ + iX₁)`, `β₁ = ½(X₂ + iX₃)`, `β₂ = ½(X₄ + iX₅)`,
    /// `β₃ = ½(X₆ + iX₇)`.
    pub fn from_nahm(x: &NahmPath) -> Self {
        let half = c64(0.5, 0.0);
        let pair = |a: &CMat, b: &CMat| (a + b * I) * half;
        DecoupledPath {
            grid: x.grid.clone(),
            k: x.k,
            alpha: x.values.iter().map(|s| pair(&s[0], &s[1])).collect(),
            beta: x
                .values
                .iter()
                .map(|s| [pair(&s[2], &s[3]), pair(&s[4], &s[5]), pair(&s[6], &s[7])])
                .collect(),
            d_alpha: None,
            d_beta: None,
        }
    }

    pub fn beta_slot(&self, i: usize) -> Vec<CMat> {
        self.beta.iter().map(|b| b[i].clone()).collect()
    }

    fn alpha_derivative(&self) -> Vec<CMat> {
        match &self.d_alpha {
            Some(d) => d.clone(),
            None => grid::derivative(&self.alpha, self.grid.dt()),
        }
    }

    fn beta_derivative(&self) -> Vec<[CMat; 3]> {
        match &self.d_beta {
            Some(d) => d.clone(),
            None => {
                let d: Vec<Vec<CMat>> =
                    (0..3).map(|i| grid::derivative(&self.beta_slot(i), self.grid.dt())).collect();
                (0..self.grid.len()).map(|j| std::array::from_fn(|i| d[i][j].clone())).collect()
            }
        }
    }

    /// `α` halfway between samples `j` and `j + 1`.
    fn alpha_mid(&self, j: usize) -> CMat {
        match &self.d_alpha {
            Some(d) => grid::midpoint_hermite(&self.alpha[j], &self.alpha[j + 1], &d[j], &d[j + 1], self.grid.dt()),
            None => grid::midpoint_cubic(&self.alpha, j),
        }
    }
}

/// `(g, t₁, t₂, t₃)` with pairwise-commuting `tᵢ` and invertible `g`.
#[derive(Clone, Debug)]
pub struct CommutingTriplePoint {
    pub g: CMat,
    pub t: [CMat; 3],
}

impl CommutingTriplePoint {
    /// Validates shapes, invertibility of `g` and `‖[tᵢ, tⱼ]‖ ≤ tol·(1 + ‖tᵢ‖‖tⱼ‖)`.
    pub fn new(g: CMat, t: [CMat; 3], tol: f64) -> Result<Self> {
        let k = g.nrows();
        if g.ncols() != k || t.iter().any(|m| m.nrows() != k || m.ncols() != k) {
            return Err(Error::dim(format!("triple entries must all be {k}x{k}")));
        }
        linalg::inverse(&g).map_err(|_| Error::domain("g must be invertible"))?;
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let c = frob(&comm(&t[a], &t[b]));
            if c > tol * (1.0 + frob(&t[a]) * frob(&t[b])) {
                return Err(Error::domain(format!(
                    "t{} and t{} do not commute (‖[t{},t{}]‖ = {c:e})",
                    a + 1,
                    b + 1,
                    a + 1,
                    b + 1
                )));
            }
        }
        Ok(CommutingTriplePoint { g, t })
    }

    pub fn k(&self) -> usize {
        self.g.nrows()
    }
}

/// Positive-definite Hermitian samples `h(t)`.
#[derive(Clone, Debug)]
pub struct HermitianPath {
    pub grid: Grid,
    pub values: Vec<CMat>,
}

impl HermitianPath {
    pub fn new(grid: Grid, values: Vec<CMat>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::dim("Hermitian path samples do not match the grid"));
        }
        for (j, h) in values.iter().enumerate() {
            if !linalg::is_hermitian(h, 1e-12 * frob(h).max(1.0)) {
                return Err(Error::domain(format!("sample {j} is not Hermitian")));
            }
            if !(linalg::min_eig_herm(h) > 0.0) {
                return Err(Error::domain(format!("sample {j} is not positive definite")));
            }
        }
        Ok(HermitianPath { grid, values })
    }

    /// Principal square roots `g = h^{1/2}`.
    pub fn sqrt(&self) -> Vec<CMat> {
        self.values.iter().map(|h| linalg::herm_fn(h, f64::sqrt)).collect()
    }
}

/// Sup norms of the complex rows.
#[derive(Clone, Debug, Serialize)]
pub struct ComplexResidual {
    /// `sup ‖βᵢ′ + 2[α, βᵢ]‖`, `i = 1, 2, 3`.
    pub evolution: [f64; 3],
    /// `sup ‖[βᵢ, βⱼ]‖` for `(1,2), (1,3), (2,3)`.
    pub commutators: [f64; 3],
}

impl ComplexResidual {
    pub fn max(&self) -> f64 {
        self.evolution.iter().chain(&self.commutators).cloned().fold(0.0, f64::max)
    }
}

/// Per-sample complex rows: three evolution rows, three commutators.
pub fn complex_rows(p: &DecoupledPath) -> Vec<([CMat; 3], [CMat; 3])> {
    let db = p.beta_derivative();
    (0..p.grid.len())
        .map(|j| {
            let a = &p.alpha[j];
            let b = &p.beta[j];
            let ev = std::array::from_fn(|i| &db[j][i] + comm(a, &b[i]) * c64(2.0, 0.0));
            let cm = [comm(&b[0], &b[1]), comm(&b[0], &b[2]), comm(&b[1], &b[2])];
            (ev, cm)
        })
        .collect()
}

pub fn complex_residual(p: &DecoupledPath) -> Result<ComplexResidual> {
    if p.grid.n < 4 {
        return Err(Error::domain("complex residual needs N >= 4"));
    }
    let mut out = ComplexResidual { evolution: [0.0; 3], commutators: [0.0; 3] };
    for (ev, cm) in complex_rows(p) {
        for i in 0..3 {
            out.evolution[i] = out.evolution[i].max(frob(&ev[i]));
            out.commutators[i] = out.commutators[i].max(frob(&cm[i]));
        }
    }
    Ok(out)
}

/// `F̂` on the grid (Hermitian at every sample).
pub fn real_residual(p: &DecoupledPath) -> Result<Vec<CMat>> {
    if p.grid.n < 4 {
        return Err(Error::domain("real residual needs N >= 4"));
    }
    let da = p.alpha_derivative();
    Ok((0..p.grid.len())
        .map(|j| {
            let a = &p.alpha[j];
            let mut f = &da[j] + da[j].adjoint();
            let mut br = comm(a, &a.adjoint());
            for b in &p.beta[j] {
                br += comm(b, &b.adjoint());
            }
            f += br * c64(2.0, 0.0);
            linalg::herm_part(&f)
        })
        .collect())
}

pub fn real_residual_sup(p: &DecoupledPath) -> Result<f64> {
    Ok(real_residual(p)?.iter().map(frob).fold(0.0, f64::max))
}

/// Complex gauge action with `dg/dt` by second-order finite differences.
pub fn complex_gauge_act(g: &[CMat], p: &DecoupledPath) -> Result<DecoupledPath> {
    if g.len() != p.grid.len() {
        return Err(Error::dim("gauge must be sampled on the path grid"));
    }
    let dg = grid::derivative(g, p.grid.dt());
    complex_gauge_act_with_derivative(g, &dg, p)
}

/// Complex gauge action with a supplied `dg/dt`. Derivative samples of the
/// input, if present, are transported to the output.
pub fn complex_gauge_act_with_derivative(g: &[CMat], dg: &[CMat], p: &DecoupledPath) -> Result<DecoupledPath> {
    if g.len() != p.grid.len() || dg.len() != p.grid.len() {
        return Err(Error::dim("gauge must be sampled on the path grid"));
    }
    let ginv: Vec<CMat> = g
        .iter()
        .map(|m| linalg::inverse(m).map_err(|_| Error::domain("singular gauge sample")))
        .collect::<Result<_>>()?;
    let half = c64(0.5, 0.0);
    let alpha = (0..g.len())
        .map(|j| &g[j] * &p.alpha[j] * &ginv[j] - &dg[j] * &ginv[j] * half)
        .collect();
    let beta: Vec<[CMat; 3]> =
        (0..g.len()).map(|j| std::array::from_fn(|i| &g[j] * &p.beta[j][i] * &ginv[j])).collect();
    let d_beta = p.d_beta.as_ref().map(|db| {
        (0..g.len())
            .map(|j| {
                let w = &dg[j] * &ginv[j];
                std::array::from_fn(|i| {
                    let b = &beta[j][i];
                    comm(&w, b) + &g[j] * &db[j][i] * &ginv[j]
                })
            })
            .collect()
    });
    Ok(DecoupledPath { grid: p.grid.clone(), k: p.k, alpha, beta, d_alpha: None, d_beta })
}

/// Trapezoid quadrature of `‖α + α*‖² + 2 Σ ‖βᵢ‖²`.
pub fn lagrangian(p: &DecoupledPath) -> f64 {
    let f: Vec<f64> = (0..p.grid.len())
        .map(|j| {
            let a = &p.alpha[j];
            frob(&(a + a.adjoint())).powi(2) + 2.0 * p.beta[j].iter().map(|b| frob(b).powi(2)).sum::<f64>()
        })
        .collect();
    grid::trapezoid(&f, p.grid.dt())
}

/// `β ↦ Aβ` (componentwise linear mix) for `A ∈ SU(3)`.
pub fn su3_act(a: &CMat, p: &DecoupledPath) -> Result<DecoupledPath> {
    if a.nrows() != 3 || a.ncols() != 3 {
        return Err(Error::dim("SU(3) element must be 3x3"));
    }
    if frob(&(a.adjoint() * a - eye(3))) > 1e-10 || (a.determinant() - c64(1.0, 0.0)).norm() > 1e-10 {
        return Err(Error::domain("mixing matrix must be special unitary"));
    }
    let mix = |b: &[CMat; 3]| -> [CMat; 3] {
        std::array::from_fn(|i| &b[0] * a[(i, 0)] + &b[1] * a[(i, 1)] + &b[2] * a[(i, 2)])
    };
    Ok(DecoupledPath {
        grid: p.grid.clone(),
        k: p.k,
        alpha: p.alpha.clone(),
        beta: p.beta.iter().map(mix).collect(),
        d_alpha: p.d_alpha.clone(),
        d_beta: p.d_beta.as_ref().map(|d| d.iter().map(mix).collect()),
    })
}

/// `σ(h) = Σ (λ + λ⁻¹ − 2)` over the eigenvalues of `h`.
pub fn sigma(h: &CMat) -> Result<f64> {
    let (lam, _) = herm_eig(h);
    if lam.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::domain("sigma needs a positive-definite matrix"));
    }
    Ok(lam.iter().map(|&l| l + 1.0 / l - 2.0).sum())
}

// ---------------------------------------------------------------------------
// Solver

/// Starting path for [`solve_real_equation`].
#[derive(Clone, Copy, Debug)]
pub enum Initialization {
    /// The geodesic between the boundary values.
    Geodesic,
    /// The geodesic moved by `exp(sin(πt) R)` with a seeded random
    /// Hermitian `R` of the given scale.
    Perturbed { seed: u64, scale: f64 },
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Target for `maxⱼ ‖Gⱼ‖/Δt`.
    pub tol: f64,
    pub max_iter: usize,
    pub init: Initialization,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-8, max_iter: 10_000, init: Initialization::Geodesic }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Discrete functional before the first step and after each accepted step.
    pub energy_history: Vec<f64>,
    /// `sup ‖F̂‖` over interior samples from the discrete equation.
    pub f_hat_sup: f64,
}

#[derive(Clone, Debug)]
pub struct RealSolution {
    pub h: HermitianPath,
    pub report: SolveReport,
}

/// Hermitian `k×k` matrices as real vectors of length `k²`, isometric for
/// the Frobenius inner product.
fn herm_to_vec(z: &CMat, out: &mut [f64]) {
    let k = z.nrows();
    let r2 = std::f64::consts::SQRT_2;
    let mut m = 0;
    for i in 0..k {
        out[m] = z[(i, i)].re;
        m += 1;
    }
    for i in 0..k {
        for j in (i + 1)..k {
            out[m] = r2 * z[(i, j)].re;
            out[m + 1] = r2 * z[(i, j)].im;
            m += 2;
        }
    }
}

fn vec_to_herm(v: &[f64], k: usize) -> CMat {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut z = zeros(k);
    let mut m = 0;
    for i in 0..k {
        z[(i, i)] = c64(v[m], 0.0);
        m += 1;
    }
    for i in 0..k {
        for j in (i + 1)..k {
            z[(i, j)] = c64(r * v[m], r * v[m + 1]);
            z[(j, i)] = z[(i, j)].conj();
            m += 2;
        }
    }
    z
}

fn herm_basis(k: usize) -> Vec<CMat> {
    let m = k * k;
    (0..m)
        .map(|a| {
            let mut v = vec![0.0; m];
            v[a] = 1.0;
            vec_to_herm(&v, k)
        })
        .collect()
}

/// Spectral data of one sample.
struct Node {
    sqrt: CMat,
    inv_sqrt: CMat,
}

fn node(h: &CMat) -> Result<Node> {
    let (lam, u) = herm_eig(h);
    if lam.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(Error::numerical("iterate left the positive-definite cone"));
    }
    let scale = |f: &dyn Fn(f64) -> f64| {
        let mut d = u.clone();
        for j in 0..lam.len() {
            let s = c64(f(lam[j]), 0.0);
            for i in 0..lam.len() {
                d[(i, j)] *= s;
            }
        }
        d * u.adjoint()
    };
    Ok(Node { sqrt: scale(&|x: f64| x.sqrt()), inv_sqrt: scale(&|x: f64| 1.0 / x.sqrt()) })
}

/// `log(A^{-1/2} B A^{-1/2})` given the node data of `A`, evaluated as
/// `log1p` of `A^{-1/2}(B − A)A^{-1/2}` so that neighbouring samples keep
/// full relative accuracy.
fn rel_log(an: &Node, a: &CMat, b: &CMat) -> CMat {
    let e = linalg::herm_part(&(&an.inv_sqrt * (b - a) * &an.inv_sqrt));
    linalg::herm_fn(&e, f64::ln_1p)
}

struct Problem {
    grid: Grid,
    k: usize,
    beta: Vec<[CMat; 3]>,
    /// Per-edge propagators `Ψⱼ` of `Ψ′ = 2Ψα`, `Ψ(tⱼ) = Id`, with `Ψⱼ^{-*}`;
    /// `None` when `α ≡ 0`.
    transport: Option<Vec<(CMat, CMat)>>,
}

struct Evaluation {
    energy: f64,
    /// Gradient at interior nodes `1..N−1` (re-centred coordinates).
    grad: Vec<CMat>,
    /// `γᵢ = h^{1/2} βᵢ h^{-1/2}` at interior nodes.
    gammas: Vec<[CMat; 3]>,
    nodes: Vec<Node>,
}

impl Problem {
    fn n(&self) -> usize {
        self.grid.n
    }

    fn potential_weight(&self, j: usize) -> f64 {
        2.0 * grid::trapezoid_weight(j, self.n()) * self.grid.dt()
    }

    /// Sample `j + 1` carried back to `tⱼ`: `Ψⱼ^{-*} h_{j+1} Ψⱼ^{-1}`.
    fn forward(&self, hs: &[CMat], j: usize) -> CMat {
        match &self.transport {
            None => hs[j + 1].clone(),
            Some(t) => linalg::herm_part(&(&t[j].1 * &hs[j + 1] * t[j].1.adjoint())),
        }
    }

    /// Sample `j − 1` carried forward to `tⱼ`: `Ψ*_{j−1} h_{j−1} Ψ_{j−1}`.
    fn backward(&self, hs: &[CMat], j: usize) -> CMat {
        match &self.transport {
            None => hs[j - 1].clone(),
            Some(t) => linalg::herm_part(&(t[j - 1].0.adjoint() * &hs[j - 1] * &t[j - 1].0)),
        }
    }

    fn energy(&self, hs: &[CMat]) -> Result<f64> {
        let nodes: Vec<Node> = hs.par_iter().map(node).collect::<Result<_>>()?;
        let dt = self.grid.dt();
        // Terms in parallel, sums in order: results must not depend on the pool size.
        let kinetic: Vec<f64> = (0..self.n())
            .into_par_iter()
            .map(|j| frob(&rel_log(&nodes[j], &hs[j], &self.forward(hs, j))).powi(2))
            .collect();
        let kinetic = kinetic.iter().sum::<f64>() / (4.0 * dt);
        let potential: Vec<f64> = (0..=self.n())
            .into_par_iter()
            .map(|j| {
                let s: f64 = self.beta[j]
                    .iter()
                    .map(|b| frob(&(&nodes[j].sqrt * b * &nodes[j].inv_sqrt)).powi(2))
                    .sum();
                self.potential_weight(j) * s
            })
            .collect();
        Ok(kinetic + potential.iter().sum::<f64>())
    }

    fn evaluate(&self, hs: &[CMat]) -> Result<Evaluation> {
        let n = self.n();
        let dt = self.grid.dt();
        let nodes: Vec<Node> = hs.par_iter().map(node).collect::<Result<_>>()?;
        let energy = self.energy(hs)?;
        let parts: Vec<(CMat, [CMat; 3])> = (1..n)
            .into_par_iter()
            .map(|j| {
                let lp = rel_log(&nodes[j], &hs[j], &self.forward(hs, j));
                let lm = rel_log(&nodes[j], &hs[j], &self.backward(hs, j));
                let mut g = (lp + lm) * c64(-1.0 / (2.0 * dt), 0.0);
                let gam: [CMat; 3] =
                    std::array::from_fn(|i| &nodes[j].sqrt * &self.beta[j][i] * &nodes[j].inv_sqrt);
                let w = self.potential_weight(j);
                for c in &gam {
                    g += comm(c, &c.adjoint()) * c64(w, 0.0);
                }
                (linalg::herm_part(&g), gam)
            })
            .collect();
        let (grad, gammas) = parts.into_iter().unzip();
        Ok(Evaluation { energy, grad, gammas, nodes })
    }

    fn f_hat_sup(&self, ev: &Evaluation) -> f64 {
        let dt = self.grid.dt();
        ev.grad.iter().map(|g| frob(g) / dt).fold(0.0, f64::max)
    }

    /// Newton step: solve the block-tridiagonal Hessian system `H δ = −grad`.
    /// Returns `None` if a Schur complement loses definiteness.
    fn newton_step(&self, ev: &Evaluation) -> Option<Vec<CMat>> {
        let k = self.k;
        let m = k * k;
        let n = self.n();
        let dt = self.grid.dt();
        let basis = herm_basis(k);
        let kin = 1.0 / (4.0 * dt);
        let edges: Vec<EdgeHessian> = (0..n)
            .into_par_iter()
            .map(|j| {
                let r = match &self.transport {
                    None => ev.nodes[j + 1].sqrt.clone(),
                    Some(t) => &t[j].1 * &ev.nodes[j + 1].sqrt,
                };
                edge_hessian(&ev.nodes[j], &r, &basis)
            })
            .collect();
        let diag: Vec<DMatrix<f64>> = (1..n)
            .into_par_iter()
            .map(|j| {
                let gam = &ev.gammas[j - 1];
                let w = self.potential_weight(j);
                let mut cols = DMatrix::<f64>::zeros(2 * m * 3, m);
                for (a, e) in basis.iter().enumerate() {
                    let mut r = 0;
                    for g in gam {
                        for z in comm(e, g).iter() {
                            cols[(r, a)] = z.re;
                            cols[(r + 1, a)] = z.im;
                            r += 2;
                        }
                    }
                }
                cols.transpose() * &cols * w + (&edges[j - 1].bb + &edges[j].aa) * kin
            })
            .collect();
        // off[j] couples interior nodes j + 1 and j + 2.
        let off: Vec<DMatrix<f64>> = (1..n.saturating_sub(1)).map(|j| &edges[j].ab * kin).collect();
        let rhs: Vec<DVector<f64>> = ev
            .grad
            .iter()
            .map(|g| {
                let mut v = vec![0.0; m];
                herm_to_vec(g, &mut v);
                -DVector::from_vec(v)
            })
            .collect();
        let len = n - 1;
        let mut chol: Vec<nalgebra::Cholesky<f64, nalgebra::Dyn>> = Vec::with_capacity(len);
        let mut y: Vec<DVector<f64>> = Vec::with_capacity(len);
        for j in 0..len {
            let (mj, yj) = if j == 0 {
                (diag[0].clone(), rhs[0].clone())
            } else {
                let b = &off[j - 1];
                let prev = &chol[j - 1];
                let s = b.transpose() * prev.solve(b);
                (&diag[j] - s, &rhs[j] - b.transpose() * prev.solve(&y[j - 1]))
            };
            chol.push(mj.cholesky()?);
            y.push(yj);
        }
        let mut x = vec![DVector::<f64>::zeros(m); len];
        for j in (0..len).rev() {
            let r = if j + 1 < len { &y[j] - &off[j] * &x[j + 1] } else { y[j].clone() };
            x[j] = chol[j].solve(&r);
        }
        Some(x.iter().map(|v| vec_to_herm(v.as_slice(), k)).collect())
    }
}

/// Hessian blocks of `d(X, Y)²` in the charts `X = A^{1/2} e^ζ A^{1/2}`,
/// `Y = R e^{ζ'} R*` at `ζ = ζ' = 0`, in [`herm_to_vec`] coordinates.
struct EdgeHessian {
    aa: DMatrix<f64>,
    ab: DMatrix<f64>,
    bb: DMatrix<f64>,
}

/// Writing `M = CC*` with `C = A^{-1/2}R`, the distance is
/// `F(S) = Tr(log S)²` at `S = e^{-ζ/2} C e^{ζ'} C* e^{-ζ/2}`. Expanding
/// `S = M + δ₁ + δ₂`, the Hessian is `2 Tr(F′(M) δ₂) + D²F(M)[δ₁, δ₁]`, with
/// `D²F` given by the divided differences of `f′(x) = 2 ln x / x` in the
/// eigenbasis of `M`.
fn edge_hessian(a: &Node, r: &CMat, basis: &[CMat]) -> EdgeHessian {
    let k = a.sqrt.nrows();
    let m = basis.len();
    let c = &a.inv_sqrt * r;
    let (mu, u) = herm_eig(&linalg::herm_part(&(&c * c.adjoint())));
    let ct = u.adjoint() * &c;
    let lg: Vec<f64> = mu.iter().map(|x| x.ln()).collect();
    let fp: Vec<f64> = (0..k).map(|i| 2.0 * lg[i] / mu[i]).collect();
    let mut dd = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            let (x, y) = (mu[i], mu[j]);
            dd[i][j] = if (x - y).abs() > 1e-6 * x.max(y) {
                (fp[i] - fp[j]) / (x - y)
            } else {
                let z = 0.5 * (x + y);
                (2.0 - 2.0 * z.ln()) / (z * z)
            };
        }
    }
    let mut fpm = zeros(k);
    for i in 0..k {
        fpm[(i, i)] = c64(fp[i], 0.0);
    }
    let np = ct.adjoint() * &fpm * &ct;
    let et: Vec<CMat> = basis.iter().map(|e| u.adjoint() * e * &u).collect();
    let ys: Vec<CMat> = basis.iter().map(|e| &ct * e * ct.adjoint()).collect();
    let xs: Vec<CMat> = et
        .iter()
        .map(|e| CMat::from_fn(k, k, |i, j| e[(i, j)] * (-0.5 * (mu[i] + mu[j]))))
        .collect();
    let npe: Vec<CMat> = basis.iter().map(|e| &np * e).collect();
    let pair = |x: &CMat, y: &CMat| -> f64 {
        let mut s = 0.0;
        for i in 0..k {
            for j in 0..k {
                s += (x[(i, j)] * y[(i, j)].conj()).re * dd[i][j];
            }
        }
        s
    };
    // Re Σ_ij d_i x_ij w_j y_ji
    let tr = |d: &dyn Fn(usize) -> f64, x: &CMat, w: &dyn Fn(usize) -> f64, y: &CMat| -> f64 {
        let mut s = 0.0;
        for i in 0..k {
            for j in 0..k {
                s += d(i) * w(j) * (x[(i, j)] * y[(j, i)]).re;
            }
        }
        s
    };
    let one = |_: usize| 1.0;
    let mut aa = DMatrix::zeros(m, m);
    let mut ab = DMatrix::zeros(m, m);
    let mut bb = DMatrix::zeros(m, m);
    for p in 0..m {
        for q in 0..m {
            aa[(p, q)] = tr(&|i| lg[i], &et[p], &one, &et[q])
                + 0.5 * tr(&|i| fp[i], &et[p], &|j| mu[j], &et[q])
                + pair(&xs[p], &xs[q]);
            ab[(p, q)] = -tr(&|i| fp[i], &et[p], &one, &ys[q]) + pair(&xs[p], &ys[q]);
            bb[(p, q)] = tr(&one, &npe[p], &one, &basis[q]) + pair(&ys[p], &ys[q]);
        }
    }
    EdgeHessian { aa, ab, bb }
}

fn inner_herm(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x * y.conj()).re).sum()
}

/// `A^{1/2} exp(ζ) A^{1/2}`, re-symmetrized.
fn retract(h: &CMat, z: &CMat) -> Result<CMat> {
    let s = node(h)?.sqrt;
    Ok(linalg::herm_part(&(&s * linalg::expm_herm(z) * &s)))
}

/// Geodesic `A^{1/2} (A^{-1/2} B A^{-1/2})^t A^{1/2}`.
pub fn geodesic(a: &CMat, b: &CMat, t: f64) -> Result<CMat> {
    let na = node(a).map_err(|_| Error::domain("geodesic endpoint is not positive definite"))?;
    let mid = &na.inv_sqrt * b * &na.inv_sqrt;
    let p = linalg::powm_pd(&mid, t).map_err(|_| Error::domain("geodesic endpoint is not positive definite"))?;
    Ok(linalg::herm_part(&(&na.sqrt * p * &na.sqrt)))
}

/// One RK4 step of `Ψ′ = 2Ψα` across each edge, starting from `Id`.
fn transports(p: &DecoupledPath) -> Result<Option<Vec<(CMat, CMat)>>> {
    if p.alpha.iter().all(|a| a.iter().all(|z| z.norm() == 0.0)) {
        return Ok(None);
    }
    let dt = p.grid.dt();
    let two = c64(2.0, 0.0);
    let id = eye(p.k);
    (0..p.grid.n)
        .into_par_iter()
        .map(|j| {
            let a0 = &p.alpha[j] * two;
            let a1 = &p.alpha[j + 1] * two;
            let am = p.alpha_mid(j) * two;
            let k1 = a0.clone();
            let k2 = (&id + &k1 * c64(dt / 2.0, 0.0)) * &am;
            let k3 = (&id + &k2 * c64(dt / 2.0, 0.0)) * &am;
            let k4 = (&id + &k3 * c64(dt, 0.0)) * &a1;
            let psi = &id + (&k1 + (&k2 + &k3) * two + &k4) * c64(dt / 6.0, 0.0);
            let inv = linalg::inverse(&psi)?;
            Ok((psi, inv.adjoint()))
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

/// Solve `q′ = 2qα`, `q(0) = Id`: the complex gauge removing `α`.
pub fn alpha_gauge(p: &DecoupledPath) -> Vec<CMat> {
    let dt = p.grid.dt();
    let two = c64(2.0, 0.0);
    let mut q = Vec::with_capacity(p.grid.len());
    q.push(eye(p.k));
    for j in 0..p.grid.n {
        let a0 = &p.alpha[j] * two;
        let a1 = &p.alpha[j + 1] * two;
        let am = p.alpha_mid(j) * two;
        let g = &q[j];
        let k1 = g * &a0;
        let k2 = (g + &k1 * c64(dt / 2.0, 0.0)) * &am;
        let k3 = (g + &k2 * c64(dt / 2.0, 0.0)) * &am;
        let k4 = (g + &k3 * c64(dt, 0.0)) * &a1;
        q.push(g + (&k1 + (&k2 + &k3) * two + &k4) * c64(dt / 6.0, 0.0));
    }
    q
}

/// Find `h` with `h(0) = h₋`, `h(1) = h₊` minimizing the discrete
/// functional, so that `F̂(h^{1/2}·P) = 0`.
pub fn solve_real_equation(
    p: &DecoupledPath,
    h_minus: &CMat,
    h_plus: &CMat,
    opts: &SolverOptions,
) -> Result<RealSolution> {
    let k = p.k;
    for (name, h) in [("h_minus", h_minus), ("h_plus", h_plus)] {
        if h.nrows() != k || h.ncols() != k {
            return Err(Error::dim(format!("{name} must be {k}x{k}")));
        }
        if !linalg::is_hermitian(h, 1e-10 * frob(h).max(1.0)) || !(linalg::min_eig_herm(h) > 0.0) {
            return Err(Error::domain(format!("{name} must be Hermitian positive definite")));
        }
    }
    if p.grid.n < 4 {
        return Err(Error::domain("solver needs N >= 4"));
    }
    let cr = complex_residual(p)?;
    let scale = 1.0 + p.beta.iter().flatten().map(frob).fold(0.0, f64::max);
    if cr.max() > 1e-4 * scale {
        return Err(Error::domain(format!(
            "input does not satisfy the complex rows (residual {:e})",
            cr.max()
        )));
    }
    let n = p.grid.n;
    let hm = linalg::herm_part(h_minus);
    let hp = linalg::herm_part(h_plus);
    let prob = Problem { grid: p.grid.clone(), k, beta: p.beta.clone(), transport: transports(p)? };

    let times = p.grid.times();
    let mut hs: Vec<CMat> = times.iter().map(|&t| geodesic(&hm, &hp, t)).collect::<Result<_>>()?;
    hs[0] = hm;
    hs[n] = hp;
    if let Initialization::Perturbed { seed, scale } = opts.init {
        let mut rng = linalg::seeded_rng(seed);
        let r = linalg::random_hermitian(k, scale, &mut rng);
        for j in 1..n {
            let s = (std::f64::consts::PI * times[j]).sin();
            hs[j] = retract(&hs[j], &(&r * c64(s, 0.0)))?;
        }
    }

    let mut ev = prob.evaluate(&hs)?;
    let mut history = vec![ev.energy];
    let mut fhat = prob.f_hat_sup(&ev);
    let mut iter = 0;
    let mut stalled = 0;
    while fhat > opts.tol {
        if iter >= opts.max_iter {
            return Err(Error::numerical(format!(
                "real-equation solver stopped after {iter} iterations with sup|F̂| = {fhat:e} (target {:e})",
                opts.tol
            )));
        }
        iter += 1;
        let newton = prob.newton_step(&ev);
        let mut dir = newton.unwrap_or_else(|| ev.grad.clone());
        let mut slope: f64 = dir.iter().zip(&ev.grad).map(|(d, g)| inner_herm(d, g)).sum();
        if !(slope < 0.0) {
            let dt = prob.grid.dt();
            dir = ev.grad.iter().map(|g| g * c64(-dt, 0.0)).collect();
            slope = dir.iter().zip(&ev.grad).map(|(d, g)| inner_herm(d, g)).sum();
        }
        // Below roundoff the decrement stops carrying information.
        if -slope <= 1e-15 * ev.energy.abs().max(1.0) {
            stalled += 1;
            if stalled >= 3 {
                return Err(Error::numerical(format!(
                    "real-equation solver stalled at roundoff after {iter} iterations with sup|F̂| = {fhat:e} (target {:e}); use a coarser grid or a looser tolerance",
                    opts.tol
                )));
            }
        } else {
            stalled = 0;
        }
        let mut s = 1.0;
        let accepted = loop {
            let mut trial = hs.clone();
            for j in 1..n {
                trial[j] = retract(&hs[j], &(&dir[j - 1] * c64(s, 0.0)))?;
            }
            let e = prob.energy(&trial)?;
            let roundoff = 1e-14 * ev.energy.abs().max(1.0);
            if e <= ev.energy + 1e-4 * s * slope + roundoff {
                break Some(trial);
            }
            s *= 0.5;
            if s < 1e-12 {
                break None;
            }
        };
        let Some(next) = accepted else {
            return Err(Error::numerical(format!(
                "line search failed after {iter} iterations with sup|F̂| = {fhat:e}"
            )));
        };
        hs = next;
        ev = prob.evaluate(&hs)?;
        history.push(ev.energy);
        fhat = prob.f_hat_sup(&ev);
    }
    Ok(RealSolution {
        h: HermitianPath { grid: p.grid.clone(), values: hs },
        report: SolveReport { iterations: iter, energy_history: history, f_hat_sup: fhat },
    })
}

/// `h^{1/2}·P` with `dg/dt` by sixth-order differences and derivative
/// samples attached (`β′` transported, `α′` by sixth-order differences).
pub fn gauge_by_metric(p: &DecoupledPath, h: &HermitianPath) -> Result<DecoupledPath> {
    if !p.grid.matches(&h.grid) {
        return Err(Error::dim("metric and path live on different grids"));
    }
    let g = h.sqrt();
    let dg = grid::derivative6(&g, p.grid.dt());
    let base = DecoupledPath {
        d_beta: Some(p.d_beta.clone().unwrap_or_else(|| p.beta_derivative())),
        ..p.clone()
    };
    let mut out = complex_gauge_act_with_derivative(&g, &dg, &base)?;
    out.d_alpha = Some(grid::derivative6(&out.alpha, p.grid.dt()));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Θ and its inverse

#[derive(Clone, Debug)]
pub struct ThetaResult {
    pub point: CommutingTriplePoint,
    /// `sup_t ‖g βᵢ g⁻¹ − (g βᵢ g⁻¹)(0)‖`.
    pub constancy: f64,
}

/// `Θ(P) = (g(1), g βᵢ g⁻¹)` with `g′ = 2gα`, `g(0) = Id`. Fails if
/// `g βᵢ g⁻¹` moves by more than `constancy_tol`.
pub fn theta(p: &DecoupledPath, constancy_tol: f64) -> Result<ThetaResult> {
    let g = alpha_gauge(p);
    let n = p.grid.n;
    let mut constancy: f64 = 0.0;
    let mut conj0: Option<[CMat; 3]> = None;
    for (j, gj) in g.iter().enumerate() {
        let gi = linalg::inverse(gj)?;
        let c: [CMat; 3] = std::array::from_fn(|i| gj * &p.beta[j][i] * &gi);
        match &conj0 {
            None => conj0 = Some(c),
            Some(c0) => {
                for i in 0..3 {
                    constancy = constancy.max(frob(&(&c[i] - &c0[i])));
                }
            }
        }
    }
    if constancy > constancy_tol {
        return Err(Error::domain(format!(
            "g βᵢ g⁻¹ is not constant (variation {constancy:e}); the input is not a solution"
        )));
    }
    let gi = linalg::inverse(&g[n])?;
    let t = std::array::from_fn(|i| &g[n] * &p.beta[n][i] * &gi);
    Ok(ThetaResult { point: CommutingTriplePoint { g: g[n].clone(), t }, constancy })
}

#[derive(Clone, Debug)]
pub struct ThetaInverse {
    pub path: DecoupledPath,
    pub h: HermitianPath,
    pub report: SolveReport,
}

/// `Θ⁻¹(g₀, t)`: solve from `α = 0`, `βᵢ = tᵢ` with `h(0) = Id` and
/// `h(1) = (g₀*g₀)⁻¹`, then gauge by `h^{1/2}`. With this boundary value
/// `Θ` returns `g(1) = h(1)^{-1/2}`, so `g(1)*g(1) = g₀*g₀`.
pub fn theta_inverse(q: &CommutingTriplePoint, grid: &Grid, opts: &SolverOptions) -> Result<ThetaInverse> {
    let k = q.k();
    let base = DecoupledPath::constant(grid.clone(), &q.t);
    let hp = linalg::inverse(&(q.g.adjoint() * &q.g))?;
    let sol = solve_real_equation(&base, &eye(k), &linalg::herm_part(&hp), opts)?;
    let path = gauge_by_metric(&base, &sol.h)?;
    Ok(ThetaInverse { path, h: sol.h, report: sol.report })
}

// ---------------------------------------------------------------------------
// σ convexity

#[derive(Clone, Debug, Serialize)]
pub struct ConvexityReport {
    /// `min (σ″ + ‖F̂(P)‖ + ‖F̂(g·P)‖)` over interior samples.
    pub min_slack: f64,
    pub sigma_max: f64,
    pub f_hat_sup: f64,
    pub f_hat_gauged_sup: f64,
}

/// Check `σ(g*g)″ ≥ −(‖F̂(P)‖ + ‖F̂(g·P)‖)` on the grid.
pub fn convexity_check(p: &DecoupledPath, g: &[CMat]) -> Result<ConvexityReport> {
    if g.len() != p.grid.len() {
        return Err(Error::dim("gauge must be sampled on the path grid"));
    }
    let dt = p.grid.dt();
    let sig: Vec<f64> = g.iter().map(|m| sigma(&linalg::herm_part(&(m.adjoint() * m)))).collect::<Result<_>>()?;
    let d2 = grid::second_derivative(&sig, dt);
    let dg = grid::derivative6(g, dt);
    let base = DecoupledPath { d_beta: Some(p.beta_derivative()), ..p.clone() };
    let mut gp = complex_gauge_act_with_derivative(g, &dg, &base)?;
    gp.d_alpha = Some(grid::derivative6(&gp.alpha, dt));
    let f0 = real_residual(p)?;
    let f1 = real_residual(&gp)?;
    let n = p.grid.n;
    let min_slack = (1..n).map(|j| d2[j] + frob(&f0[j]) + frob(&f1[j])).fold(f64::INFINITY, f64::min);
    Ok(ConvexityReport {
        min_slack,
        sigma_max: sig.iter().cloned().fold(0.0, f64::max),
        f_hat_sup: f0.iter().map(frob).fold(0.0, f64::max),
        f_hat_gauged_sup: f1.iter().map(frob).fold(0.0, f64::max),
    })
}
