//! Sampled Nahm fields `(X₀, …, X₇)` on a uniform grid: the octonionic and
//! quaternionic right-hand sides, RK4 integration of the reduced flow with
//! blow-up detection, the gauge action, temporal gauge fixing and the map χ.
//!
//! Orientation: the systems read `dXᵢ/dt + [X₀, Xᵢ] + ½ Σ f_ijk [Xⱼ, Xₖ] = 0`,
//! and a gauge transformation acts by `X₀ ↦ gX₀g⁻¹ − g′g⁻¹`, `Xᵢ ↦ gXᵢg⁻¹`.
//! Temporal gauge solves `g′ = gX₀`, `g(0) = Id`.

use rayon::prelude::*;

use crate::config::BLOW_UP_THRESHOLD;
use crate::error::{Error, Result};
use crate::grid::{self, Grid};
use crate::lie::{su2_basis, Flavor};
use crate::linalg::{self, c64, comm, eye, frob, zeros, CMat};
use crate::octonion::cross_table;

/// Relative tolerance for the anti-Hermitian check on compact paths.
const COMPACT_TOL: f64 = 1e-8;

/// A discretized octonionic field: per sample, the eight slots `X₀..X₇`.
#[derive(Clone, Debug)]
pub struct NahmPath {
    pub grid: Grid,
    pub k: usize,
    pub flavor: Flavor,
    pub values: Vec<[CMat; 8]>,
}

/// A discretized quaternionic field `(X₀, X₁, X₂, X₃)`.
#[derive(Clone, Debug)]
pub struct QuaternionicPath {
    pub grid: Grid,
    pub k: usize,
    pub flavor: Flavor,
    pub values: Vec<[CMat; 4]>,
}

fn check_samples<const M: usize>(grid: &Grid, flavor: Flavor, values: &[[CMat; M]]) -> Result<usize> {
    if values.len() != grid.len() {
        return Err(Error::dim(format!(
            "path has {} samples but the grid has {}",
            values.len(),
            grid.len()
        )));
    }
    let k = values[0][0].nrows();
    for (j, sample) in values.iter().enumerate() {
        for (i, x) in sample.iter().enumerate() {
            if x.nrows() != k || x.ncols() != k {
                return Err(Error::dim(format!("sample {j}, slot {i}: expected {k}x{k}")));
            }
            if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::domain(format!("sample {j}, slot {i}: non-finite entry")));
            }
            if flavor == Flavor::Compact
                && !linalg::is_anti_hermitian(x, COMPACT_TOL * frob(x).max(1.0))
            {
                return Err(Error::domain(format!(
                    "sample {j}, slot {i}: compact flavor requires anti-Hermitian values"
                )));
            }
        }
    }
    Ok(k)
}

impl NahmPath {
    pub fn new(grid: Grid, flavor: Flavor, values: Vec<[CMat; 8]>) -> Result<Self> {
        let k = check_samples(&grid, flavor, &values)?;
        Ok(NahmPath { grid, k, flavor, values })
    }

    pub fn from_fn(grid: Grid, flavor: Flavor, f: impl Fn(f64) -> [CMat; 8]) -> Result<Self> {
        let values = grid.times().into_iter().map(f).collect();
        Self::new(grid, flavor, values)
    }

    pub fn zeros(grid: Grid, k: usize, flavor: Flavor) -> Self {
        let values = vec![std::array::from_fn(|_| zeros(k)); grid.len()];
        NahmPath { grid, k, flavor, values }
    }

    /// Samples of one slot.
    pub fn slot(&self, i: usize) -> Vec<CMat> {
        self.values.iter().map(|s| s[i].clone()).collect()
    }

    /// Largest Frobenius norm over samples and slots.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(sample_norm).fold(0.0, f64::max)
    }
}

impl QuaternionicPath {
    pub fn new(grid: Grid, flavor: Flavor, values: Vec<[CMat; 4]>) -> Result<Self> {
        let k = check_samples(&grid, flavor, &values)?;
        Ok(QuaternionicPath { grid, k, flavor, values })
    }

    pub fn from_fn(grid: Grid, flavor: Flavor, f: impl Fn(f64) -> [CMat; 4]) -> Result<Self> {
        let values = grid.times().into_iter().map(f).collect();
        Self::new(grid, flavor, values)
    }
}

/// Outcome of a reduced-flow integration that crossed the norm threshold.
#[derive(Clone, Debug)]
pub struct BlowUpReport {
    /// Estimate of the blow-up time.
    pub t_star: f64,
    /// Norm of the first state found above the threshold.
    pub max_norm: f64,
    /// The solution on the grid nodes reached before the crossing.
    /// Its grid may have `n = 0` (a single sample) if the crossing happens
    /// inside the first step.
    pub truncated_path: NahmPath,
}

#[derive(Clone, Debug)]
pub enum Integration {
    Complete(NahmPath),
    BlowUp(BlowUpReport),
}

fn sample_norm<const M: usize>(x: &[CMat; M]) -> f64 {
    x.iter().map(frob).fold(0.0, f64::max)
}

fn check_k(x: &[CMat]) -> Result<usize> {
    let k = x[0].nrows();
    for (i, m) in x.iter().enumerate() {
        if m.nrows() != k || m.ncols() != k {
            return Err(Error::dim(format!("slot {i} is {}x{}, expected {k}x{k}", m.nrows(), m.ncols())));
        }
    }
    Ok(k)
}

/// Row `i` of the bracket part: `[X₀, Xᵢ] + Σ_{j<k} f_ijk [Xⱼ, Xₖ]`, with
/// `j, k` restricted to `1..=top`.
fn bracket_row(x: &[CMat], i: usize, top: usize) -> CMat {
    let mut out = comm(&x[0], &x[i]);
    for (j, k, s) in cross_table().pairs_for(i) {
        if j <= top && k <= top {
            let c = comm(&x[j], &x[k]);
            if s > 0 {
                out += c;
            } else {
                out -= c;
            }
        }
    }
    out
}

fn rhs_unchecked(x: &[CMat], top: usize) -> Vec<CMat> {
    (1..=top).map(|i| -bracket_row(x, i, top)).collect()
}

/// `dXᵢ/dt` forced by the octonionic system, `i = 1..7`.
pub fn rhs_octonionic(x: &[CMat; 8]) -> Result<[CMat; 7]> {
    check_k(x)?;
    let v = rhs_unchecked(x, 7);
    Ok(std::array::from_fn(|i| v[i].clone()))
}

/// `dXᵢ/dt` forced by the quaternionic system, `i = 1..3`.
pub fn rhs_quaternionic(x: &[CMat; 4]) -> Result<[CMat; 3]> {
    check_k(x)?;
    let v = rhs_unchecked(x, 3);
    Ok(std::array::from_fn(|i| v[i].clone()))
}

/// Per-sample rows `dXᵢ/dt + [X₀, Xᵢ] + ½ Σ f_ijk [Xⱼ, Xₖ]`, `i = 1..7`,
/// with the derivative taken by second-order finite differences.
pub fn residual_fields(path: &NahmPath) -> Vec<[CMat; 7]> {
    let dt = path.grid.dt();
    let d: Vec<Vec<CMat>> = (1..8).map(|i| grid::derivative(&path.slot(i), dt)).collect();
    path.values
        .par_iter()
        .enumerate()
        .map(|(j, x)| std::array::from_fn(|r| &d[r][j] + bracket_row(x, r + 1, 7)))
        .collect()
}

/// Per-row sup norms of [`residual_fields`].
pub fn residual(path: &NahmPath) -> Result<[f64; 7]> {
    if path.grid.n < 4 {
        return Err(Error::domain("residual needs N >= 4"));
    }
    let rows = residual_fields(path);
    Ok(std::array::from_fn(|r| rows.iter().map(|s| frob(&s[r])).fold(0.0, f64::max)))
}

/// Per-row sup norms of the quaternionic residual.
pub fn quaternionic_residual(path: &QuaternionicPath) -> Result<[f64; 3]> {
    if path.grid.n < 4 {
        return Err(Error::domain("residual needs N >= 4"));
    }
    let dt = path.grid.dt();
    let mut out = [0.0; 3];
    for r in 0..3 {
        let s: Vec<CMat> = path.values.iter().map(|x| x[r + 1].clone()).collect();
        let d = grid::derivative(&s, dt);
        for (j, x) in path.values.iter().enumerate() {
            out[r] = f64::max(out[r], frob(&(&d[j] + bracket_row(x, r + 1, 3))));
        }
    }
    Ok(out)
}

/// Reduced flow `dX/dt = −X × X` (temporal gauge, `X₀ = 0`).
fn reduced_rhs(x: &[CMat; 7]) -> [CMat; 7] {
    let mut full: Vec<CMat> = Vec::with_capacity(8);
    full.push(zeros(x[0].nrows()));
    full.extend(x.iter().cloned());
    let v = rhs_unchecked(&full, 7);
    std::array::from_fn(|i| v[i].clone())
}

fn axpy7(x: &[CMat; 7], h: f64, d: &[CMat; 7]) -> [CMat; 7] {
    std::array::from_fn(|i| &x[i] + &d[i] * c64(h, 0.0))
}

fn rk4_reduced(x: &[CMat; 7], h: f64) -> [CMat; 7] {
    let k1 = reduced_rhs(x);
    let k2 = reduced_rhs(&axpy7(x, h / 2.0, &k1));
    let k3 = reduced_rhs(&axpy7(x, h / 2.0, &k2));
    let k4 = reduced_rhs(&axpy7(x, h, &k3));
    std::array::from_fn(|i| {
        &x[i] + (&k1[i] + (&k2[i] + &k3[i]) * c64(2.0, 0.0) + &k4[i]) * c64(h / 6.0, 0.0)
    })
}

fn finite7(x: &[CMat; 7]) -> bool {
    x.iter().all(|m| m.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
}

fn embed7(k: usize, x: &[CMat; 7]) -> [CMat; 8] {
    std::array::from_fn(|i| if i == 0 { zeros(k) } else { x[i - 1].clone() })
}

/// Levels of step halving used to locate a threshold crossing.
const REFINE_LEVELS: i32 = 45;

/// RK4 on the reduced flow from `X(0) = ξ` over `[0, t_end]` with `n` steps,
/// using the default blow-up threshold.
pub fn integrate_reduced(xi: &[CMat; 7], t_end: f64, n: usize) -> Result<Integration> {
    integrate_reduced_with(xi, t_end, n, BLOW_UP_THRESHOLD)
}

/// As [`integrate_reduced`] with an explicit threshold. A step whose result
/// exceeds the threshold is retried from the last safe state with halved
/// steps; the blow-up time is located once the step falls below
/// `dt · 2^-45`. Non-finite values that persist at that resolution are a
/// numerical failure.
pub fn integrate_reduced_with(
    xi: &[CMat; 7],
    t_end: f64,
    n: usize,
    threshold: f64,
) -> Result<Integration> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::domain(format!("integration length must be positive (got {t_end})")));
    }
    if n < 16 {
        return Err(Error::domain(format!("grid size must be >= 16 (got {n})")));
    }
    let k = check_k(xi)?;
    if !finite7(xi) {
        return Err(Error::numerical("initial value is not finite"));
    }
    let flavor = if xi.iter().all(|x| linalg::is_anti_hermitian(x, 1e-12 * frob(x).max(1.0))) {
        Flavor::Compact
    } else {
        Flavor::Complexified
    };
    let grid = Grid::new(0.0, t_end, n)?;
    let dt = grid.dt();
    let h_min = dt * 2f64.powi(-REFINE_LEVELS);
    let mut values = Vec::with_capacity(n + 1);
    values.push(embed7(k, xi));
    let mut state = xi.clone();
    for j in 0..n {
        let (t0, target) = (grid.t(j), grid.t(j + 1));
        let mut t = t0;
        let mut h = dt;
        while t < target {
            let step = h.min(target - t);
            let trial = rk4_reduced(&state, step);
            let finite = finite7(&trial);
            let norm = if finite { sample_norm(&trial) } else { f64::INFINITY };
            if finite && norm <= threshold {
                state = trial;
                t = if step == target - t { target } else { t + step };
                h = (2.0 * step).min(dt);
                continue;
            }
            if step > h_min {
                h = step / 2.0;
                continue;
            }
            if !finite {
                return Err(Error::numerical(format!(
                    "non-finite state at t = {t:.6} below the blow-up threshold"
                )));
            }
            let truncated_grid = Grid { start: 0.0, end: grid.t(j), n: j };
            let truncated_path =
                NahmPath { grid: truncated_grid, k, flavor, values: std::mem::take(&mut values) };
            return Ok(Integration::BlowUp(BlowUpReport {
                t_star: t + step,
                max_norm: norm,
                truncated_path,
            }));
        }
        values.push(embed7(k, &state));
    }
    Ok(Integration::Complete(NahmPath { grid, k, flavor, values }))
}

fn check_gauge_path(g: &[CMat], path: &NahmPath) -> Result<()> {
    if g.len() != path.values.len() {
        return Err(Error::dim(format!(
            "gauge has {} samples but the path has {}",
            g.len(),
            path.values.len()
        )));
    }
    if g.iter().any(|m| m.nrows() != path.k || m.ncols() != path.k) {
        return Err(Error::dim(format!("gauge samples must be {0}x{0}", path.k)));
    }
    Ok(())
}

/// Gauge action with `dg/dt` by second-order finite differences.
pub fn gauge_act(g: &[CMat], path: &NahmPath) -> Result<NahmPath> {
    check_gauge_path(g, path)?;
    let dg = grid::derivative(g, path.grid.dt());
    gauge_act_with_derivative(g, &dg, path)
}

/// Gauge action with a supplied derivative `dg/dt`.
pub fn gauge_act_with_derivative(g: &[CMat], dg: &[CMat], path: &NahmPath) -> Result<NahmPath> {
    check_gauge_path(g, path)?;
    if dg.len() != g.len() {
        return Err(Error::dim("gauge derivative length differs from gauge length"));
    }
    let values = path
        .values
        .par_iter()
        .zip(g.par_iter().zip(dg.par_iter()))
        .map(|(x, (g, dg))| {
            let gi = linalg::inverse(g)?;
            Ok(std::array::from_fn(|i| {
                let conj = g * &x[i] * &gi;
                if i == 0 {
                    conj - dg * &gi
                } else {
                    conj
                }
            }))
        })
        .collect::<Result<Vec<[CMat; 8]>>>()?;
    let unitary = g.iter().all(|m| frob(&(m.adjoint() * m - eye(path.k))) <= 1e-8);
    let flavor = if path.flavor == Flavor::Compact && unitary {
        Flavor::Compact
    } else {
        Flavor::Complexified
    };
    Ok(NahmPath { grid: path.grid.clone(), k: path.k, flavor, values })
}

/// Result of [`temporal_gauge`].
#[derive(Clone, Debug)]
pub struct TemporalGauge {
    /// The gauge `g` with `g′ = gX₀`, `g(0) = Id`.
    pub g: Vec<CMat>,
    /// `g · X`, whose zeroth slot vanishes.
    pub path: NahmPath,
    /// Largest `‖g*g − Id‖` seen before re-orthonormalization.
    pub unitarity_defect: f64,
}

/// Nearest unitary matrix (polar factor).
fn polar_unitary(g: &CMat) -> CMat {
    let svd = g.clone().svd(true, true);
    svd.u.expect("requested u") * svd.v_t.expect("requested v_t")
}

/// Solve `g′ = gX₀`, `g(0) = Id` by RK4 (cubic midpoint values of `X₀`),
/// projecting onto the unitary group after every step, and apply `g`.
/// Fails if the pre-projection unitarity defect exceeds `max_defect`.
pub fn temporal_gauge(path: &NahmPath, max_defect: f64) -> Result<TemporalGauge> {
    if path.flavor != Flavor::Compact {
        return Err(Error::domain("temporal gauge needs a compact (u(k)) path"));
    }
    let k = path.k;
    let x0 = path.slot(0);
    let dt = path.grid.dt();
    let half = c64(dt / 2.0, 0.0);
    let mut g = Vec::with_capacity(x0.len());
    g.push(eye(k));
    let mut defect: f64 = 0.0;
    for j in 0..path.grid.n {
        let a0 = &x0[j];
        let a1 = &x0[j + 1];
        let am = grid::midpoint_cubic(&x0, j);
        let gj = &g[j];
        let k1 = gj * a0;
        let k2 = (gj + &k1 * half) * &am;
        let k3 = (gj + &k2 * half) * &am;
        let k4 = (gj + &k3 * c64(dt, 0.0)) * a1;
        let next = gj + (&k1 + (&k2 + &k3) * c64(2.0, 0.0) + &k4) * c64(dt / 6.0, 0.0);
        defect = defect.max(frob(&(next.adjoint() * &next - eye(k))));
        g.push(polar_unitary(&next));
    }
    if defect > max_defect {
        return Err(Error::numerical(format!(
            "temporal gauge lost unitarity: defect {defect:e} exceeds {max_defect:e}"
        )));
    }
    let dg: Vec<CMat> = g.iter().zip(&x0).map(|(g, a)| g * a).collect();
    let mut out = gauge_act_with_derivative(&g, &dg, path)?;
    out.flavor = Flavor::Compact;
    Ok(TemporalGauge { g, path: out, unitarity_defect: defect })
}

/// χ(X) = (g(1), X₁(0), …, X₇(0)) with `g` from [`temporal_gauge`].
pub fn chi_map(path: &NahmPath, max_defect: f64) -> Result<(CMat, [CMat; 7])> {
    let tg = temporal_gauge(path, max_defect)?;
    let g1 = tg.g.last().expect("non-empty gauge").clone();
    let x0 = &path.values[0];
    Ok((g1, std::array::from_fn(|i| x0[i + 1].clone())))
}

/// `t ↦ εX(εt)` on the same grid, resampled by four-point interpolation.
pub fn scale_solution(path: &NahmPath, eps: f64) -> Result<NahmPath> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::domain(format!("scale factor must lie in (0, 1] (got {eps})")));
    }
    let grid = path.grid.clone();
    let slots: Vec<Vec<CMat>> = (0..8).map(|i| path.slot(i)).collect();
    let s = c64(eps, 0.0);
    let values = grid
        .times()
        .into_iter()
        .map(|t| {
            let u = grid.start + eps * (t - grid.start);
            std::array::from_fn(|i| grid::interp_cubic(&slots[i], &grid, u) * s)
        })
        .collect();
    Ok(NahmPath { grid, k: path.k, flavor: path.flavor, values })
}

/// Embed a quaternionic field along the standard associative plane
/// `e₁e₂e₃`: `X₀..X₃ = Y₀..Y₃`, `X₄..X₇ = 0`.
pub fn embed_quaternionic(q: &QuaternionicPath) -> NahmPath {
    let k = q.k;
    let values = q
        .values
        .iter()
        .map(|y| std::array::from_fn(|i| if i < 4 { y[i].clone() } else { zeros(k) }))
        .collect();
    NahmPath { grid: q.grid.clone(), k, flavor: q.flavor, values }
}

/// The su(2) solution `Xᵢ(t) = σᵢ/(t − 1)`, `i = 1, 2, 3`, other slots zero.
pub fn su2_blowup_exact(t: f64) -> [CMat; 8] {
    let s = su2_basis();
    let c = c64(1.0 / (t - 1.0), 0.0);
    std::array::from_fn(|i| if (1..=3).contains(&i) { &s[i - 1] * c } else { zeros(2) })
}

/// Initial value `ξ = (−σ₁, −σ₂, −σ₃, 0, 0, 0, 0)` of [`su2_blowup_exact`].
pub fn su2_blowup_initial() -> [CMat; 7] {
    let x = su2_blowup_exact(0.0);
    std::array::from_fn(|i| x[i + 1].clone())
}
