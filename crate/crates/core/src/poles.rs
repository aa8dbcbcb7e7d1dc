//! Nahm complexes with simple poles at both ends, Nahm quadruples, the
//! classification map κ and the rational maps of `(Bᵢ, w)`.
//!
//! # Construction of a complex from a quadruple
//!
//! Complex-symmetric Lanczos on `(B₁, w)` gives a complex orthogonal `Q`
//! (`QᵀQ = Id`, first column `w/√(wᵀw)`) with every `Tᵢ = QᵀBᵢQ`
//! symmetric tridiagonal; equal filtrations force the subdiagonal of `Tᵢ`
//! to be a constant multiple (`1, γ, μ`) of that of `T₁`. With the polar
//! factorization `Q = O·exp(L)` (`O` unitary, `L` Hermitian) the gauge is
//! `𝔤(t) = O·exp(ρ(t)L)·p(t)` and
//!
//! `βᵢ = 𝔤Tᵢ𝔤⁻¹`, `α = −½𝔤′𝔤⁻¹`,
//!
//! which satisfies the complex rows identically. `p = diag(exp(dᵢφ + ψᵢχ))`
//! with `dᵢ = (k−1)/2 − (i−1)`, `φ = log t` and `χ = 1` near `t = 0`; the
//! offsets `ψᵢ` scale the subdiagonal there to `√(j(k−j))/(2C)`,
//! `C = √(1 + |γ|² + |μ|²)`, so the residues are `a = O a₀ Oᵀ` and
//! `bᵢ = sᵢ O b₀ Oᵀ` with `s = (1, γ, μ)/C`. The blends `ρ`, `φ`, `χ` are
//! built from a C^∞ smoothstep on `[0.1, 0.4]` and mirrored about `½`, so
//! `𝔤(1−t) = 𝔤(t)^{-T}` and the reflection symmetry holds exactly; on
//! `[0.4, 0.6]` the gauge is `Q` and `βᵢ(½) = Bᵢ`. For `t ≤ 0.1`, `α` is
//! exactly `a/t` and `tβᵢ` is quadratic in `t`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{self, Grid};
use crate::kempf_ness::{self, DecoupledPath, HermitianPath, SolveReport, SolverOptions};
use crate::lie::principal_sl2;
use crate::linalg::{self, c64, comm, eye, frob, zeros, CMat, CVec};

/// Relative singular-value threshold for Krylov ranks.
pub const RANK_TOL: f64 = 1e-8;

/// End of the pole region: for `t ≤ POLE_ZONE` the construction is in
/// its exact pole form.
const POLE_ZONE: f64 = 0.1;
const BLEND_WIDTH: f64 = 0.3;

// ---------------------------------------------------------------------------
// Quadruples

/// `(B₁, B₂, B₃, w)` with symmetric `Bᵢ`.
#[derive(Clone, Debug)]
pub struct NahmQuadruple {
    pub b: [CMat; 3],
    pub w: CVec,
}

impl NahmQuadruple {
    /// Checks shapes only; see [`validate_quadruple`] for the defining
    /// clauses.
    pub fn new(b: [CMat; 3], w: CVec) -> Result<Self> {
        let k = w.len();
        if k == 0 {
            return Err(Error::dim("quadruple vector must be nonempty"));
        }
        if b.iter().any(|m| m.nrows() != k || m.ncols() != k) {
            return Err(Error::dim(format!("quadruple matrices must be {k}x{k}")));
        }
        Ok(NahmQuadruple { b, w })
    }

    pub fn k(&self) -> usize {
        self.w.len()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadrupleReport {
    /// `maxᵢ ‖Bᵢ − Bᵢᵀ‖`.
    pub asymmetry: f64,
    /// `max ‖[Bᵢ, Bⱼ]‖`.
    pub commutator: f64,
    /// Rank of `[w, Bᵢw, …, Bᵢᵏ⁻¹w]` for each `i`.
    pub krylov_ranks: [usize; 3],
    /// First `l` (1-based) at which the Krylov spans of `B₁` and some `Bᵢ`
    /// differ, if any.
    pub filtration_mismatch: Option<usize>,
    /// One message per failed clause.
    pub failures: Vec<String>,
}

impl QuadrupleReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Symmetry, commutation (both within `tol`), cyclicity and equal
/// filtrations of the Krylov spaces.
pub fn validate_quadruple(q: &NahmQuadruple, tol: f64) -> QuadrupleReport {
    let k = q.k();
    let asymmetry = q.b.iter().map(|m| frob(&(m - m.transpose()))).fold(0.0, f64::max);
    let commutator = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| frob(&comm(&q.b[i], &q.b[j])))
        .fold(0.0, f64::max);
    let kry: Vec<CMat> = q.b.iter().map(|m| linalg::krylov(m, &q.w, k)).collect();
    let krylov_ranks = std::array::from_fn(|i| linalg::rank(&kry[i], RANK_TOL));
    let mut filtration_mismatch = None;
    'outer: for l in 1..=k {
        for i in 1..3 {
            let mut cat = CMat::zeros(k, 2 * l);
            cat.columns_mut(0, l).copy_from(&kry[0].columns(0, l));
            cat.columns_mut(l, l).copy_from(&kry[i].columns(0, l));
            let r = linalg::rank(&cat, RANK_TOL);
            if r != linalg::rank(&kry[0].columns(0, l).into_owned(), RANK_TOL) {
                filtration_mismatch = Some(l);
                break 'outer;
            }
        }
    }
    let mut failures = Vec::new();
    if asymmetry > tol {
        failures.push(format!("B matrices are not symmetric (‖B − Bᵀ‖ = {asymmetry:e})"));
    }
    if commutator > tol {
        failures.push(format!("B matrices do not commute (‖[Bᵢ, Bⱼ]‖ = {commutator:e})"));
    }
    for (i, &r) in krylov_ranks.iter().enumerate() {
        if r < k {
            failures.push(format!("w is not cyclic for B{} (Krylov rank {r} < {k})", i + 1));
        }
    }
    if let Some(l) = filtration_mismatch {
        failures.push(format!("Krylov filtrations differ at level {l}"));
    }
    QuadrupleReport { asymmetry, commutator, krylov_ranks, filtration_mismatch, failures }
}

fn ensure_valid(q: &NahmQuadruple, tol: f64) -> Result<()> {
    let rep = validate_quadruple(q, tol);
    if rep.is_valid() {
        Ok(())
    } else {
        Err(Error::domain(format!("invalid Nahm quadruple: {}", rep.failures.join("; "))))
    }
}

// ---------------------------------------------------------------------------
// Rational maps

/// `p(z)/q(z)` with ascending coefficients; `q` monic of degree `k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RationalMapRep {
    pub p: Vec<Complex64>,
    pub q: Vec<Complex64>,
}

impl RationalMapRep {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        linalg::poly_eval(&self.p, z) / linalg::poly_eval(&self.q, z)
    }

    /// Largest coefficient difference, padding the shorter list with zeros.
    pub fn distance(&self, other: &RationalMapRep) -> f64 {
        let diff = |a: &[Complex64], b: &[Complex64]| {
            let zero = c64(0.0, 0.0);
            (0..a.len().max(b.len()))
                .map(|i| (a.get(i).unwrap_or(&zero) - b.get(i).unwrap_or(&zero)).norm())
                .fold(0.0, f64::max)
        };
        diff(&self.p, &other.p).max(diff(&self.q, &other.q))
    }
}

/// `wᵀ(z − B)⁻¹w = p(z)/q(z)` with `q = det(z − B)` and
/// `p = wᵀ adj(z − B) w`. Fails unless `w` is cyclic for `B`.
pub fn rational_map(b: &CMat, w: &CVec) -> Result<RationalMapRep> {
    let k = w.len();
    if k == 0 || b.nrows() != k || b.ncols() != k {
        return Err(Error::dim("rational map needs a k x k matrix and a length-k vector"));
    }
    if linalg::rank(&linalg::krylov(b, w, k), RANK_TOL) < k {
        return Err(Error::domain("w is not cyclic for B, so p and q share a root"));
    }
    let (q, ms) = linalg::faddeev_leverrier(b);
    let mut p = vec![c64(0.0, 0.0); k];
    for (m, mm) in ms.iter().enumerate() {
        p[k - 1 - m] = (w.transpose() * mm * w)[(0, 0)];
    }
    Ok(RationalMapRep { p, q })
}

/// `τ(z − p − qs)/((z − p)(z − p − qs) − q²)`, the map of
/// `B = [[p, q], [q, p + qs]]`, `w = √τ e₁`.
pub fn rational_map_k2(p: Complex64, q: Complex64, tau: Complex64, s: Complex64) -> Result<RationalMapRep> {
    if q.norm() == 0.0 || tau.norm() == 0.0 {
        return Err(Error::domain("k = 2 rational map needs q ≠ 0 and τ ≠ 0"));
    }
    let r = p + q * s;
    Ok(RationalMapRep { p: vec![-tau * r, tau], q: vec![p * r - q * q, -(p + r), c64(1.0, 0.0)] })
}

/// The pair `(B, w)` whose map is [`rational_map_k2`].
pub fn k2_pair(p: Complex64, q: Complex64, tau: Complex64, s: Complex64) -> (CMat, CVec) {
    let b = CMat::from_row_slice(2, 2, &[p, q, q, p + q * s]);
    (b, CVec::from_vec(vec![tau.sqrt(), c64(0.0, 0.0)]))
}

// ---------------------------------------------------------------------------
// Complexes

/// A Nahm complex sampled on `[ε, 1 − ε]` with its pole data.
#[derive(Clone, Debug)]
pub struct NahmComplexData {
    /// Samples of `(α, β)` with derivative samples attached.
    pub path: DecoupledPath,
    pub epsilon: f64,
    /// Residue of `α` at `t = 0`.
    pub a: CMat,
    /// Residues of `βᵢ` at `t = 0`.
    pub b: [CMat; 3],
    pub s: [Complex64; 3],
    /// Lowest-weight unit vector of `a`.
    pub v: CVec,
}

/// C^∞ smoothstep from 0 at `t = 0.1` to 1 at `t = 0.4`, with its first
/// two derivatives in `t`.
fn smoothstep(t: f64) -> (f64, f64, f64) {
    let x = (t - POLE_ZONE) / BLEND_WIDTH;
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let s = 1.0 / (1.0 + (1.0 / x - 1.0 / (1.0 - x)).exp());
    let h = 1.0 / (x * x) + 1.0 / ((1.0 - x) * (1.0 - x));
    let dh = -2.0 / (x * x * x) + 2.0 / ((1.0 - x) * (1.0 - x) * (1.0 - x));
    let d1 = s * (1.0 - s) * h;
    let d2 = d1 * (1.0 - 2.0 * s) * h + s * (1.0 - s) * dh;
    (s, d1 / BLEND_WIDTH, d2 / (BLEND_WIDTH * BLEND_WIDTH))
}

/// Profiles on `(0, ½]`: `(ρ, ρ′, ρ″)`, `(φ, φ′, φ″)`, `(χ, χ′, χ″)`.
struct Profiles {
    rho: [f64; 3],
    phi: [f64; 3],
    chi: [f64; 3],
}

fn profiles(t: f64) -> Profiles {
    let (s, ds, dds) = smoothstep(t);
    let lt = t.ln();
    Profiles {
        rho: [s, ds, dds],
        phi: [(1.0 - s) * lt, -ds * lt + (1.0 - s) / t, -dds * lt - 2.0 * ds / t - (1.0 - s) / (t * t)],
        chi: [1.0 - s, -ds, -dds],
    }
}

/// Lanczos data of a quadruple.
struct Lanczos {
    q: CMat,
    t: [CMat; 3],
    /// Subdiagonal ratios `(1, γ, μ)`.
    ratios: [Complex64; 3],
    sigma: Complex64,
}

fn lanczos(quad: &NahmQuadruple, tol: f64) -> Result<Lanczos> {
    let k = quad.k();
    let dot = |x: &CVec, y: &CVec| (x.transpose() * y)[(0, 0)];
    let breakdown = |what: &str| {
        Error::domain(format!(
            "complex-symmetric Lanczos breaks down ({what} is isotropic); apply an O(k, ℂ) change of basis first"
        ))
    };
    let ww = dot(&quad.w, &quad.w);
    let scale = quad.w.norm_squared();
    if ww.norm() <= 1e-12 * scale {
        return Err(breakdown("w"));
    }
    let sigma = ww.sqrt();
    let mut q = CMat::zeros(k, k);
    q.set_column(0, &(&quad.w / sigma));
    for j in 1..k {
        let mut r = &quad.b[0] * q.column(j - 1);
        // Two passes of complex-orthogonal Gram–Schmidt.
        for _ in 0..2 {
            for i in 0..j {
                let qi = q.column(i).into_owned();
                r -= &qi * dot(&qi, &r);
            }
        }
        let rr = dot(&r, &r);
        if rr.norm() <= 1e-12 * r.norm_squared().max(1e-300) || r.norm() <= 1e-12 * frob(&quad.b[0]).max(1.0) {
            return Err(breakdown("a Lanczos residual"));
        }
        q.set_column(j, &(r / rr.sqrt()));
    }
    let qt = q.transpose();
    let t: [CMat; 3] = std::array::from_fn(|i| &qt * &quad.b[i] * &q);
    let bscale = quad.b.iter().map(frob).fold(1.0, f64::max);
    for (i, ti) in t.iter().enumerate() {
        for r in 0..k {
            for c in 0..k {
                if r.abs_diff(c) > 1 && ti[(r, c)].norm() > tol * bscale {
                    return Err(Error::domain(format!(
                        "B{} is not tridiagonal in the Krylov basis of (B1, w) (entry {:e})",
                        i + 1,
                        ti[(r, c)].norm()
                    )));
                }
            }
        }
    }
    let mut ratios = [c64(1.0, 0.0); 3];
    if k > 1 {
        for i in 1..3 {
            ratios[i] = t[i][(1, 0)] / t[0][(1, 0)];
            for j in 1..k - 1 {
                let rj = t[i][(j + 1, j)] / t[0][(j + 1, j)];
                if (rj - ratios[i]).norm() > tol * (1.0 + ratios[i].norm()) {
                    return Err(Error::domain(format!(
                        "subdiagonal ratio of B{} is not constant ({} vs {})",
                        i + 1,
                        rj,
                        ratios[i]
                    )));
                }
            }
        }
    }
    Ok(Lanczos { q, t, ratios, sigma })
}

/// Polar factorization `Q = O·exp(L)` with `O` unitary, `L` Hermitian.
fn polar_log(q: &CMat) -> Result<(CMat, CMat)> {
    let l = linalg::logm_pd(&linalg::herm_part(&(q.adjoint() * q)))? * c64(0.5, 0.0);
    let l = linalg::herm_part(&l);
    let o = q * linalg::expm_herm(&(-&l));
    Ok((o, l))
}

/// Build the Nahm complex of a valid quadruple on `[ε, 1 − ε]` with `n`
/// (even) intervals.
pub fn quadruple_to_complex(quad: &NahmQuadruple, epsilon: f64, n: usize, tol: f64) -> Result<NahmComplexData> {
    if !(epsilon > 0.0 && epsilon < 0.25) {
        return Err(Error::domain(format!("epsilon must lie in (0, 1/4) (got {epsilon})")));
    }
    if n < 16 || !n.is_multiple_of(2) {
        return Err(Error::domain(format!("grid size must be even and >= 16 (got {n})")));
    }
    ensure_valid(quad, tol)?;
    let k = quad.k();
    let lz = lanczos(quad, tol)?;
    let (o, l) = polar_log(&lz.q)?;
    let oi = o.adjoint();
    let w_gen = &o * &l * &oi;
    let sl2 = principal_sl2(k)?;
    let cnorm = lz.ratios.iter().map(|r| r.norm_sqr()).sum::<f64>().sqrt();

    let d: Vec<f64> = (0..k).map(|i| (k as f64 - 1.0) / 2.0 - i as f64).collect();
    let mut psi = vec![-lz.sigma.ln(); k];
    for j in 1..k {
        let ell = ((j * (k - j)) as f64).sqrt() / 2.0;
        psi[j] = psi[j - 1] + (c64(ell / cnorm, 0.0) / lz.t[0][(j, j - 1)]).ln();
    }

    let grid = Grid::new(epsilon, 1.0 - epsilon, n)?;
    let half = n / 2;
    let mhalf = c64(-0.5, 0.0);
    let mut alpha = Vec::with_capacity(n + 1);
    let mut d_alpha = Vec::with_capacity(n + 1);
    let mut beta = Vec::with_capacity(n + 1);
    let mut d_beta = Vec::with_capacity(n + 1);
    for j in 0..=half {
        let t = if j == half { 0.5 } else { grid.t(j) };
        let pr = profiles(t);
        let e = linalg::expm_herm(&(&l * c64(pr.rho[0], 0.0)));
        let r = &o * &e;
        let ri = linalg::expm_herm(&(&l * c64(-pr.rho[0], 0.0))) * &oi;
        let expo: Vec<Complex64> = (0..k).map(|m| c64(d[m] * pr.phi[0], 0.0) + psi[m] * pr.chi[0]).collect();
        let dd: Vec<Complex64> = (0..k).map(|m| c64(d[m] * pr.phi[1], 0.0) + psi[m] * pr.chi[1]).collect();
        let ddd: Vec<Complex64> = (0..k).map(|m| c64(d[m] * pr.phi[2], 0.0) + psi[m] * pr.chi[2]).collect();
        let conj = |m: &CMat| &r * m * &ri;
        let rw = &w_gen * c64(pr.rho[1], 0.0);
        let dmat = CMat::from_diagonal(&CVec::from_vec(dd.clone()));
        let d2mat = CMat::from_diagonal(&CVec::from_vec(ddd));
        let rdr = conj(&dmat);
        alpha.push((&rw + &rdr) * mhalf);
        d_alpha.push((&w_gen * c64(pr.rho[2], 0.0) + comm(&rw, &rdr) + conj(&d2mat)) * mhalf);
        let mut bj: [CMat; 3] = std::array::from_fn(|_| zeros(k));
        let mut dbj: [CMat; 3] = std::array::from_fn(|_| zeros(k));
        for i in 0..3 {
            let mut m = zeros(k);
            let mut dm = zeros(k);
            for a in 0..k {
                for b in 0..k {
                    let tab = lz.t[i][(a, b)];
                    if tab.norm() == 0.0 {
                        continue;
                    }
                    let v = tab * (expo[a] - expo[b]).exp();
                    m[(a, b)] = v;
                    dm[(a, b)] = v * (dd[a] - dd[b]);
                }
            }
            bj[i] = conj(&m);
            dbj[i] = comm(&rw, &bj[i]) + conj(&dm);
        }
        beta.push(bj);
        d_beta.push(dbj);
    }
    // Mirror: X(1 − t) = X(t)ᵀ, X′(1 − t) = −X′(t)ᵀ.
    for j in (half + 1)..=n {
        let m = n - j;
        alpha.push(alpha[m].transpose());
        d_alpha.push(-d_alpha[m].transpose());
        beta.push(std::array::from_fn(|i| beta[m][i].transpose()));
        d_beta.push(std::array::from_fn(|i| -d_beta[m][i].transpose()));
    }
    let mut path = DecoupledPath::new(grid, alpha, beta)?;
    path.d_alpha = Some(d_alpha);
    path.d_beta = Some(d_beta);

    let ot = o.transpose();
    let a = &o * &sl2.a0 * &ot;
    let s: [Complex64; 3] = std::array::from_fn(|i| lz.ratios[i] / cnorm);
    let b0 = &o * &sl2.b0 * &ot;
    let b = std::array::from_fn(|i| &b0 * s[i]);
    let v = o.column(0).into_owned();
    Ok(NahmComplexData { path, epsilon, a, b, s, v })
}

/// Index of the sample at `t = ½`, requiring a grid symmetric about `½`.
fn middle_index(g: &Grid) -> Result<usize> {
    if (g.start + g.end - 1.0).abs() > 1e-12 || !g.n.is_multiple_of(2) {
        return Err(Error::domain("grid must be symmetric about 1/2 with an even number of intervals"));
    }
    Ok(g.n / 2)
}

#[derive(Clone, Debug, Serialize)]
pub struct ReflectionReport {
    /// `sup ‖α(1−t) − α(t)ᵀ‖`.
    pub alpha: f64,
    /// `sup ‖βᵢ(1−t) − βᵢ(t)ᵀ‖`.
    pub beta: [f64; 3],
}

impl ReflectionReport {
    pub fn max(&self) -> f64 {
        self.beta.iter().cloned().fold(self.alpha, f64::max)
    }
}

pub fn check_reflection(p: &DecoupledPath) -> Result<ReflectionReport> {
    middle_index(&p.grid)?;
    let n = p.grid.n;
    let mut rep = ReflectionReport { alpha: 0.0, beta: [0.0; 3] };
    for j in 0..=n {
        rep.alpha = rep.alpha.max(frob(&(&p.alpha[n - j] - p.alpha[j].transpose())));
        for i in 0..3 {
            rep.beta[i] = rep.beta[i].max(frob(&(&p.beta[n - j][i] - p.beta[j][i].transpose())));
        }
    }
    Ok(rep)
}

/// `sup_t |Tr βᵢ(t) − Tr βᵢ(t₀)|`, maximized over `i`.
pub fn trace_drift(p: &DecoupledPath) -> f64 {
    let mut out: f64 = 0.0;
    for i in 0..3 {
        let t0 = p.beta[0][i].trace();
        for b in &p.beta {
            out = out.max((b[i].trace() - t0).norm());
        }
    }
    out
}

/// Limit of `t·X(t)` at `t → 0` from the values at `ε`, `2ε`, `4ε`
/// (quadratic Richardson extrapolation of cubic interpolants).
fn richardson(x: &[CMat], g: &Grid) -> Result<CMat> {
    let e = g.start;
    if !(e > 0.0) || 4.0 * e > g.end {
        return Err(Error::domain("residue extrapolation needs samples at ε, 2ε and 4ε"));
    }
    let tx: Vec<CMat> = x.iter().zip(g.times()).map(|(m, t)| m * c64(t, 0.0)).collect();
    let f = |t: f64| grid::interp_cubic(&tx, g, t);
    Ok(f(e) * c64(8.0 / 3.0, 0.0) - f(2.0 * e) * c64(2.0, 0.0) + f(4.0 * e) * c64(1.0 / 3.0, 0.0))
}

#[derive(Clone, Debug)]
pub struct ResidueReport {
    /// Extracted residues in the sampled frame.
    pub a: CMat,
    pub b: [CMat; 3],
    /// Weights in the frame where `a` is diagonal ascending and the
    /// dominant `bᵢ` has real positive subdiagonal.
    pub s_raw: [Complex64; 3],
    /// `s_raw` rescaled to unit length.
    pub s: [Complex64; 3],
    /// `Σ |s_raw|²`.
    pub weight_sum: f64,
    /// `‖a′ − a₀‖ + maxᵢ ‖bᵢ′ − sᵢ b₀‖` after the gauge.
    pub fit_residual: f64,
    /// `maxᵢ ‖bᵢ − 2[a, bᵢ]‖`.
    pub pole_identity_b: f64,
    /// `‖−a + Σᵢ [bᵢ, bᵢ*]‖`.
    pub pole_identity_a: f64,
}

/// Residues at `t = 0` matched to `(a₀, sᵢb₀)` after a unitary gauge.
/// Fails if the fit residual exceeds `tol`.
pub fn extract_residues(p: &DecoupledPath, tol: f64) -> Result<ResidueReport> {
    let k = p.k;
    let a = richardson(&p.alpha, &p.grid)?;
    let b: [CMat; 3] = std::array::from_fn(|i| richardson(&p.beta_slot(i), &p.grid)).try_map_result()?;
    let sl2 = principal_sl2(k)?;
    let (lam, u) = linalg::herm_eig(&linalg::herm_part(&a));
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| lam[x].partial_cmp(&lam[y]).unwrap());
    let mut us = CMat::zeros(k, k);
    for (c, &o) in order.iter().enumerate() {
        us.set_column(c, &u.column(o));
    }
    let rot = |m: &CMat| us.adjoint() * m * &us;
    let bt: Vec<CMat> = b.iter().map(rot).collect();
    let dom = (0..3).max_by(|&x, &y| frob(&bt[x]).partial_cmp(&frob(&bt[y])).unwrap()).unwrap();
    let mut phase = vec![c64(1.0, 0.0); k];
    for m in 1..k {
        let e = bt[dom][(m, m - 1)];
        phase[m] = if e.norm() > 0.0 { phase[m - 1] * e / e.norm() } else { phase[m - 1] };
    }
    let ph = CMat::from_diagonal(&CVec::from_vec(phase));
    let fix = |m: &CMat| ph.adjoint() * m * &ph;
    let at = fix(&rot(&a));
    let bt: Vec<CMat> = bt.iter().map(fix).collect();
    let b0n = frob(&sl2.b0).powi(2);
    let s_raw: [Complex64; 3] = std::array::from_fn(|i| {
        if k == 1 {
            c64(0.0, 0.0)
        } else {
            (sl2.b0.adjoint() * &bt[i]).trace() / b0n
        }
    });
    let fit_a = frob(&(&at - &sl2.a0));
    let fit_b = (0..3).map(|i| frob(&(&bt[i] - &sl2.b0 * s_raw[i]))).fold(0.0, f64::max);
    let fit_residual = fit_a + fit_b;
    let weight_sum: f64 = s_raw.iter().map(|s| s.norm_sqr()).sum();
    let norm = weight_sum.sqrt();
    let s = std::array::from_fn(|i| if norm > 0.0 { s_raw[i] / norm } else { s_raw[i] });
    let pole_identity_b = b.iter().map(|bi| frob(&(bi - comm(&a, bi) * c64(2.0, 0.0)))).fold(0.0, f64::max);
    let mut line = -&a;
    for bi in &b {
        line += comm(bi, &bi.adjoint());
    }
    let pole_identity_a = frob(&line);
    if fit_residual > tol {
        return Err(Error::numerical(format!(
            "residues do not match the principal sl2 form (fit residual {fit_residual:e} > {tol:e})"
        )));
    }
    Ok(ResidueReport { a, b, s_raw, s, weight_sum, fit_residual, pole_identity_b, pole_identity_a })
}

trait TryMapResult<T, const N: usize> {
    fn try_map_result(self) -> Result<[T; N]>;
}

impl<T, const N: usize> TryMapResult<T, N> for [Result<T>; N] {
    fn try_map_result(self) -> Result<[T; N]> {
        let v: Vec<T> = self.into_iter().collect::<Result<_>>()?;
        Ok(v.try_into().unwrap_or_else(|_| unreachable!()))
    }
}

/// κ: integrate `s′ = −2αs` from `s(ε) = ε^{(k−1)/2} v` to `t = ½` and
/// return `(βᵢ(½), s(½))`. Fails if the residue of `α` does not have the
/// spectrum of `a₀` within `tol`.
pub fn complex_to_quadruple(c: &NahmComplexData, tol: f64) -> Result<NahmQuadruple> {
    let p = &c.path;
    let k = p.k;
    let mid = middle_index(&p.grid)?;
    if (c.v.norm() - 1.0).abs() > 1e-10 || c.v.len() != k {
        return Err(Error::domain("v must be a unit vector of length k"));
    }
    let a = richardson(&p.alpha, &p.grid)?;
    let sl2 = principal_sl2(k)?;
    let (lam, _) = linalg::herm_eig(&linalg::herm_part(&a));
    let mut lam: Vec<f64> = lam.iter().cloned().collect();
    lam.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let spec = lam.iter().enumerate().map(|(i, &l)| (l - sl2.a0[(i, i)].re).abs()).fold(0.0, f64::max);
    if spec > tol || frob(&(&a - a.adjoint())) > tol {
        return Err(Error::domain(format!(
            "residue of α does not match a₀ (spectral distance {spec:e})"
        )));
    }
    let dt = p.grid.dt();
    let da = p.d_alpha.clone().unwrap_or_else(|| grid::derivative4(&p.alpha, dt));
    let m2 = c64(-2.0, 0.0);
    let mut s = &c.v * c64(p.grid.start.powf((k as f64 - 1.0) / 2.0), 0.0);
    for j in 0..mid {
        let a0 = &p.alpha[j] * m2;
        let a1 = &p.alpha[j + 1] * m2;
        let am = grid::midpoint_hermite(&p.alpha[j], &p.alpha[j + 1], &da[j], &da[j + 1], dt) * m2;
        let k1 = &a0 * &s;
        let k2 = &am * (&s + &k1 * c64(dt / 2.0, 0.0));
        let k3 = &am * (&s + &k2 * c64(dt / 2.0, 0.0));
        let k4 = &a1 * (&s + &k3 * c64(dt, 0.0));
        s += (k1 + (k2 + k3) * c64(2.0, 0.0) + k4) * c64(dt / 6.0, 0.0);
    }
    let b = std::array::from_fn(|i| {
        let m = &p.beta[mid][i];
        (m + m.transpose()) * c64(0.5, 0.0)
    });
    NahmQuadruple::new(b, s)
}

/// The three rational maps `wᵀ(z − Bᵢ)⁻¹w`.
pub fn rational_maps(q: &NahmQuadruple) -> Result<[RationalMapRep; 3]> {
    let maps: Vec<RationalMapRep> = q.b.iter().map(|b| rational_map(b, &q.w)).collect::<Result<_>>()?;
    Ok(maps.try_into().unwrap_or_else(|_| unreachable!()))
}

// ---------------------------------------------------------------------------
// Real equation with poles

#[derive(Clone, Debug)]
pub struct PoleSolve {
    pub h: HermitianPath,
    pub report: SolveReport,
    /// `max ‖h(t) − Id‖ / min(t, 1 − t)`.
    pub bound_constant: f64,
}

/// Solve the real equation on `[ε, 1 − ε]` with `h = Id` at both ends.
pub fn pole_real_solve(c: &NahmComplexData, opts: &SolverOptions) -> Result<PoleSolve> {
    let k = c.path.k;
    let sol = kempf_ness::solve_real_equation(&c.path, &eye(k), &eye(k), opts)?;
    let bound_constant = sol
        .h
        .values
        .iter()
        .zip(c.path.grid.times())
        .map(|(h, t)| frob(&(h - eye(k))) / t.min(1.0 - t))
        .fold(0.0, f64::max);
    Ok(PoleSolve { h: sol.h, report: sol.report, bound_constant })
}

/// Interior window on which successive `h_ε` are compared.
pub const CAUCHY_WINDOW: (f64, f64) = (0.25, 0.75);

#[derive(Clone, Debug, Serialize)]
pub struct CauchyReport {
    pub epsilons: Vec<f64>,
    pub f_hat_sups: Vec<f64>,
    pub bound_constants: Vec<f64>,
    /// Sup distance on the window between solutions at consecutive ε.
    pub distances: Vec<f64>,
}

impl CauchyReport {
    pub fn is_decreasing(&self) -> bool {
        self.distances.windows(2).all(|w| w[1] < w[0])
    }
}

/// Solve at each ε (grid of `n` intervals) and compare consecutive
/// solutions on [`CAUCHY_WINDOW`].
pub fn cauchy_trend(q: &NahmQuadruple, epsilons: &[f64], n: usize, opts: &SolverOptions, tol: f64) -> Result<CauchyReport> {
    let samples: Vec<f64> = (0..=100)
        .map(|m| CAUCHY_WINDOW.0 + (CAUCHY_WINDOW.1 - CAUCHY_WINDOW.0) * m as f64 / 100.0)
        .collect();
    let mut rep = CauchyReport {
        epsilons: epsilons.to_vec(),
        f_hat_sups: Vec::new(),
        bound_constants: Vec::new(),
        distances: Vec::new(),
    };
    let mut prev: Option<Vec<CMat>> = None;
    for &e in epsilons {
        let c = quadruple_to_complex(q, e, n, tol)?;
        let sol = pole_real_solve(&c, opts)?;
        rep.f_hat_sups.push(sol.report.f_hat_sup);
        rep.bound_constants.push(sol.bound_constant);
        let vals: Vec<CMat> = samples.iter().map(|&t| grid::interp_cubic(&sol.h.values, &sol.h.grid, t)).collect();
        if let Some(p) = &prev {
            rep.distances.push(p.iter().zip(&vals).map(|(x, y)| frob(&(x - y))).fold(0.0, f64::max));
        }
        prev = Some(vals);
    }
    Ok(rep)
}

/// The 2×2 quadruple `Bᵢ = [[qᵢ, 1], [1, qᵢ + 1]]`, `w = e₁`.
pub fn example_quadruple(q: [f64; 3]) -> NahmQuadruple {
    let b = q.map(|x| CMat::from_row_slice(2, 2, &[c64(x, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(x + 1.0, 0.0)]));
    NahmQuadruple { b, w: CVec::from_vec(vec![c64(1.0, 0.0), c64(0.0, 0.0)]) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_derivatives_match_differences() {
        let h = 1e-5;
        for t in [0.12, 0.2, 0.25, 0.33, 0.39] {
            let (s0, d0, dd0) = smoothstep(t);
            let (sp, dp, _) = smoothstep(t + h);
            let (sm, dm, _) = smoothstep(t - h);
            assert!((d0 - (sp - sm) / (2.0 * h)).abs() < 1e-5 * d0.abs().max(1.0));
            assert!((dd0 - (dp - dm) / (2.0 * h)).abs() < 1e-4 * dd0.abs().max(1.0));
            assert!((0.0..=1.0).contains(&s0));
        }
        assert_eq!(smoothstep(0.05), (0.0, 0.0, 0.0));
        assert_eq!(smoothstep(0.45), (1.0, 0.0, 0.0));
    }

    #[test]
    fn profile_derivatives_match_differences() {
        let h = 1e-6;
        for t in [0.05, 0.15, 0.3] {
            let p = profiles(t);
            let (pp, pm) = (profiles(t + h), profiles(t - h));
            for (f, fp, fm) in [(p.phi, pp.phi, pm.phi), (p.chi, pp.chi, pm.chi), (p.rho, pp.rho, pm.rho)] {
                assert!((f[1] - (fp[0] - fm[0]) / (2.0 * h)).abs() < 1e-5 * f[1].abs().max(1.0));
                assert!((f[2] - (fp[1] - fm[1]) / (2.0 * h)).abs() < 1e-4 * f[2].abs().max(1.0));
            }
        }
    }

    #[test]
    fn lanczos_of_example_is_identity_basis() {
        let q = example_quadruple([0.0, 1.0, 2.0]);
        let lz = lanczos(&q, 1e-10).unwrap();
        assert!(frob(&(&lz.q - eye(2))) < 1e-14);
        assert!(lz.ratios.iter().all(|r| (r - c64(1.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn isotropic_vector_is_a_domain_error() {
        let b = CMat::from_diagonal(&CVec::from_vec(vec![c64(1.0, 0.0), c64(2.0, 0.0)]));
        let w = CVec::from_vec(vec![c64(1.0, 0.0), c64(0.0, 1.0)]);
        let q = NahmQuadruple::new([b.clone(), b.clone(), b], w).unwrap();
        assert!(matches!(lanczos(&q, 1e-10), Err(Error::Domain(_))));
    }
}
