//! Dense complex matrix helpers built on nalgebra: Hermitian spectral
//! functions, general eigenpairs, Krylov ranks and seeded random generators.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn zeros(k: usize) -> CMat {
    CMat::zeros(k, k)
}

pub fn eye(k: usize) -> CMat {
    CMat::identity(k, k)
}

pub fn comm(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Frobenius norm.
pub fn frob(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest Frobenius norm over a sampled path.
pub fn sup_frob(path: &[CMat]) -> f64 {
    path.iter().map(frob).fold(0.0, f64::max)
}

pub fn herm_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * c64(0.5, 0.0)
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    frob(&(a - a.adjoint())) <= tol
}

pub fn is_anti_hermitian(a: &CMat, tol: f64) -> bool {
    frob(&(a + a.adjoint())) <= tol
}

pub fn transpose(a: &CMat) -> CMat {
    a.transpose()
}

/// Spectral decomposition of the Hermitian part of `h`.
pub fn herm_eig(h: &CMat) -> (DVector<f64>, CMat) {
    let eig = SymmetricEigen::new(herm_part(h));
    (eig.eigenvalues, eig.eigenvectors)
}

/// `U f(Λ) U*` for a Hermitian matrix.
pub fn herm_fn(h: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (lam, u) = herm_eig(h);
    let k = lam.len();
    let mut d = u.clone();
    for j in 0..k {
        let s = c64(f(lam[j]), 0.0);
        for i in 0..k {
            d[(i, j)] *= s;
        }
    }
    d * u.adjoint()
}

fn check_pd(h: &CMat, what: &str) -> Result<()> {
    let (lam, _) = herm_eig(h);
    let min = lam.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) || !min.is_finite() {
        return Err(Error::domain(format!(
            "{what}: matrix is not positive definite (min eigenvalue {min:e})"
        )));
    }
    Ok(())
}

/// Principal square root of a Hermitian positive-definite matrix.
pub fn sqrtm_pd(h: &CMat) -> Result<CMat> {
    check_pd(h, "sqrt")?;
    Ok(herm_fn(h, f64::sqrt))
}

pub fn inv_sqrtm_pd(h: &CMat) -> Result<CMat> {
    check_pd(h, "inverse sqrt")?;
    Ok(herm_fn(h, |x| 1.0 / x.sqrt()))
}

/// Principal logarithm of a Hermitian positive-definite matrix.
pub fn logm_pd(h: &CMat) -> Result<CMat> {
    check_pd(h, "log")?;
    Ok(herm_fn(h, f64::ln))
}

pub fn expm_herm(s: &CMat) -> CMat {
    herm_fn(s, f64::exp)
}

/// Real power of a Hermitian positive-definite matrix.
pub fn powm_pd(h: &CMat, p: f64) -> Result<CMat> {
    check_pd(h, "power")?;
    Ok(herm_fn(h, |x| x.powf(p)))
}

/// General matrix exponential.
pub fn expm(a: &CMat) -> CMat {
    a.clone().exp()
}

pub fn inverse(a: &CMat) -> Result<CMat> {
    let inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::numerical("singular matrix"))?;
    if inv.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::numerical("singular matrix"));
    }
    Ok(inv)
}

pub fn min_eig_herm(h: &CMat) -> f64 {
    herm_eig(h).0.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Singular values sorted in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().cloned().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Numerical rank with threshold `rel * σ_max`.
pub fn rank(m: &CMat, rel: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        None => 0,
        Some(&0.0) => 0,
        Some(&top) => s.iter().filter(|&&x| x > rel * top).count(),
    }
}

/// Unit right singular vector for the smallest singular value.
pub fn null_vector(m: &CMat) -> CVec {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    v_t.row(idx).adjoint()
}

/// Eigenvalues of a general complex matrix with unit eigenvectors,
/// ordered by ascending real part (ties by imaginary part).
pub fn eig_general(a: &CMat) -> Result<(Vec<Complex64>, CMat)> {
    let k = a.nrows();
    let vals = a
        .clone()
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::numerical("eigenvalue computation did not converge"))?;
    let mut vals: Vec<Complex64> = vals.iter().cloned().collect();
    vals.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap()
            .then(x.im.partial_cmp(&y.im).unwrap())
    });
    let mut vecs = CMat::zeros(k, k);
    for (j, &lam) in vals.iter().enumerate() {
        let shifted = a - eye(k) * lam;
        let v = null_vector(&shifted);
        vecs.set_column(j, &v);
    }
    Ok((vals, vecs))
}

/// Krylov matrix `[w, B w, …, B^{m-1} w]`.
pub fn krylov(b: &CMat, w: &CVec, m: usize) -> CMat {
    let k = b.nrows();
    let mut out = CMat::zeros(k, m);
    let mut v = w.clone();
    for j in 0..m {
        out.set_column(j, &v);
        v = b * v;
    }
    out
}

/// Faddeev–LeVerrier expansion. Returns the characteristic polynomial
/// `det(zI − B)` (ascending coefficients, monic) and matrices `M_1..M_k`
/// with `adj(zI − B) = Σ_m M_m z^{k−m}`.
pub fn faddeev_leverrier(b: &CMat) -> (Vec<Complex64>, Vec<CMat>) {
    let k = b.nrows();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
    coeffs[k] = Complex64::new(1.0, 0.0);
    let mut ms = Vec::with_capacity(k);
    let mut m_prev = zeros(k);
    for m in 1..=k {
        let m_cur = b * &m_prev + eye(k) * coeffs[k - m + 1];
        let tr = (b * &m_cur).trace();
        coeffs[k - m] = -tr / (m as f64);
        ms.push(m_cur.clone());
        m_prev = m_cur;
    }
    (coeffs, ms)
}

pub fn poly_eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform(rng: &mut impl Rng) -> f64 {
    rng.random_range(-1.0..1.0)
}

pub fn random_complex(k: usize, scale: f64, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(k, k, |_, _| c64(scale * uniform(rng), scale * uniform(rng)))
}

pub fn random_hermitian(k: usize, scale: f64, rng: &mut impl Rng) -> CMat {
    herm_part(&random_complex(k, scale, rng))
}

pub fn random_anti_hermitian(k: usize, scale: f64, rng: &mut impl Rng) -> CMat {
    random_hermitian(k, scale, rng) * I
}

/// Traceless anti-Hermitian matrix, an element of su(k).
pub fn random_su(k: usize, scale: f64, rng: &mut impl Rng) -> CMat {
    let mut a = random_anti_hermitian(k, scale, rng);
    let tr = a.trace() / (k as f64);
    for i in 0..k {
        a[(i, i)] -= tr;
    }
    a
}

pub fn random_unitary(k: usize, rng: &mut impl Rng) -> CMat {
    let z = random_complex(k, 1.0, rng);
    let qr = z.qr();
    let q = qr.q();
    let r = qr.r();
    let mut q = q.clone();
    for j in 0..k {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        for i in 0..k {
            q[(i, j)] *= ph;
        }
    }
    q
}

pub fn random_special_unitary(k: usize, rng: &mut impl Rng) -> CMat {
    let u = random_unitary(k, rng);
    let det = u.determinant();
    let root = det.powf(1.0 / k as f64);
    u / root
}

pub fn max_abs_entry(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
