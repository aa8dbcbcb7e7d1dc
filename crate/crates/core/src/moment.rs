//! Moment maps `μᵢ`, the slice operators `D` and `D*`, the tangent
//! equations `dYₖ/dt − [X, IₖY] = 0`, and a numerical witness that the
//! complex structures `Iᵢ` do not preserve tangent spaces of the moduli
//! space.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{self, Grid};
use crate::lie::su2_basis;
use crate::linalg::{self, c64, comm, frob, zeros, CMat};
use crate::nahm::{residual_fields, NahmPath};
use crate::octonion::{complex_structure, cross_table, iota, ComplexStructureIndex, SignedPerm, BASE_TRIPLES};

/// A tangent field `(a₀, …, a₇)` along a [`NahmPath`].
#[derive(Clone, Debug)]
pub struct TangentPath {
    pub grid: Grid,
    pub k: usize,
    pub values: Vec<[CMat; 8]>,
}

impl TangentPath {
    pub fn new(grid: Grid, values: Vec<[CMat; 8]>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::dim(format!(
                "tangent path has {} samples but the grid has {}",
                values.len(),
                grid.len()
            )));
        }
        let k = values[0][0].nrows();
        if values.iter().flatten().any(|m| m.nrows() != k || m.ncols() != k) {
            return Err(Error::dim(format!("tangent samples must be {k}x{k}")));
        }
        Ok(TangentPath { grid, k, values })
    }

    pub fn zeros(grid: Grid, k: usize) -> Self {
        let values = vec![std::array::from_fn(|_| zeros(k)); grid.len()];
        TangentPath { grid, k, values }
    }

    pub fn slot(&self, i: usize) -> Vec<CMat> {
        self.values.iter().map(|s| s[i].clone()).collect()
    }

    /// Apply a signed slot permutation (such as `Iₖ`) samplewise.
    pub fn permuted(&self, p: &SignedPerm) -> TangentPath {
        TangentPath {
            grid: self.grid.clone(),
            k: self.k,
            values: self.values.iter().map(|y| p.apply(y)).collect(),
        }
    }
}

fn check_attached(x: &NahmPath, grid: &Grid, k: usize) -> Result<()> {
    if !x.grid.matches(grid) {
        return Err(Error::dim("tangent field and base path live on different grids"));
    }
    if x.k != k {
        return Err(Error::dim(format!("tangent field has k = {k}, base path has k = {}", x.k)));
    }
    Ok(())
}

/// `μᵢ(X) = dXᵢ/dt + [X₀, Xᵢ] + ½ Σ f_ijk [Xⱼ, Xₖ]` on the grid; identical
/// to row `i` of [`residual_fields`].
pub fn moment_map(x: &NahmPath, i: ComplexStructureIndex) -> Result<Vec<CMat>> {
    if x.grid.n < 4 {
        return Err(Error::domain("moment map needs N >= 4"));
    }
    Ok(residual_fields(x).into_iter().map(|r| r[i.get() - 1].clone()).collect())
}

/// Sup norms of `μ₁..μ₇`.
pub fn moment_sup_norms(x: &NahmPath) -> Result<[f64; 7]> {
    crate::nahm::residual(x)
}

/// Infinitesimal gauge action `Du = ([u, X₀] − u′, [u, X₁], …, [u, X₇])`.
/// `u` must vanish at both endpoints.
pub fn linearize_d(x: &NahmPath, u: &[CMat]) -> Result<TangentPath> {
    if u.len() != x.values.len() {
        return Err(Error::dim("u must be sampled on the path grid"));
    }
    let n = u.len() - 1;
    if frob(&u[0]) > 1e-12 || frob(&u[n]) > 1e-12 {
        return Err(Error::domain("u must vanish at both endpoints"));
    }
    let du = grid::derivative(u, x.grid.dt());
    let values = x
        .values
        .iter()
        .zip(u.iter().zip(&du))
        .map(|(xs, (u, du))| {
            std::array::from_fn(|i| {
                let c = comm(u, &xs[i]);
                if i == 0 {
                    c - du
                } else {
                    c
                }
            })
        })
        .collect();
    Ok(TangentPath { grid: x.grid.clone(), k: x.k, values })
}

/// `D*a = a₀′ − Σ_{i=0..7} [Xᵢ*, aᵢ]`, the L²-adjoint of [`linearize_d`].
/// For anti-Hermitian `X` this is `a₀′ + Σ [Xᵢ, aᵢ]`; the `i = 0` term is
/// needed whenever `X₀ ≠ 0`.
pub fn linearize_d_star(x: &NahmPath, a: &TangentPath) -> Result<Vec<CMat>> {
    check_attached(x, &a.grid, a.k)?;
    let da0 = grid::derivative(&a.slot(0), x.grid.dt());
    Ok(x.values
        .iter()
        .zip(a.values.iter().zip(da0))
        .map(|(xs, (avals, d))| {
            let mut out = d;
            for i in 0..8 {
                out -= comm(&xs[i].adjoint(), &avals[i]);
            }
            out
        })
        .collect())
}

/// Trapezoid L² pairing `∫ Σᵢ Re Tr(aᵢ bᵢ*)` of two tangent fields.
pub fn tangent_inner(a: &TangentPath, b: &TangentPath) -> Result<f64> {
    if !a.grid.matches(&b.grid) || a.k != b.k {
        return Err(Error::dim("tangent fields on different grids"));
    }
    let f: Vec<f64> = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (0..8).map(|i| crate::lie::inner(&x[i], &y[i]).unwrap()).sum())
        .collect();
    Ok(grid::trapezoid(&f, a.grid.dt()))
}

/// Trapezoid L² pairing of two `𝔤`-valued paths.
pub fn path_inner(grid: &Grid, u: &[CMat], v: &[CMat]) -> Result<f64> {
    if u.len() != v.len() || u.len() != grid.len() {
        return Err(Error::dim("paths must share the grid"));
    }
    let f: Vec<f64> = u.iter().zip(v).map(|(a, b)| crate::lie::inner(a, b)).collect::<Result<_>>()?;
    Ok(grid::trapezoid(&f, grid.dt()))
}

/// `[X, Z] := Σ_{i=0..7} [Xᵢ, Zᵢ]` samplewise.
pub fn paired_bracket(x: &[CMat; 8], z: &[CMat; 8]) -> CMat {
    let mut out = comm(&x[0], &z[0]);
    for i in 1..8 {
        out += comm(&x[i], &z[i]);
    }
    out
}

/// `dYₖ/dt − Σᵢ [Xᵢ, (IₖY)ᵢ]` on the grid. For `k = 1..7` this is the
/// linearization of the `k`-th octonionic row at `X` in direction `Y`.
pub fn tangent_residual(x: &NahmPath, y: &TangentPath, k: ComplexStructureIndex) -> Result<Vec<CMat>> {
    check_attached(x, &y.grid, y.k)?;
    let p = complex_structure(k);
    let dy = grid::derivative(&y.slot(k.get()), x.grid.dt());
    Ok(x.values
        .iter()
        .zip(y.values.iter().zip(dy))
        .map(|(xs, (ys, d))| d - paired_bracket(xs, &p.apply(ys)))
        .collect())
}

/// Sup norms of the seven linearized rows and of the slice row `D*Y`.
#[derive(Clone, Debug, Serialize)]
pub struct TangentCheck {
    pub rows: [f64; 7],
    pub slice: f64,
}

impl TangentCheck {
    pub fn max(&self) -> f64 {
        self.rows.iter().cloned().fold(self.slice, f64::max)
    }
}

pub fn tangent_check(x: &NahmPath, y: &TangentPath) -> Result<TangentCheck> {
    let mut rows = [0.0; 7];
    for i in ComplexStructureIndex::all() {
        rows[i.get() - 1] = tangent_residual(x, y, i)?.iter().map(frob).fold(0.0, f64::max);
    }
    let slice = linearize_d_star(x, y)?.iter().map(frob).fold(0.0, f64::max);
    Ok(TangentCheck { rows, slice })
}

/// Outcome of [`nonpreservation_witness`].
#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub k: usize,
    /// Slot carrying the constant solution `Xₗ = ξ`.
    pub slot: usize,
    /// The triple `(i, j, k)` with `f_ijk ≠ 0` that realizes the witness.
    pub triple: (usize, usize, usize),
    /// `‖[X(0), (ι_{0ijk}∘Iₖ + Iₖ)Y(0)]‖` with `‖ξ‖ = ‖Y(0)‖ = 1`.
    pub witness_norm: f64,
    /// Sup norm of the linearized rows and slice row along the integrated `Y`.
    pub tangent_residual: f64,
    /// `‖[X, IₘY]‖` at `t = 0` for `m = 1..7`, the slice defect of `IₘY`.
    pub rotated_slice_defects: [f64; 7],
}

/// Linear tangent flow along a constant solution with only slot `l`
/// nonzero and `a₀ ≡ 0`: `aᵢ′ = −Σⱼ f_ijl [aⱼ, ξ]`.
fn tangent_rhs(xi: &CMat, l: usize, a: &[CMat; 8]) -> [CMat; 8] {
    let f = cross_table();
    std::array::from_fn(|i| {
        let mut out = zeros(xi.nrows());
        if i == 0 {
            return out;
        }
        for j in 1..8 {
            let s = f.f(i, j, l);
            if s != 0 {
                out -= comm(&a[j], xi) * c64(s as f64, 0.0);
            }
        }
        out
    })
}

fn axpy8(x: &[CMat; 8], h: f64, d: &[CMat; 8]) -> [CMat; 8] {
    std::array::from_fn(|i| &x[i] + &d[i] * c64(h, 0.0))
}

fn integrate_tangent(xi: &CMat, l: usize, y0: [CMat; 8], grid: &Grid) -> Vec<[CMat; 8]> {
    let h = grid.dt();
    let mut out = Vec::with_capacity(grid.len());
    out.push(y0);
    for _ in 0..grid.n {
        let y = out.last().unwrap();
        let k1 = tangent_rhs(xi, l, y);
        let k2 = tangent_rhs(xi, l, &axpy8(y, h / 2.0, &k1));
        let k3 = tangent_rhs(xi, l, &axpy8(y, h / 2.0, &k2));
        let k4 = tangent_rhs(xi, l, &axpy8(y, h, &k3));
        out.push(std::array::from_fn(|i| {
            &y[i] + (&k1[i] + (&k2[i] + &k3[i]) * c64(2.0, 0.0) + &k4[i]) * c64(h / 6.0, 0.0)
        }));
    }
    out
}

fn stacked_norm(y: &[CMat; 8]) -> f64 {
    y.iter().map(|m| frob(m).powi(2)).sum::<f64>().sqrt()
}

/// Build the constant solution `Xₗ = ξ` and the tangent solution from
/// `Y(0)` on an `n`-step grid, and search the seven triples for the largest
/// witness. `ξ` and `Y(0)` are normalized first.
pub fn witness_from_data(xi: &CMat, l: usize, y0: [CMat; 8], n: usize) -> Result<WitnessReport> {
    let k = xi.nrows();
    let xi = xi / c64(frob(xi), 0.0);
    let y0n = stacked_norm(&y0);
    if y0n == 0.0 {
        return Err(Error::domain("Y(0) must be nonzero"));
    }
    let y0: [CMat; 8] = std::array::from_fn(|i| &y0[i] / c64(y0n, 0.0));
    let grid = Grid::unit(n);
    let x = NahmPath::from_fn(grid.clone(), crate::lie::Flavor::Complexified, |_| {
        std::array::from_fn(|i| if i == l { xi.clone() } else { zeros(k) })
    })?;
    let y = TangentPath { grid: grid.clone(), k, values: integrate_tangent(&xi, l, y0.clone(), &grid) };
    let tangent_residual = tangent_check(&x, &y)?.max();
    let x0 = &x.values[0];
    let mut best: Option<((usize, usize, usize), f64)> = None;
    for &(i, j, kk, _) in &BASE_TRIPLES {
        let ik = complex_structure(ComplexStructureIndex::new(kk)?);
        let flip = iota(i, j, kk)?.compose(&ik);
        let a = flip.apply(&y0);
        let b = ik.apply(&y0);
        let w: [CMat; 8] = std::array::from_fn(|m| &a[m] + &b[m]);
        let norm = frob(&paired_bracket(x0, &w));
        if best.is_none_or(|(_, v)| norm > v) {
            best = Some(((i, j, kk), norm));
        }
    }
    let (triple, witness_norm) = best.expect("seven triples");
    let mut rotated_slice_defects = [0.0; 7];
    for m in ComplexStructureIndex::all() {
        let z = complex_structure(m).apply(&y0);
        rotated_slice_defects[m.get() - 1] = frob(&paired_bracket(x0, &z));
    }
    Ok(WitnessReport { k, slot: l, triple, witness_norm, tangent_residual, rotated_slice_defects })
}

/// Seeded witness: random `ξ ∈ su(k)` in slot 4 and random `Y(0)` with
/// `Y₀(0) = Y₄(0) = 0`, so that the slice condition holds along the flow.
pub fn nonpreservation_witness(k: usize, seed: u64) -> Result<WitnessReport> {
    if k < 2 {
        return Err(Error::domain("the witness needs a non-abelian group (k >= 2)"));
    }
    let mut rng = linalg::seeded_rng(seed);
    let l = 4;
    let xi = linalg::random_su(k, 1.0, &mut rng);
    let y0: [CMat; 8] = std::array::from_fn(|i| {
        let m = linalg::random_su(k, 1.0, &mut rng);
        if i == 0 || i == l {
            zeros(k)
        } else {
            m
        }
    });
    witness_from_data(&xi, l, y0, 200)
}

/// The fixed su(2) instance: `ξ = √2 σ₁` in slot 4, `Y₇(0) = √2 σ₂`, all
/// other slots zero.
pub fn nonpreservation_witness_su2() -> Result<WitnessReport> {
    let s = su2_basis();
    let r2 = c64(std::f64::consts::SQRT_2, 0.0);
    let xi = &s[0] * r2;
    let y0: [CMat; 8] = std::array::from_fn(|i| if i == 7 { &s[1] * r2 } else { zeros(2) });
    witness_from_data(&xi, 4, y0, 200)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::Flavor;

    #[test]
    fn fixed_witness_value() {
        let w = nonpreservation_witness_su2().unwrap();
        assert!((w.witness_norm - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(w.tangent_residual < 1e-3, "{w:?}");
    }

    #[test]
    fn abelian_group_is_rejected() {
        assert!(nonpreservation_witness(1, 0).is_err());
    }

    #[test]
    fn d_of_zero_and_endpoint_check() {
        let g = Grid::unit(20);
        let x = NahmPath::zeros(g.clone(), 2, Flavor::Compact);
        let u = vec![zeros(2); 21];
        let du = linearize_d(&x, &u).unwrap();
        assert!(du.values.iter().flatten().all(|m| frob(m) == 0.0));
        let mut bad = u.clone();
        bad[0] = linalg::eye(2);
        assert!(linearize_d(&x, &bad).is_err());
    }

    #[test]
    fn constant_pair_moment() {
        let s = su2_basis();
        let x = NahmPath::from_fn(Grid::unit(10), Flavor::Compact, |_| {
            std::array::from_fn(|i| match i {
                2 => s[0].clone(),
                3 => s[1].clone(),
                _ => zeros(2),
            })
        })
        .unwrap();
        let mu1 = moment_map(&x, ComplexStructureIndex::new(1).unwrap()).unwrap();
        assert!(mu1.iter().all(|m| frob(&(m - &s[2])) < 1e-15));
    }
}
