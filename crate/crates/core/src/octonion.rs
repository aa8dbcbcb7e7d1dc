//! G₂ linear algebra on ℝ⁷ and ℝ⁸ = 𝕆: structure constants, cross products,
//! the associative 3-form, the Λ² = Λ²₇ ⊕ Λ²₁₄ split, and the seven complex
//! structures `I₁..I₇` with their 2-forms `αᵢ`.

use std::ops::Neg;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];
/// Coordinates in the frame `e₁..e₇` (array index `i - 1`).
pub type Vec7 = [f64; 7];
/// Coordinates in the frame `e₀..e₇` (array index = slot).
pub type Vec8 = [f64; 8];

/// The seven signed triples spanning φ.
pub const BASE_TRIPLES: [(usize, usize, usize, i8); 7] = [
    (1, 2, 3, 1),
    (1, 4, 5, 1),
    (1, 6, 7, 1),
    (2, 4, 6, 1),
    (2, 5, 7, -1),
    (3, 4, 7, -1),
    (3, 5, 6, -1),
];

/// Totally antisymmetric structure constants `f_ijk`, indices `1..=7`.
#[derive(Clone, Debug)]
pub struct CrossTable {
    f: [[[i8; 8]; 8]; 8],
}

impl CrossTable {
    pub fn generate() -> Self {
        let mut f = [[[0i8; 8]; 8]; 8];
        for &(i, j, k, s) in &BASE_TRIPLES {
            let perms = [
                (i, j, k, s),
                (j, k, i, s),
                (k, i, j, s),
                (j, i, k, -s),
                (i, k, j, -s),
                (k, j, i, -s),
            ];
            for (a, b, c, sign) in perms {
                f[a][b][c] = sign;
            }
        }
        CrossTable { f }
    }

    /// `f_ijk` for `i, j, k ∈ 1..=7`; zero outside that range.
    pub fn f(&self, i: usize, j: usize, k: usize) -> i8 {
        if i == 0 || j == 0 || k == 0 || i > 7 || j > 7 || k > 7 {
            return 0;
        }
        self.f[i][j][k]
    }

    /// Nonzero entries `(i, j, k, f_ijk)` with `j < k`, grouped by `i`.
    pub fn pairs_for(&self, i: usize) -> Vec<(usize, usize, i8)> {
        let mut out = Vec::new();
        for j in 1..=7 {
            for k in (j + 1)..=7 {
                let s = self.f(i, j, k);
                if s != 0 {
                    out.push((j, k, s));
                }
            }
        }
        out
    }
}

/// Shared instance of the structure constants.
pub fn cross_table() -> &'static CrossTable {
    static TABLE: OnceLock<CrossTable> = OnceLock::new();
    TABLE.get_or_init(CrossTable::generate)
}

pub fn cross7(u: &Vec7, v: &Vec7) -> Vec7 {
    let f = cross_table();
    let mut out = [0.0; 7];
    for i in 1..=7 {
        let mut s = 0.0;
        for j in 1..=7 {
            for k in 1..=7 {
                let c = f.f(i, j, k);
                if c != 0 {
                    s += c as f64 * u[j - 1] * v[k - 1];
                }
            }
        }
        out[i - 1] = s;
    }
    out
}

pub fn cross3(u: &Vec3, v: &Vec3) -> Vec3 {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

pub fn dot7(u: &Vec7, v: &Vec7) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// φ(a, b, c) = ⟨a × b, c⟩.
pub fn assoc_form(a: &Vec7, b: &Vec7, c: &Vec7) -> f64 {
    dot7(&cross7(a, b), c)
}

/// Antisymmetric 7×7 coefficient matrix of a 2-form on ℝ⁷;
/// `coeffs[a][b]` multiplies `e^{(a+1)(b+1)}` for `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwoForm7 {
    pub coeffs: [[f64; 7]; 7],
}

impl TwoForm7 {
    pub fn zero() -> Self {
        TwoForm7 { coeffs: [[0.0; 7]; 7] }
    }

    /// `e^{ab}` with 1-based indices.
    pub fn basis(a: usize, b: usize) -> Self {
        let mut m = Self::zero();
        m.coeffs[a - 1][b - 1] = 1.0;
        m.coeffs[b - 1][a - 1] = -1.0;
        m
    }

    pub fn from_matrix(coeffs: [[f64; 7]; 7]) -> Result<Self> {
        for a in 0..7 {
            for b in 0..7 {
                if (coeffs[a][b] + coeffs[b][a]).abs() > 1e-12 {
                    return Err(Error::domain(format!(
                        "2-form coefficients are not antisymmetric at ({}, {})",
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        Ok(TwoForm7 { coeffs })
    }

    /// Frobenius pairing of coefficient matrices.
    pub fn inner(&self, other: &Self) -> f64 {
        let mut s = 0.0;
        for a in 0..7 {
            for b in 0..7 {
                s += self.coeffs[a][b] * other.coeffs[a][b];
            }
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut m = *self;
        m.coeffs.iter_mut().flatten().for_each(|x| *x *= s);
        m
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut m = *self;
        for a in 0..7 {
            for b in 0..7 {
                m.coeffs[a][b] += other.coeffs[a][b];
            }
        }
        m
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }

    /// Coordinates in the basis `e^{ab}`, `a < b`, lexicographic (21 entries).
    pub fn to_coords(&self) -> [f64; 21] {
        let mut out = [0.0; 21];
        let mut idx = 0;
        for a in 0..7 {
            for b in (a + 1)..7 {
                out[idx] = self.coeffs[a][b];
                idx += 1;
            }
        }
        out
    }

    pub fn from_coords(c: &[f64; 21]) -> Self {
        let mut m = Self::zero();
        let mut idx = 0;
        for a in 0..7 {
            for b in (a + 1)..7 {
                m.coeffs[a][b] = c[idx];
                m.coeffs[b][a] = -c[idx];
                idx += 1;
            }
        }
        m
    }
}

/// ι_{eᵢ}φ, with `(ι_{eᵢ}φ)_{jk} = f_ijk`.
pub fn phi_contract(i: usize) -> TwoForm7 {
    let f = cross_table();
    let mut m = TwoForm7::zero();
    for j in 1..=7 {
        for k in 1..=7 {
            m.coeffs[j - 1][k - 1] = f.f(i, j, k) as f64;
        }
    }
    m
}

/// Orthogonal projection onto Λ²₇ = span{ι_{eᵢ}φ} and its complement.
pub fn lambda2_split(alpha: &TwoForm7) -> Result<(TwoForm7, TwoForm7)> {
    let alpha = TwoForm7::from_matrix(alpha.coeffs)?;
    let mut a7 = TwoForm7::zero();
    for i in 1..=7 {
        let w = phi_contract(i);
        let c = alpha.inner(&w) / w.inner(&w);
        a7 = a7.add(&w.scaled(c));
    }
    let a14 = alpha.sub(&a7);
    Ok((a7, a14))
}

/// Forms on ℝ⁷ stored by index-set bitmask (bit `a` ↔ `e_{a+1}`).
mod exterior {
    pub type Form = [f64; 128];

    /// Sign of `e^I ∧ e^J` relative to `e^{I∪J}` (disjoint masks).
    pub fn merge_sign(i: u8, j: u8) -> f64 {
        let mut inversions = 0;
        for a in 0..7 {
            if i & (1 << a) != 0 {
                inversions += (j & ((1u8 << a) - 1)).count_ones();
            }
        }
        if inversions % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn wedge(a: &Form, b: &Form) -> Form {
        let mut out = [0.0; 128];
        for i in 0..128u8 {
            if a[i as usize] == 0.0 {
                continue;
            }
            for j in 0..128u8 {
                if b[j as usize] == 0.0 || i & j != 0 {
                    continue;
                }
                out[(i | j) as usize] += merge_sign(i, j) * a[i as usize] * b[j as usize];
            }
        }
        out
    }

    pub fn hodge(a: &Form) -> Form {
        let mut out = [0.0; 128];
        for i in 0..128u8 {
            if a[i as usize] != 0.0 {
                let c = !i & 0x7f;
                out[c as usize] += merge_sign(i, c) * a[i as usize];
            }
        }
        out
    }
}

fn phi_form() -> exterior::Form {
    let mut phi = [0.0; 128];
    for &(i, j, k, s) in &BASE_TRIPLES {
        let mask = (1u8 << (i - 1)) | (1u8 << (j - 1)) | (1u8 << (k - 1));
        phi[mask as usize] = s as f64;
    }
    phi
}

/// α ↦ ⋆(φ ∧ α) on Λ²(ℝ⁷).
pub fn star_phi_wedge(alpha: &TwoForm7) -> TwoForm7 {
    let mut a = [0.0; 128];
    for p in 0..7 {
        for q in (p + 1)..7 {
            a[((1u8 << p) | (1u8 << q)) as usize] = alpha.coeffs[p][q];
        }
    }
    let out = exterior::hodge(&exterior::wedge(&phi_form(), &a));
    let mut m = TwoForm7::zero();
    for p in 0..7 {
        for q in (p + 1)..7 {
            let v = out[((1u8 << p) | (1u8 << q)) as usize];
            m.coeffs[p][q] = v;
            m.coeffs[q][p] = -v;
        }
    }
    m
}

/// Matrix of [`star_phi_wedge`] in the lexicographic `e^{ab}` basis.
pub fn star_phi_wedge_matrix() -> [[f64; 21]; 21] {
    let mut m = [[0.0; 21]; 21];
    for col in 0..21 {
        let mut e = [0.0; 21];
        e[col] = 1.0;
        let image = star_phi_wedge(&TwoForm7::from_coords(&e)).to_coords();
        for row in 0..21 {
            m[row][col] = image[row];
        }
    }
    m
}

/// Whether span{u₁, u₂, u₃} is associative: |φ(u₁,u₂,u₃)| equals the Gram
/// volume within `1e-9`.
pub fn is_associative_plane(basis: &[Vec7; 3]) -> Result<bool> {
    let mut gram = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            gram[a][b] = dot7(&basis[a], &basis[b]);
        }
    }
    let det = gram[0][0] * (gram[1][1] * gram[2][2] - gram[1][2] * gram[2][1])
        - gram[0][1] * (gram[1][0] * gram[2][2] - gram[1][2] * gram[2][0])
        + gram[0][2] * (gram[1][0] * gram[2][1] - gram[1][1] * gram[2][0]);
    let scale: f64 = (0..3).map(|a| gram[a][a]).product();
    if !(det > 1e-14 * scale.max(1e-300)) {
        return Err(Error::domain("degenerate basis: vectors are linearly dependent"));
    }
    let vol = det.sqrt();
    let phi = assoc_form(&basis[0], &basis[1], &basis[2]);
    Ok((phi.abs() - vol).abs() <= 1e-9)
}

/// Index `i ∈ 1..=7` of a complex structure `Iᵢ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComplexStructureIndex(u8);

impl ComplexStructureIndex {
    pub fn new(i: usize) -> Result<Self> {
        if (1..=7).contains(&i) {
            Ok(ComplexStructureIndex(i as u8))
        } else {
            Err(Error::domain(format!("complex structure index must be in 1..=7, got {i}")))
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = ComplexStructureIndex> {
        (1..=7).map(|i| ComplexStructureIndex(i as u8))
    }
}

/// A signed permutation of the eight slots: output slot `m` is
/// `sign[m] · Y[src[m]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignedPerm {
    pub src: [usize; 8],
    pub sign: [i8; 8],
}

impl SignedPerm {
    pub fn identity() -> Self {
        SignedPerm { src: [0, 1, 2, 3, 4, 5, 6, 7], sign: [1; 8] }
    }

    pub fn apply<T: Clone + Neg<Output = T>>(&self, y: &[T; 8]) -> [T; 8] {
        std::array::from_fn(|m| {
            let v = y[self.src[m]].clone();
            if self.sign[m] < 0 {
                -v
            } else {
                v
            }
        })
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SignedPerm) -> SignedPerm {
        let mut src = [0; 8];
        let mut sign = [0; 8];
        for m in 0..8 {
            src[m] = other.src[self.src[m]];
            sign[m] = self.sign[m] * other.sign[self.src[m]];
        }
        SignedPerm { src, sign }
    }

    pub fn negate(&self) -> SignedPerm {
        let mut p = *self;
        p.sign.iter_mut().for_each(|s| *s = -*s);
        p
    }

    /// Integer matrix `M` with `(M Y)_m = sign[m] Y[src[m]]`.
    pub fn matrix(&self) -> [[i32; 8]; 8] {
        let mut m = [[0; 8]; 8];
        for row in 0..8 {
            m[row][self.src[row]] = self.sign[row] as i32;
        }
        m
    }
}

const COMPLEX_STRUCTURES: [([usize; 8], [i8; 8]); 7] = [
    ([1, 0, 3, 2, 5, 4, 7, 6], [-1, 1, -1, 1, -1, 1, -1, 1]),
    ([2, 3, 0, 1, 6, 7, 4, 5], [-1, 1, 1, -1, -1, 1, 1, -1]),
    ([3, 2, 1, 0, 7, 6, 5, 4], [-1, -1, 1, 1, 1, 1, -1, -1]),
    ([4, 5, 6, 7, 0, 1, 2, 3], [-1, 1, 1, -1, 1, -1, -1, 1]),
    ([5, 4, 7, 6, 1, 0, 3, 2], [-1, -1, -1, -1, 1, 1, 1, 1]),
    ([6, 7, 4, 5, 2, 3, 0, 1], [-1, 1, -1, 1, 1, -1, 1, -1]),
    ([7, 6, 5, 4, 3, 2, 1, 0], [-1, -1, 1, 1, -1, -1, 1, 1]),
];

/// `Iᵢ` as a signed permutation of slots.
pub fn complex_structure(i: ComplexStructureIndex) -> SignedPerm {
    let (src, sign) = COMPLEX_STRUCTURES[i.get() - 1];
    SignedPerm { src, sign }
}

/// `Iᵢ Y`; slots may be scalars or matrices.
pub fn complex_structure_apply<T: Clone + Neg<Output = T>>(
    i: ComplexStructureIndex,
    y: &[T; 8],
) -> [T; 8] {
    complex_structure(i).apply(y)
}

/// The sign flip ι_{0ijk} on slots 0, i, j, k.
pub fn iota(i: usize, j: usize, k: usize) -> Result<SignedPerm> {
    if cross_table().f(i, j, k) == 0 {
        return Err(Error::domain(format!("f_{i}{j}{k} = 0: ({i},{j},{k}) is not a triple of φ")));
    }
    let mut p = SignedPerm::identity();
    for s in [0, i, j, k] {
        p.sign[s] = -1;
    }
    Ok(p)
}

pub fn iota_flip<T: Clone + Neg<Output = T>>(
    indices: (usize, usize, usize),
    y: &[T; 8],
) -> Result<[T; 8]> {
    Ok(iota(indices.0, indices.1, indices.2)?.apply(y))
}

/// Antisymmetric 8×8 coefficient matrix of a 2-form on ℝ⁸;
/// the form evaluates as `α(x, y) = xᵀ M y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TwoForm8 {
    pub coeffs: [[i8; 8]; 8],
}

impl TwoForm8 {
    pub fn eval(&self, x: &Vec8, y: &Vec8) -> f64 {
        let mut s = 0.0;
        for a in 0..8 {
            for b in 0..8 {
                s += self.coeffs[a][b] as f64 * x[a] * y[b];
            }
        }
        s
    }
}

/// αᵢ = e^{0i} + ι_{eᵢ}φ, derived from `Iᵢ` so that αᵢ(Y₁, Y₂) = ⟨IᵢY₁, Y₂⟩.
pub fn two_form_alpha(i: ComplexStructureIndex) -> TwoForm8 {
    let p = complex_structure(i);
    let mut coeffs = [[0i8; 8]; 8];
    for m in 0..8 {
        coeffs[p.src[m]][m] = p.sign[m];
    }
    TwoForm8 { coeffs }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e7(i: usize) -> Vec7 {
        let mut v = [0.0; 7];
        v[i - 1] = 1.0;
        v
    }

    #[test]
    fn cross_examples() {
        assert_eq!(cross7(&e7(1), &e7(2)), e7(3));
        let mut m7 = [0.0; 7];
        m7[6] = -1.0;
        assert_eq!(cross7(&e7(2), &e7(5)), m7);
        assert_eq!(cross3(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]), [-3.0, 6.0, -3.0]);
        assert_eq!(cross3(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn assoc_form_examples() {
        assert_eq!(assoc_form(&e7(1), &e7(4), &e7(5)), 1.0);
        assert_eq!(assoc_form(&e7(1), &e7(2), &e7(4)), 0.0);
    }

    #[test]
    fn alpha_one_matches_known_expansion() {
        let a = two_form_alpha(ComplexStructureIndex::new(1).unwrap());
        for (p, q) in [(0, 1), (2, 3), (4, 5), (6, 7)] {
            assert_eq!(a.coeffs[p][q], 1);
            assert_eq!(a.coeffs[q][p], -1);
        }
    }

    #[test]
    fn split_of_basis_element() {
        let (a7, a14) = lambda2_split(&phi_contract(1)).unwrap();
        assert!(a7.sub(&phi_contract(1)).norm() < 1e-15);
        assert!(a14.norm() < 1e-15);
        let (b7, _) = lambda2_split(&TwoForm7::basis(1, 2)).unwrap();
        assert!(b7.sub(&phi_contract(3).scaled(1.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut m = [[0.0; 7]; 7];
        m[0][1] = 1.0;
        assert!(TwoForm7::from_matrix(m).is_err());
        assert!(ComplexStructureIndex::new(0).is_err());
        assert!(ComplexStructureIndex::new(8).is_err());
        assert!(iota(1, 2, 4).is_err());
        assert!(is_associative_plane(&[e7(1), e7(1), e7(2)]).is_err());
    }
}
