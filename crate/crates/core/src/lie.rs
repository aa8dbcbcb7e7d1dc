//! Matrix Lie algebras `u(k)` and `gl(k, ℂ)`: the invariant inner product,
//! principal sl₂ triples, the standard su(2) basis and commuting test data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, eye, zeros, CMat, I};

/// Compact (`u(k)`, anti-Hermitian) or complexified (`gl(k, ℂ)`) values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    Compact,
    Complexified,
}

/// Re Tr(X Y*).
pub fn inner(x: &CMat, y: &CMat) -> Result<f64> {
    if x.shape() != y.shape() {
        return Err(Error::dim(format!(
            "inner product of {}x{} and {}x{} matrices",
            x.nrows(),
            x.ncols(),
            y.nrows(),
            y.ncols()
        )));
    }
    Ok(x.iter().zip(y.iter()).map(|(a, b)| (a * b.conj()).re).sum())
}

/// Principal sl₂ data: ascending diagonal `a0` and lower shift `b0`.
#[derive(Clone, Debug)]
pub struct Sl2Triple {
    pub a0: CMat,
    pub b0: CMat,
}

impl Sl2Triple {
    pub fn k(&self) -> usize {
        self.a0.nrows()
    }

    /// Subdiagonal weights `γᵢ = √(i(k−i))/2`, `i = 1..k−1`.
    pub fn gammas(&self) -> Vec<f64> {
        let k = self.k();
        (1..k).map(|i| ((i * (k - i)) as f64).sqrt() / 2.0).collect()
    }
}

pub fn principal_sl2(k: usize) -> Result<Sl2Triple> {
    if k == 0 {
        return Err(Error::domain("principal sl2 triple needs k >= 1"));
    }
    let mut a0 = zeros(k);
    let mut b0 = zeros(k);
    for j in 0..k {
        a0[(j, j)] = c64(-((k - 1) as f64) / 4.0 + j as f64 / 2.0, 0.0);
    }
    for i in 1..k {
        b0[(i, i - 1)] = c64(((i * (k - i)) as f64).sqrt() / 2.0, 0.0);
    }
    Ok(Sl2Triple { a0, b0 })
}

/// σⱼ = −(i/2)·Pauliⱼ, so that [σ₁, σ₂] = σ₃ cyclically.
pub fn su2_basis() -> [CMat; 3] {
    let p1 = CMat::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)]);
    let p2 = CMat::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(0.0, -1.0), c64(0.0, 1.0), c64(0.0, 0.0)]);
    let p3 = CMat::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(-1.0, 0.0)]);
    let s = -I * 0.5;
    [p1 * s, p2 * s, p3 * s]
}

/// Three pairwise-commuting matrices, each a random quadratic polynomial in
/// one random matrix. Deterministic in `seed`.
pub fn random_commuting_triple(k: usize, seed: u64) -> Result<[CMat; 3]> {
    if k == 0 {
        return Err(Error::domain("commuting triple needs k >= 1"));
    }
    let mut rng = linalg::seeded_rng(seed);
    let m = linalg::random_complex(k, 1.0, &mut rng);
    let m2 = &m * &m;
    Ok(std::array::from_fn(|_| {
        let c = linalg::random_complex(1, 1.0, &mut rng)[(0, 0)];
        let d = linalg::random_complex(1, 1.0, &mut rng)[(0, 0)];
        let e = linalg::random_complex(1, 0.5, &mut rng)[(0, 0)];
        eye(k) * c + &m * d + &m2 * e
    }))
}
