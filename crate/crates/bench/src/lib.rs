//! Fixed inputs shared by the benchmarks in `benches/`.

use octonahm_core::kempf_ness::CommutingTriplePoint;
use octonahm_core::lie::{random_commuting_triple, su2_basis};
use octonahm_core::linalg::{self, eye, zeros, CMat};
use octonahm_core::poles::{self, NahmQuadruple};

/// `ξ = (−σ₁, −σ₂, −σ₃, 0, 0, 0, 0)`, which blows up at `t = 1`.
pub fn su2_init() -> [CMat; 7] {
    let s = su2_basis();
    std::array::from_fn(|i| if i < 3 { -s[i].clone() } else { zeros(2) })
}

/// A seeded commuting triple with a well-conditioned `g`.
pub fn triple_point(k: usize, seed: u64) -> CommutingTriplePoint {
    let t = random_commuting_triple(k, seed).expect("k >= 1");
    let mut rng = linalg::seeded_rng(seed + 1000);
    let g = linalg::random_complex(k, 0.5, &mut rng) + eye(k);
    CommutingTriplePoint::new(g, t, 1e-10).expect("valid point")
}

/// The k = 2 quadruple with distinct parameters used by the pole tests.
pub fn quadruple() -> NahmQuadruple {
    poles::example_quadruple([0.0, 0.7, -1.3])
}
