use octonahm_core::grid::Grid;
use octonahm_core::kempf_ness::*;
use octonahm_core::lie::random_commuting_triple;
use octonahm_core::linalg::{self, c64, eye, frob, seeded_rng, zeros, CMat};
use proptest::prelude::*;

fn well_conditioned(k: usize, seed: u64) -> CMat {
    let mut rng = seeded_rng(seed);
    linalg::random_complex(k, 0.5, &mut rng) + eye(k)
}

fn point(k: usize, seed: u64) -> CommutingTriplePoint {
    let t = random_commuting_triple(k, seed).unwrap();
    CommutingTriplePoint::new(well_conditioned(k, seed + 1000), t, 1e-10).unwrap()
}

#[test]
fn theta_round_trip() {
    let grid = Grid::unit(300);
    for seed in 0..3u64 {
        let q = point(2, seed);
        let inv = theta_inverse(&q, &grid, &SolverOptions::default()).unwrap();
        assert!(inv.report.f_hat_sup <= 1e-8);
        let r = complex_residual(&inv.path).unwrap();
        assert!(r.max() < 1e-8, "{r:?}");
        let back = theta(&inv.path, 1e-7).unwrap();
        let a = q.g.adjoint() * &q.g;
        let b = back.point.g.adjoint() * &back.point.g;
        assert!(frob(&(a - b)) < 1e-6, "seed {seed}");
        for i in 0..3 {
            assert!(frob(&(&back.point.t[i] - &q.t[i])) < 1e-6);
        }
    }
}

#[test]
fn real_residual_of_solution_is_second_order() {
    let q = point(2, 7);
    // Interior samples: the endpoints carry nested one-sided stencils.
    let res = |n: usize| {
        let inv = theta_inverse(&q, &Grid::unit(n), &SolverOptions::default()).unwrap();
        let f = real_residual(&inv.path).unwrap();
        f[n / 8..=7 * n / 8].iter().map(frob).fold(0.0, f64::max)
    };
    let (a, b) = (res(100), res(200));
    assert!(a < 1e-2);
    assert!((3.0..5.0).contains(&(a / b)), "{a} {b}");
}

#[test]
fn diagonal_data_stays_at_identity() {
    let mut rng = seeded_rng(3);
    let d: Vec<CMat> = (0..3)
        .map(|_| {
            let v = linalg::random_complex(3, 1.0, &mut rng);
            CMat::from_diagonal(&v.diagonal())
        })
        .collect();
    let p = DecoupledPath::constant(Grid::unit(64), &[d[0].clone(), d[1].clone(), d[2].clone()]);
    let sol = solve_real_equation(&p, &eye(3), &eye(3), &SolverOptions::default()).unwrap();
    assert_eq!(sol.report.iterations, 0);
    assert!(sol.h.values.iter().all(|h| frob(&(h - eye(3))) < 1e-14));
}

#[test]
fn initializations_agree() {
    let q = point(3, 4);
    let p = DecoupledPath::constant(Grid::unit(200), &q.t);
    let hp = linalg::herm_part(&(q.g.adjoint() * &q.g));
    let a = solve_real_equation(&p, &eye(3), &hp, &SolverOptions::default()).unwrap();
    let opts = SolverOptions { init: Initialization::Perturbed { seed: 9, scale: 1.0 }, ..Default::default() };
    let b = solve_real_equation(&p, &eye(3), &hp, &opts).unwrap();
    let dist = a.h.values.iter().zip(&b.h.values).map(|(x, y)| frob(&(x - y))).fold(0.0, f64::max);
    assert!(dist < 1e-8, "{dist}");
}

#[test]
fn energy_decreases_and_matches_lagrangian() {
    let q = point(2, 11);
    let grid = Grid::unit(400);
    let p = DecoupledPath::constant(grid.clone(), &q.t);
    let hp = linalg::herm_part(&(q.g.adjoint() * &q.g));
    let opts = SolverOptions { init: Initialization::Perturbed { seed: 1, scale: 0.5 }, ..Default::default() };
    let sol = solve_real_equation(&p, &eye(2), &hp, &opts).unwrap();
    let e = &sol.report.energy_history;
    assert!(e.windows(2).all(|w| w[1] <= w[0] + 1e-13 * w[0].abs().max(1.0)), "{e:?}");
    let gp = gauge_by_metric(&p, &sol.h).unwrap();
    let l = lagrangian(&gp);
    let last = *e.last().unwrap();
    assert!((l - last).abs() < 1e-3 * last.max(1.0), "{l} vs {last}");
}

#[test]
fn nonzero_alpha_is_removed() {
    // P = u·(0, t) for a based complex gauge u; the solver must return a
    // metric whose square root maps to the same real solution.
    let grid = Grid::unit(300);
    let q = point(2, 21);
    let base = DecoupledPath::constant(grid.clone(), &q.t);
    let mut rng = seeded_rng(30);
    let a = linalg::random_complex(2, 0.5, &mut rng);
    let pi = std::f64::consts::PI;
    let u: Vec<CMat> = grid.times().iter().map(|&t| linalg::expm(&(&a * c64((pi * t).sin(), 0.0)))).collect();
    let du: Vec<CMat> =
        grid.times().iter().zip(&u).map(|(&t, m)| &a * m * c64(pi * (pi * t).cos(), 0.0)).collect();
    let p = complex_gauge_act_with_derivative(&u, &du, &base).unwrap();
    assert!(complex_residual(&p).unwrap().max() < 1e-3);
    let hp = linalg::herm_part(&(q.g.adjoint() * &q.g));
    let sol = solve_real_equation(&p, &eye(2), &hp, &SolverOptions::default()).unwrap();
    assert!(sol.report.f_hat_sup < 1e-8);
    let gp = gauge_by_metric(&p, &sol.h).unwrap();
    let f = real_residual(&gp).unwrap();
    let interior = f[30..=270].iter().map(frob).fold(0.0, f64::max);
    assert!(interior < 1e-2, "{interior}");
}

#[test]
fn su3_invariance_of_residuals() {
    let grid = Grid::unit(200);
    let q = point(2, 5);
    let inv = theta_inverse(&q, &grid, &SolverOptions::default()).unwrap();
    let mut rng = seeded_rng(8);
    let f0 = real_residual(&inv.path).unwrap();
    let c0 = complex_rows(&inv.path);
    for _ in 0..5 {
        let a = linalg::random_special_unitary(3, &mut rng);
        let p = su3_act(&a, &inv.path).unwrap();
        let f1 = real_residual(&p).unwrap();
        let c1 = complex_rows(&p);
        for j in 0..grid.len() {
            assert!(frob(&(&f0[j] - &f1[j])) < 1e-10);
            let ev = |r: &([CMat; 3], [CMat; 3])| r.0.iter().map(|m| frob(m).powi(2)).sum::<f64>().sqrt();
            let cm = |r: &([CMat; 3], [CMat; 3])| r.1.iter().map(|m| frob(m).powi(2)).sum::<f64>().sqrt();
            assert!((ev(&c0[j]) - ev(&c1[j])).abs() < 1e-10);
            assert!((cm(&c0[j]) - cm(&c1[j])).abs() < 1e-10);
        }
    }
    assert!(su3_act(&eye(3).scale(2.0), &inv.path).is_err());
}

#[test]
fn sigma_is_convex_between_solutions() {
    // At N = 2000 the discrete equation bottoms out near 3e-8.
    let grid = Grid::unit(2000);
    let opts = SolverOptions { tol: 1e-7, ..Default::default() };
    for seed in 0..3u64 {
        let q = point(2, 40 + seed);
        let p1 = theta_inverse(&q, &grid, &opts).unwrap();
        let q2 = CommutingTriplePoint::new(well_conditioned(2, 90 + seed), q.t.clone(), 1e-10).unwrap();
        let p2 = theta_inverse(&q2, &grid, &opts).unwrap();
        let g1 = p1.h.sqrt();
        let g2 = p2.h.sqrt();
        let g: Vec<CMat> = g1.iter().zip(&g2).map(|(a, b)| b * linalg::inverse(a).unwrap()).collect();
        let rep = convexity_check(&p1.path, &g).unwrap();
        assert!(rep.min_slack >= -1e-4, "seed {seed}: {rep:?}");
    }
}

#[test]
fn invalid_inputs() {
    let t = [zeros(2), zeros(2), zeros(2)];
    assert!(CommutingTriplePoint::new(zeros(2), t.clone(), 1e-10).is_err());
    let mut rng = seeded_rng(1);
    let nc = [linalg::random_complex(2, 1.0, &mut rng), linalg::random_complex(2, 1.0, &mut rng), zeros(2)];
    assert!(CommutingTriplePoint::new(eye(2), nc, 1e-10).is_err());
    let grid = Grid::unit(16);
    assert!(HermitianPath::new(grid.clone(), vec![eye(2).scale(-1.0); 17]).is_err());
    let p = DecoupledPath::constant(grid, &t);
    assert!(solve_real_equation(&p, &eye(2), &eye(2).scale(-1.0), &SolverOptions::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn geodesic_between_metrics_is_exact_for_zero_beta(seed in 0u64..10_000) {
        let mut rng = seeded_rng(seed);
        let a = linalg::expm_herm(&linalg::random_hermitian(2, 0.7, &mut rng));
        let b = linalg::expm_herm(&linalg::random_hermitian(2, 0.7, &mut rng));
        let grid = Grid::unit(32);
        let p = DecoupledPath::constant(grid.clone(), &[zeros(2), zeros(2), zeros(2)]);
        let sol = solve_real_equation(&p, &a, &b, &SolverOptions::default()).unwrap();
        for (j, t) in grid.times().into_iter().enumerate() {
            let g = geodesic(&a, &b, t).unwrap();
            prop_assert!(frob(&(&sol.h.values[j] - g)) < 1e-9);
        }
    }

    #[test]
    fn sigma_is_nonnegative_and_inversion_symmetric(seed in 0u64..10_000) {
        let mut rng = seeded_rng(seed);
        let h = linalg::expm_herm(&linalg::random_hermitian(3, 1.0, &mut rng));
        let s = sigma(&h).unwrap();
        prop_assert!(s >= 0.0);
        let hi = linalg::inverse(&h).unwrap();
        prop_assert!((s - sigma(&linalg::herm_part(&hi)).unwrap()).abs() < 1e-9 * s.max(1.0));
    }
}
