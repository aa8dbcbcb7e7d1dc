use octonahm_core::grid::Grid;
use octonahm_core::lie::{su2_basis, Flavor};
use octonahm_core::linalg::{self, c64, frob, seeded_rng, zeros, CMat};
use octonahm_core::nahm::*;
use proptest::prelude::*;

fn integrate_complete(xi: &[CMat; 7], t_end: f64, n: usize) -> NahmPath {
    match integrate_reduced(xi, t_end, n).unwrap() {
        Integration::Complete(p) => p,
        Integration::BlowUp(b) => panic!("unexpected blow-up at {}", b.t_star),
    }
}

fn max_error_vs_exact(p: &NahmPath) -> f64 {
    let mut err: f64 = 0.0;
    for (j, t) in p.grid.times().into_iter().enumerate() {
        let exact = su2_blowup_exact(t);
        for i in 0..8 {
            err = err.max(frob(&(&p.values[j][i] - &exact[i])));
        }
    }
    err
}

/// Small random initial data in u(k), scaled to keep the flow bounded on [0, 1].
fn small_data(k: usize, seed: u64, scale: f64) -> [CMat; 7] {
    let mut rng = seeded_rng(seed);
    std::array::from_fn(|_| linalg::random_anti_hermitian(k, scale, &mut rng))
}

/// u(t) = exp(sin(πt) A) with A ∈ u(k); u(0) = u(1) = Id.
fn based_gauge(grid: &Grid, a: &CMat) -> (Vec<CMat>, Vec<CMat>) {
    let pi = std::f64::consts::PI;
    let g: Vec<CMat> = grid.times().iter().map(|&t| linalg::expm(&(a * c64((pi * t).sin(), 0.0)))).collect();
    let dg = grid
        .times()
        .iter()
        .zip(&g)
        .map(|(&t, u)| a * u * c64(pi * (pi * t).cos(), 0.0))
        .collect();
    (g, dg)
}

#[test]
fn su2_closed_form_on_early_interval() {
    let p = integrate_complete(&su2_blowup_initial(), 0.9, 1800);
    assert!(max_error_vs_exact(&p) < 1e-6);
    let r = residual(&p).unwrap();
    assert!(r.iter().cloned().fold(0.0, f64::max) < 1e-2);
}

#[test]
fn rk4_order_on_closed_form() {
    let e1 = max_error_vs_exact(&integrate_complete(&su2_blowup_initial(), 0.9, 200));
    let e2 = max_error_vs_exact(&integrate_complete(&su2_blowup_initial(), 0.9, 400));
    let ratio = e1 / e2;
    assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn blow_up_time_estimate() {
    let Integration::BlowUp(b) = integrate_reduced(&su2_blowup_initial(), 1.2, 2400).unwrap() else {
        panic!("expected blow-up")
    };
    assert!((b.t_star - 1.0).abs() <= 1e-2);
    assert!(b.truncated_path.grid.end < b.t_star);
    let r = residual(&b.truncated_path).unwrap();
    assert!(r.iter().all(|x| x.is_finite()));
}

#[test]
fn exact_solution_residual_is_second_order() {
    let res = |n: usize| {
        let p = NahmPath::from_fn(Grid::new(0.0, 0.9, n).unwrap(), Flavor::Compact, su2_blowup_exact).unwrap();
        residual(&p).unwrap().iter().cloned().fold(0.0, f64::max)
    };
    let ratio = res(200) / res(400);
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn commuting_data_gives_constant_path() {
    let s = su2_basis();
    let mut xi: [CMat; 7] = std::array::from_fn(|_| zeros(2));
    xi[0] = s[2].clone();
    xi[3] = &s[2] * c64(2.0, 0.0);
    let p = integrate_complete(&xi, 1.0, 64);
    for sample in &p.values {
        for i in 0..7 {
            assert!(frob(&(&sample[i + 1] - &xi[i])) < 1e-14);
        }
    }
    assert!(residual(&p).unwrap().iter().all(|&x| x <= 1e-12));
}

#[test]
fn embedded_quaternionic_rows_vanish_identically() {
    let grid = Grid::new(0.0, 0.9, 200).unwrap();
    let q = QuaternionicPath::from_fn(grid, Flavor::Compact, |t| {
        let x = su2_blowup_exact(t);
        [x[0].clone(), x[1].clone(), x[2].clone(), x[3].clone()]
    })
    .unwrap();
    let o = embed_quaternionic(&q);
    let ro = residual(&o).unwrap();
    let rq = quaternionic_residual(&q).unwrap();
    assert_eq!(&ro[..3], &rq[..]);
    assert!(ro[3..].iter().all(|&x| x == 0.0));
    let fields = residual_fields(&o);
    assert!(fields.iter().all(|s| s[3..].iter().all(|m| m.iter().all(|z| z.norm() == 0.0))));
}

#[test]
fn gauge_covariance_of_residual() {
    let grid = Grid::unit(800);
    for seed in 0..20u64 {
        let xi = small_data(2, 100 + seed, 0.2);
        let p = integrate_complete(&xi, 1.0, 800);
        let mut rng = seeded_rng(seed);
        let a = linalg::random_anti_hermitian(2, 1.0, &mut rng);
        let (g, _) = based_gauge(&grid, &a);
        let before = residual(&p).unwrap();
        let after = residual(&gauge_act(&g, &p).unwrap()).unwrap();
        for i in 0..7 {
            assert!((before[i] - after[i]).abs() < 1e-4, "seed {seed} row {i}");
        }
    }
}

#[test]
fn gauge_by_identity_and_constants() {
    let p = integrate_complete(&small_data(2, 3, 0.5), 1.0, 100);
    let id: Vec<CMat> = vec![linalg::eye(2); 101];
    let q = gauge_act(&id, &p).unwrap();
    for (a, b) in p.values.iter().zip(&q.values) {
        for i in 0..8 {
            assert!(frob(&(&a[i] - &b[i])) < 1e-15);
        }
    }
    let mut rng = seeded_rng(5);
    let u = linalg::random_unitary(2, &mut rng);
    let q = gauge_act(&vec![u.clone(); 101], &p).unwrap();
    for (a, b) in p.values.iter().zip(&q.values) {
        assert!(frob(&(&u * &a[2] * u.adjoint() - &b[2])) < 1e-13);
    }
    assert!(gauge_act(&id[..50], &p).is_err());
}

#[test]
fn chi_is_invariant_under_based_gauges() {
    let p = integrate_complete(&small_data(2, 11, 0.4), 1.0, 1000);
    let (g1, x0) = chi_map(&p, 1e-6).unwrap();
    assert!(frob(&(g1 - linalg::eye(2))) < 1e-14);
    let mut rng = seeded_rng(2);
    for _ in 0..10 {
        let a = linalg::random_anti_hermitian(2, 1.0, &mut rng);
        let (u, du) = based_gauge(&p.grid, &a);
        let q = gauge_act_with_derivative(&u, &du, &p).unwrap();
        let (h1, y0) = chi_map(&q, 1e-6).unwrap();
        assert!(frob(&(h1 - linalg::eye(2))) < 1e-8);
        for i in 0..7 {
            assert!(frob(&(&x0[i] - &y0[i])) < 1e-8);
        }
    }
}

#[test]
fn chi_of_constant_connection() {
    let mut rng = seeded_rng(6);
    let a = linalg::random_anti_hermitian(3, 1.0, &mut rng);
    let p = NahmPath::from_fn(Grid::unit(200), Flavor::Compact, |_| {
        std::array::from_fn(|i| if i == 0 { a.clone() } else { zeros(3) })
    })
    .unwrap();
    let (g1, x0) = chi_map(&p, 1e-6).unwrap();
    assert!(frob(&(g1 - linalg::expm(&a))) < 1e-9);
    assert!(x0.iter().all(|x| frob(x) == 0.0));
}

#[test]
fn unitarity_drift_at_n_1000() {
    let mut rng = seeded_rng(8);
    let a = linalg::random_anti_hermitian(3, 1.0, &mut rng);
    let b = linalg::random_anti_hermitian(3, 1.0, &mut rng);
    let p = NahmPath::from_fn(Grid::unit(1000), Flavor::Compact, |t| {
        std::array::from_fn(|i| if i == 0 { &a * c64((3.0 * t).cos(), 0.0) + &b * c64(t, 0.0) } else { zeros(3) })
    })
    .unwrap();
    let tg = temporal_gauge(&p, 1e-6).unwrap();
    assert!(tg.unitarity_defect <= 1e-10);
    assert!(tg.path.slot(0).iter().all(|x| frob(x) < 1e-12));
}

#[test]
fn scaling_of_blowup_family() {
    let grid = Grid::unit(400);
    let p = NahmPath::from_fn(grid.clone(), Flavor::Compact, |t| su2_blowup_exact(0.9 * t)).unwrap();
    let p = NahmPath { values: p.values.iter().map(|x| std::array::from_fn(|i| &x[i] * c64(0.9, 0.0))).collect(), ..p };
    let same = scale_solution(&p, 1.0).unwrap();
    for (a, b) in p.values.iter().zip(&same.values) {
        for i in 0..8 {
            assert!(frob(&(&a[i] - &b[i])) < 1e-13);
        }
    }
    let half = scale_solution(&p, 0.5).unwrap();
    for (j, t) in grid.times().into_iter().enumerate() {
        let exact = su2_blowup_exact(0.45 * t);
        for i in 1..4 {
            assert!(frob(&(&half.values[j][i] - &exact[i] * c64(0.45, 0.0))) < 1e-8);
        }
    }
    assert!(scale_solution(&p, 0.0).is_err());
}

#[test]
fn scaled_random_solutions_keep_small_residual() {
    for seed in 0..3u64 {
        let p = integrate_complete(&small_data(2, 40 + seed, 0.5), 1.0, 2000);
        for eps in [0.3, 0.7] {
            let q = scale_solution(&p, eps).unwrap();
            let r = residual(&q).unwrap();
            assert!(r.iter().all(|&x| x <= 1e-6), "seed {seed} eps {eps}: {r:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rhs_is_conjugation_covariant(seed in 0u64..10_000) {
        let mut rng = seeded_rng(seed);
        let x: [CMat; 8] = std::array::from_fn(|_| linalg::random_anti_hermitian(3, 1.0, &mut rng));
        let u = linalg::random_unitary(3, &mut rng);
        let ux: [CMat; 8] = std::array::from_fn(|i| &u * &x[i] * u.adjoint());
        let r = rhs_octonionic(&x).unwrap();
        let ur = rhs_octonionic(&ux).unwrap();
        for i in 0..7 {
            prop_assert!(frob(&(&u * &r[i] * u.adjoint() - &ur[i])) < 1e-12);
        }
    }

    #[test]
    fn rhs_of_commuting_data_vanishes(seed in 0u64..10_000) {
        let t = octonahm_core::lie::random_commuting_triple(3, seed).unwrap();
        let mut x: [CMat; 8] = std::array::from_fn(|_| zeros(3));
        x[1] = t[0].clone();
        x[4] = t[1].clone();
        x[6] = t[2].clone();
        x[0] = &t[0] * c64(0.5, -1.0);
        let r = rhs_octonionic(&x).unwrap();
        prop_assert!(r.iter().all(|m| frob(m) < 1e-9));
    }
}
