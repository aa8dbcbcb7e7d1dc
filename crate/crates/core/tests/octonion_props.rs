use octonahm_core::octonion::*;
use proptest::prelude::*;

/// The seven-row cross product written out component by component.
fn cross7_rows(u: &Vec7, v: &Vec7) -> Vec7 {
    let (u1, u2, u3, u4, u5, u6, u7) = (u[0], u[1], u[2], u[3], u[4], u[5], u[6]);
    let (v1, v2, v3, v4, v5, v6, v7) = (v[0], v[1], v[2], v[3], v[4], v[5], v[6]);
    [
        u2 * v3 - u3 * v2 + u4 * v5 - u5 * v4 + u6 * v7 - u7 * v6,
        -u1 * v3 + v1 * u3 + u4 * v6 - u6 * v4 - u5 * v7 + u7 * v5,
        u1 * v2 - v1 * u2 - u4 * v7 + u7 * v4 - u5 * v6 + u6 * v5,
        -u1 * v5 + u5 * v1 - u2 * v6 + u6 * v2 + u3 * v7 - u7 * v3,
        u1 * v4 - u4 * v1 + u2 * v7 - u7 * v2 + u3 * v6 - v3 * u6,
        -u1 * v7 + v1 * u7 + u2 * v4 - u4 * v2 - u3 * v5 + v3 * u5,
        u1 * v6 - u6 * v1 - u2 * v5 + v2 * u5 - u3 * v4 + u4 * v3,
    ]
}

fn e7(i: usize) -> Vec7 {
    let mut v = [0.0; 7];
    v[i - 1] = 1.0;
    v
}

fn vec7() -> impl Strategy<Value = Vec7> {
    proptest::array::uniform7(-1.0f64..1.0)
}

fn vec8() -> impl Strategy<Value = Vec8> {
    proptest::array::uniform8(-1.0f64..1.0)
}

proptest! {
    #[test]
    fn cross7_matches_row_formula(u in vec7(), v in vec7()) {
        let a = cross7(&u, &v);
        let b = cross7_rows(&u, &v);
        for i in 0..7 {
            prop_assert!((a[i] - b[i]).abs() <= 1e-15);
        }
    }

    #[test]
    fn cross7_orthogonal_and_normed(u in vec7(), v in vec7()) {
        let w = cross7(&u, &v);
        let nu = dot7(&u, &u);
        let nv = dot7(&v, &v);
        let scale = nu * nv + 1e-300;
        prop_assert!(dot7(&w, &u).abs() <= 1e-12 * scale.sqrt().max(1.0));
        prop_assert!(dot7(&w, &v).abs() <= 1e-12 * scale.sqrt().max(1.0));
        let lhs = dot7(&w, &w);
        let rhs = nu * nv - dot7(&u, &v).powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn cross7_self_is_zero(u in vec7()) {
        prop_assert!(cross7(&u, &u).iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn assoc_form_is_alternating(a in vec7(), b in vec7(), c in vec7()) {
        let p = assoc_form(&a, &b, &c);
        prop_assert!((assoc_form(&b, &a, &c) + p).abs() < 1e-12);
        prop_assert!((assoc_form(&a, &c, &b) + p).abs() < 1e-12);
        prop_assert!((assoc_form(&b, &c, &a) - p).abs() < 1e-12);
        prop_assert!(assoc_form(&a, &a, &c).abs() < 1e-12);
    }

    #[test]
    fn alpha_forms_match_complex_structures(i in 1usize..=7, x in vec8(), y in vec8()) {
        let idx = ComplexStructureIndex::new(i).unwrap();
        let a = two_form_alpha(idx);
        let ix = complex_structure_apply(idx, &x);
        let rhs: f64 = ix.iter().zip(&y).map(|(p, q)| p * q).sum();
        prop_assert!((a.eval(&x, &y) - rhs).abs() < 1e-12);
        prop_assert!(a.eval(&x, &x).abs() < 1e-12);
    }

    #[test]
    fn lambda2_split_is_orthogonal_idempotent(c in proptest::array::uniform21(-1.0f64..1.0)) {
        let alpha = TwoForm7::from_coords(&c);
        let (a7, a14) = lambda2_split(&alpha).unwrap();
        prop_assert!(a7.add(&a14).sub(&alpha).norm() < 1e-14);
        prop_assert!(a7.inner(&a14).abs() < 1e-13);
        let (b7, b14) = lambda2_split(&a7).unwrap();
        prop_assert!(b7.sub(&a7).norm() < 1e-14);
        prop_assert!(b14.norm() < 1e-14);
        let s7 = star_phi_wedge(&a7);
        let s14 = star_phi_wedge(&a14);
        prop_assert!(s7.sub(&a7.scaled(2.0)).norm() < 1e-12);
        prop_assert!(s14.add(&a14).norm() < 1e-12);
    }
}

#[test]
fn structure_constants_antisymmetric_and_on_orbit() {
    let f = cross_table();
    let mut nonzero = 0;
    for i in 1..=7 {
        for j in 1..=7 {
            for k in 1..=7 {
                let v = f.f(i, j, k);
                assert_eq!(f.f(j, i, k), -v);
                assert_eq!(f.f(i, k, j), -v);
                assert_eq!(f.f(k, j, i), -v);
                if v != 0 {
                    nonzero += 1;
                    let mut s = [i, j, k];
                    s.sort();
                    assert!(BASE_TRIPLES.iter().any(|&(a, b, c, _)| [a, b, c] == s));
                }
            }
        }
    }
    assert_eq!(nonzero, 42);
}

#[test]
fn cross_product_spot_values() {
    assert_eq!(cross7(&e7(1), &e7(2)), e7(3));
    assert_eq!(cross7(&e7(2), &e7(5)), {
        let mut v = [0.0; 7];
        v[6] = -1.0;
        v
    });
    assert_eq!(assoc_form(&e7(1), &e7(4), &e7(5)), 1.0);
}

#[test]
fn associative_planes() {
    assert!(is_associative_plane(&[e7(1), e7(2), e7(3)]).unwrap());
    assert!(!is_associative_plane(&[e7(1), e7(2), e7(5)]).unwrap());
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut u = [0.0; 7];
    u[1] = s;
    u[3] = s;
    let mut v = [0.0; 7];
    v[1] = s;
    v[3] = -s;
    assert!(is_associative_plane(&[u, v, e7(6)]).unwrap());
}

#[test]
fn complex_structures_first_row_and_square() {
    let y: [f64; 8] = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
    let i1 = ComplexStructureIndex::new(1).unwrap();
    assert_eq!(complex_structure_apply(i1, &y), [-1.0, 0.0, -3.0, 2.0, -5.0, 4.0, -7.0, 6.0]);
    for i in ComplexStructureIndex::all() {
        let twice = complex_structure_apply(i, &complex_structure_apply(i, &y));
        assert_eq!(twice, y.map(|x| -x));
    }
}

#[test]
fn iota_examples() {
    let ones = [1.0f64; 8];
    assert_eq!(
        iota_flip((1, 2, 3), &ones).unwrap(),
        [-1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 1.0]
    );
    let y: [f64; 8] = std::array::from_fn(|m| m as f64 + 0.5);
    let twice = iota_flip((2, 4, 6), &iota_flip((2, 4, 6), &y).unwrap()).unwrap();
    assert_eq!(twice, y);
}

#[test]
fn alpha_forms_match_displayed_expansions() {
    // (i, [(p, q, sign)]) for αᵢ = Σ sign·e^{pq}
    let table: [(usize, [(usize, usize, i8); 4]); 7] = [
        (1, [(0, 1, 1), (2, 3, 1), (4, 5, 1), (6, 7, 1)]),
        (2, [(0, 2, 1), (1, 3, -1), (4, 6, 1), (5, 7, -1)]),
        (3, [(0, 3, 1), (1, 2, 1), (4, 7, -1), (5, 6, -1)]),
        (4, [(0, 4, 1), (5, 1, 1), (6, 2, 1), (7, 3, -1)]),
        (5, [(0, 5, 1), (1, 4, 1), (7, 2, -1), (6, 3, -1)]),
        (6, [(0, 6, 1), (7, 1, 1), (2, 4, 1), (3, 5, -1)]),
        (7, [(0, 7, 1), (1, 6, 1), (2, 5, -1), (3, 4, -1)]),
    ];
    for (i, terms) in table {
        let mut expected = [[0i8; 8]; 8];
        for (p, q, s) in terms {
            expected[p][q] = s;
            expected[q][p] = -s;
        }
        let a = two_form_alpha(ComplexStructureIndex::new(i).unwrap());
        assert_eq!(a.coeffs, expected, "alpha_{i}");
        // also αᵢ = e^{0i} + ι_{eᵢ}φ
        let w = phi_contract(i);
        for p in 1..8 {
            for q in 1..8 {
                assert_eq!(a.coeffs[p][q] as f64, w.coeffs[p - 1][q - 1]);
            }
        }
        assert_eq!(a.coeffs[0][i], 1);
    }
}
